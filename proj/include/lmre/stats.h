// Copyright 2026 The lmre Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Pearson chi-square tests and the special function behind their p-values.

#ifndef LMRE_STATS_H_
#define LMRE_STATS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lmre {

// Regularized upper incomplete gamma function Q(a, x) = Γ(a, x) / Γ(a),
// for a > 0 and x >= 0.
double RegularizedGammaQ(double a, double x);

struct ChiSquareResult {
  double statistic = 0;
  std::size_t dof = 0;
  double p_value = 1;
};

// Groups x outcomes table of counts.
using ContingencyTable = std::vector<std::vector<std::uint64_t>>;

// Independence test. Throws Error(kExec) for tables with fewer than two rows
// or columns, or with an empty row or column.
ChiSquareResult ChiSquareTest(const ContingencyTable& table);

// Goodness of fit of `observed` counts to `expected` probabilities (which
// must be positive and sum to 1); dof = bins - 1.
ChiSquareResult ChiSquareGoodnessOfFit(std::span<const std::uint64_t> observed,
                                       std::span<const double> expected);

// Half the L1 distance between two distributions of equal size.
double TotalVariation(std::span<const double> p, std::span<const double> q);

}  // namespace lmre

#endif  // LMRE_STATS_H_
