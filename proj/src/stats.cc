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


#include "lmre/stats.h"

#include <cmath>
#include <limits>
#include <string>

#include "lmre/error.h"

namespace lmre {
namespace {

constexpr int kMaxIterations = 10'000;
constexpr double kEpsilon = 1e-16;

// Series for the lower function P(a, x); converges quickly for x < a + 1.
double GammaPSeries(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxIterations; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEpsilon) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) (modified Lentz); for x >= a + 1.
double GammaQContinuedFraction(double a, double x) {
  constexpr double kTiny = std::numeric_limits<double>::min() / kEpsilon;
  double b = x + 1 - a;
  double c = 1 / kTiny;
  double d = 1 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    double an = -i * (i - a);
    b += 2;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1) < kEpsilon) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

ChiSquareResult Finish(double statistic, std::size_t dof) {
  ChiSquareResult r;
  r.statistic = statistic;
  r.dof = dof;
  r.p_value = RegularizedGammaQ(static_cast<double>(dof) / 2, statistic / 2);
  return r;
}

}  // namespace

double RegularizedGammaQ(double a, double x) {
  if (!(a > 0) || !(x >= 0)) {
    throw Error(Stage::kExec, "incomplete gamma needs a > 0 and x >= 0");
  }
  if (x == 0) return 1.0;
  if (x < a + 1) return 1.0 - GammaPSeries(a, x);
  return GammaQContinuedFraction(a, x);
}

ChiSquareResult ChiSquareTest(const ContingencyTable& table) {
  const std::size_t rows = table.size();
  if (rows < 2) throw Error(Stage::kExec, "contingency table needs at least 2 groups");
  const std::size_t cols = table[0].size();
  if (cols < 2) throw Error(Stage::kExec, "contingency table needs at least 2 outcomes");
  std::vector<unsigned __int128> row_sum(rows, 0), col_sum(cols, 0);
  unsigned __int128 n = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (table[i].size() != cols) throw Error(Stage::kExec, "ragged contingency table");
    for (std::size_t j = 0; j < cols; ++j) {
      row_sum[i] += table[i][j];
      col_sum[j] += table[i][j];
      n += table[i][j];
    }
  }
  for (auto r : row_sum) {
    if (r == 0) throw Error(Stage::kExec, "contingency table has an empty group");
  }
  for (auto c : col_sum) {
    if (c == 0) throw Error(Stage::kExec, "contingency table has an empty outcome");
  }
  // sum (O - E)^2 / E with E = r c / n, computed as (O n - r c)^2 / (r c n)
  // so that exactly proportional tables give exactly zero.
  double statistic = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      __int128 diff = static_cast<__int128>(table[i][j] * n) -
                      static_cast<__int128>(row_sum[i] * col_sum[j]);
      double num = static_cast<double>(diff);
      double den = static_cast<double>(row_sum[i] * col_sum[j]) * static_cast<double>(n);
      statistic += num * num / den;
    }
  }
  return Finish(statistic, (rows - 1) * (cols - 1));
}

ChiSquareResult ChiSquareGoodnessOfFit(std::span<const std::uint64_t> observed,
                                       std::span<const double> expected) {
  if (observed.size() != expected.size() || observed.size() < 2) {
    throw Error(Stage::kExec, "goodness of fit needs matching bins (at least 2)");
  }
  double n = 0;
  for (auto o : observed) n += static_cast<double>(o);
  double statistic = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(expected[i] > 0)) throw Error(Stage::kExec, "expected probabilities must be positive");
    double e = expected[i] * n;
    double diff = static_cast<double>(observed[i]) - e;
    statistic += diff * diff / e;
  }
  return Finish(statistic, observed.size() - 1);
}

double TotalVariation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error(Stage::kExec, "distribution sizes differ");
  double sum = 0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::fabs(p[i] - q[i]);
  return sum / 2;
}

}  // namespace lmre
