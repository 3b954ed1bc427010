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

// The autoregressive language-model interface, two small reference models,
// and decision rules (which tokens a decoder may emit at a step).

#ifndef LMRE_LANGUAGE_MODEL_H_
#define LMRE_LANGUAGE_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lmre/vocabulary.h"

namespace lmre {

inline constexpr std::size_t kDefaultMaxSequenceLength = 64;

class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual const Vocabulary& vocab() const = 0;
  virtual std::size_t max_sequence_length() const = 0;
  TokenId eos() const { return vocab().eos(); }

  // p(next | prefix) over all vocab().size() ids. Throws Error(kModel) when
  // prefix.size() >= max_sequence_length(). Must be safe to call
  // concurrently.
  virtual std::vector<double> NextDistribution(
      std::span<const TokenId> prefix) const = 0;
};

struct DecisionRule {
  enum class Kind { kNone, kTopK };
  Kind kind = Kind::kNone;
  std::size_t k = 0;

  static DecisionRule None() { return {}; }
  static DecisionRule TopK(std::size_t k) { return {Kind::kTopK, k}; }
};

// Admissible ids in ascending order: the k most probable (ties to the lower
// id) for top-k, every id with positive probability otherwise. Zero-probability
// ids are never admissible.
std::vector<TokenId> ApplyRule(std::span<const double> dist, const DecisionRule& rule);

// Same, as a membership mask of dist.size() entries.
std::vector<char> AdmissibleMask(std::span<const double> dist, const DecisionRule& rule);

struct ScoringOptions {
  // Steps before this index are conditioning text: exempt from the rule but
  // still costed.
  std::size_t prefix_len = 0;
  // Append EOS as a final scored step.
  bool require_eos = false;
  // The trailing EOS step bypasses the rule.
  bool exempt_eos = false;
};

// Sum of log p over the steps, or nullopt when a post-prefix step is outside
// the admissible set (or has probability zero).
std::optional<double> SequenceLogProb(const LanguageModel& m,
                                      std::span<const TokenId> tokens,
                                      const DecisionRule& rule,
                                      const ScoringOptions& options = {});

// Add-alpha smoothed n-gram model over a vocabulary. Contexts are padded on
// the left with EOS (which doubles as the beginning-of-sequence marker) and
// every training line ends with EOS.
class NGramLM : public LanguageModel {
 public:
  NGramLM(std::shared_ptr<const Vocabulary> vocab, std::size_t order,
          double alpha = 0.1,
          std::size_t max_sequence_length = kDefaultMaxSequenceLength);

  // Adds the canonical encoding of each non-empty line.
  void Train(std::string_view corpus);
  void TrainSequence(std::span<const TokenId> tokens);

  const Vocabulary& vocab() const override { return *vocab_; }
  std::size_t max_sequence_length() const override { return max_length_; }
  std::vector<double> NextDistribution(std::span<const TokenId> prefix) const override;

  std::size_t order() const { return order_; }
  double alpha() const { return alpha_; }

  // Text format, first line "lmre-ngram v1"; round-trips exactly.
  std::string Serialize() const;
  static NGramLM Parse(std::shared_ptr<const Vocabulary> vocab, std::string_view text);

 private:
  struct Row {
    std::uint64_t total = 0;
    std::map<TokenId, std::uint64_t> counts;
  };

  std::vector<TokenId> Context(std::span<const TokenId> prefix) const;

  std::shared_ptr<const Vocabulary> vocab_;
  std::size_t order_;
  double alpha_;
  std::size_t max_length_;
  std::map<std::vector<TokenId>, Row> rows_;
};

// Reproducible pseudo-random model: logits are a hash of (seed, last
// `window` tokens, candidate id), softmaxed with the given scale. Identical
// contexts give identical distributions.
class HashLM : public LanguageModel {
 public:
  HashLM(std::shared_ptr<const Vocabulary> vocab, std::uint64_t seed,
         std::size_t window = 4, double scale = 4.0,
         std::size_t max_sequence_length = kDefaultMaxSequenceLength);

  const Vocabulary& vocab() const override { return *vocab_; }
  std::size_t max_sequence_length() const override { return max_length_; }
  std::vector<double> NextDistribution(std::span<const TokenId> prefix) const override;

 private:
  std::shared_ptr<const Vocabulary> vocab_;
  std::uint64_t seed_;
  std::size_t window_;
  double scale_;
  std::size_t max_length_;
};

}  // namespace lmre

#endif  // LMRE_LANGUAGE_MODEL_H_
