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

// Traversals of (prefix token automaton . suffix token automaton) x model:
// best-first shortest path and random sampling. The prefix region is
// conditioning text: it is never pruned by the decision rule.

#ifndef LMRE_EXECUTOR_H_
#define LMRE_EXECUTOR_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lmre/automaton.h"
#include "lmre/graph_compiler.h"
#include "lmre/language_model.h"
#include "lmre/vocabulary.h"

namespace lmre {

struct MatchResult {
  // Prefix tokens followed by suffix tokens; EOS is never included.
  TokenSequence tokens;
  std::size_t prefix_len = 0;
  std::string text;
  // Bytes of `text` produced by the prefix tokens.
  std::size_t prefix_text_len = 0;
  // Sum of log p over every token, plus log p(EOS) when EOS was scored.
  double logprob = 0;
  // Priority used by the shortest-path search (differs from -logprob only
  // with a zero-cost prefix).
  double cost = 0;
  // Each region equals the encoder's output for its text.
  bool canonical = false;
  bool eos = false;
  // Filled in by the query layer from an alignment with the unexpanded
  // pattern; byte offsets into `text`.
  std::size_t n_edits = 0;
  std::vector<std::size_t> edit_positions;
  // p of each token (and of EOS last, when scored).
  std::vector<double> step_probs;
};

// A model distribution and its admissible set under the traversal's rule.
struct StepDistribution {
  std::vector<double> p;
  std::vector<char> admissible;
};

// Completion-time predicate on (prefix text, suffix text); false discards.
using CompletionFilter = std::function<bool(std::string_view, std::string_view)>;

enum class PrefixWeighting {
  // Edge weight = number of accepting walks through the edge: uniform over
  // prefix strings.
  kWalkCount,
  // Uniform over the out-edges (and stopping) at each state.
  kNaive,
};

enum class SuffixSampling {
  // Draw from p(s | s in suffix language), normalizing by the exact
  // completion mass of each branch (finite suffix languages).
  kExact,
  // Renormalize p over the admissible edges at each step.
  kLocal,
  // kExact when the suffix language is finite and small enough.
  kAuto,
};

struct TraversalOptions {
  DecisionRule rule;
  // Maximum number of (non-EOS) tokens in a result.
  std::size_t max_tokens = 64;
  std::size_t frontier_cap = 1'000'000;
  // Consecutive discarded samples tolerated per requested sample.
  std::size_t retry_budget = 16;
  // Results must be followed by EOS (scored, and subject to the rule unless
  // exempt_eos).
  bool require_eos = false;
  bool exempt_eos = false;
  // Prefix tokens cost nothing in the search order.
  bool zero_cost_prefix = false;
  PrefixWeighting prefix_weighting = PrefixWeighting::kWalkCount;
  SuffixSampling suffix_sampling = SuffixSampling::kAuto;
  // Largest suffix path count sampled exactly under kAuto.
  std::size_t exact_budget = 20'000;
  // Score the sampled prefix with the model (log-probs and step_probs).
  bool score_prefix = true;
  CompletionFilter accept;
};

struct TraversalStats {
  std::size_t model_calls = 0;
  std::size_t expansions = 0;
  std::size_t emitted = 0;
  // Samples thrown away: dead ends, failed canonicality or filter checks.
  std::size_t discarded = 0;
  // Completed shortest-path candidates rejected by canonicality/filters.
  std::size_t filtered = 0;
};

// Pull-based stream of results.
class ResultSource {
 public:
  virtual ~ResultSource() = default;
  virtual std::optional<MatchResult> Next() = 0;
  virtual const TraversalStats& stats() const = 0;
};

// Best-first search in order of nondecreasing cost; ties go to the shorter
// path, then to the lexicographically smaller token sequence. Never emits a
// token sequence twice. Throws Error(kExec) when the frontier outgrows its
// cap.
class ShortestPathSearch : public ResultSource {
 public:
  ShortestPathSearch(std::shared_ptr<const TokenAutomaton> prefix,
                     std::shared_ptr<const TokenAutomaton> suffix,
                     const LanguageModel& model, TraversalOptions options);
  ~ShortestPathSearch() override;

  std::optional<MatchResult> Next() override;
  const TraversalStats& stats() const override { return stats_; }

 private:
  struct Node;
  std::shared_ptr<const StepDistribution> Distribution(const TokenSequence& tokens);
  std::optional<MatchResult> Finish(Node node);
  void Push(Node node);
  void Expand(const Node& node);

  std::shared_ptr<const TokenAutomaton> prefix_;
  std::shared_ptr<const TokenAutomaton> suffix_;
  const LanguageModel& model_;
  TraversalOptions options_;
  TraversalStats stats_;
  std::vector<Node> heap_;
  std::map<TokenSequence, std::shared_ptr<const StepDistribution>> memo_;
  std::map<TokenSequence, char> emitted_;
};

// Samples prefix strings combinatorially (walk-count or naive weighting)
// and suffixes from the model restricted to admissible automaton edges.
// Infinite stream; identical seeds give identical streams.
class RandomSampler : public ResultSource {
 public:
  RandomSampler(std::shared_ptr<const TokenAutomaton> prefix,
                std::shared_ptr<const TokenAutomaton> suffix,
                const LanguageModel& model, TraversalOptions options,
                std::uint64_t seed,
                std::shared_ptr<const WalkCountTable> prefix_walks = nullptr);

  std::optional<MatchResult> Next() override;
  const TraversalStats& stats() const override { return stats_; }

  // One prefix token path, without consulting the model.
  TokenSequence SamplePrefix();
  // Whether suffixes are drawn with exact normalization.
  bool exact_suffix() const { return exact_; }

 private:
  std::optional<MatchResult> TryOnce();
  std::shared_ptr<const StepDistribution> Distribution(const TokenSequence& tokens);
  // Weight of ending the suffix at `state` after `tokens`.
  double StopWeight(StateId state, const TokenSequence& tokens);
  double Mass(TokenSequence& tokens, StateId state);
  double Uniform();
  std::size_t PickWeighted(const std::vector<double>& weights);
  WalkCountTable::Count UniformBelow(const WalkCountTable::Count& bound);

  std::shared_ptr<const TokenAutomaton> prefix_;
  std::shared_ptr<const TokenAutomaton> suffix_;
  const LanguageModel& model_;
  TraversalOptions options_;
  TraversalStats stats_;
  std::mt19937_64 rng_;
  // Walk counts of the prefix automaton up to options.max_tokens.
  std::shared_ptr<const WalkCountTable> prefix_walks_;
  bool exact_ = false;
  std::map<TokenSequence, std::shared_ptr<const StepDistribution>> dist_memo_;
  // Completion mass per token path; valid for `mass_prefix_` only.
  std::map<TokenSequence, double> mass_memo_;
  TokenSequence mass_prefix_;
};

// An automaton accepting only the empty token sequence (no prefix).
std::shared_ptr<const TokenAutomaton> EmptyPrefix();

// exp(SequenceLogProb(prefix + candidate)) renormalized over the candidates;
// rejected candidates get 0. Throws Error(kExec) if all are rejected.
std::vector<double> ConditionalProbability(const LanguageModel& m,
                                           std::span<const TokenId> prefix,
                                           const std::vector<TokenSequence>& candidates,
                                           const DecisionRule& rule = {});

}  // namespace lmre

#endif  // LMRE_EXECUTOR_H_
