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


#include "lmre/executor.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "lmre/error.h"

namespace lmre {
namespace {

constexpr std::size_t kMemoCap = 16'384;

std::shared_ptr<const StepDistribution> Evaluate(const LanguageModel& model,
                                                 const TokenSequence& tokens,
                                                 const DecisionRule& rule,
                                                 TraversalStats& stats) {
  auto dist = std::make_shared<StepDistribution>();
  dist->p = model.NextDistribution(tokens);
  dist->admissible = AdmissibleMask(dist->p, rule);
  ++stats.model_calls;
  return dist;
}

// Shared completion checks: per-region canonicality (runtime filter),
// the deferred filter, and the result's derived fields.
std::optional<MatchResult> Complete(MatchResult r, const TokenAutomaton& prefix,
                                    const TokenAutomaton& suffix,
                                    const Vocabulary& vocab,
                                    const CompletionFilter& accept) {
  std::span<const TokenId> all(r.tokens);
  std::span<const TokenId> head = all.first(r.prefix_len);
  std::span<const TokenId> tail = all.subspan(r.prefix_len);
  bool head_canonical = vocab.IsCanonical(head);
  bool tail_canonical = vocab.IsCanonical(tail);
  if ((prefix.runtime_filter && !head_canonical) ||
      (suffix.runtime_filter && !tail_canonical)) {
    return std::nullopt;
  }
  r.canonical = head_canonical && tail_canonical;
  std::string head_text = vocab.Decode(head);
  std::string tail_text = vocab.Decode(tail);
  if (accept && !accept(head_text, tail_text)) return std::nullopt;
  r.prefix_text_len = head_text.size();
  r.text = head_text + tail_text;
  return r;
}

}  // namespace

std::shared_ptr<const TokenAutomaton> EmptyPrefix() {
  static const auto kEmpty = [] {
    auto t = std::make_shared<TokenAutomaton>();
    t->automaton = Automaton::EmptyString(AlphabetKind::kToken);
    t->byte_state = {0};
    return std::shared_ptr<const TokenAutomaton>(std::move(t));
  }();
  return kEmpty;
}

// ----------------------------------------------------------------------------
// Shortest path

struct ShortestPathSearch::Node {
  double cost = 0;
  double logprob = 0;
  TokenSequence tokens;
  std::vector<double> step_probs;
  // 0: inside the prefix, 1: inside the suffix, 2: completed.
  int phase = 0;
  StateId state = 0;
  std::size_t prefix_len = 0;
  bool eos = false;

  auto Key() const {
    return std::tie(cost, tokens, phase, state, prefix_len);
  }
};

namespace {

// Heap order: the "greater" node surfaces last.
struct LaterNode {
  template <typename N>
  bool operator()(const N& a, const N& b) const {
    if (a.cost != b.cost) return a.cost > b.cost;
    if (a.tokens.size() != b.tokens.size()) return a.tokens.size() > b.tokens.size();
    return a.Key() > b.Key();
  }
};

}  // namespace

ShortestPathSearch::ShortestPathSearch(std::shared_ptr<const TokenAutomaton> prefix,
                                       std::shared_ptr<const TokenAutomaton> suffix,
                                       const LanguageModel& model,
                                       TraversalOptions options)
    : prefix_(prefix ? std::move(prefix) : EmptyPrefix()),
      suffix_(std::move(suffix)),
      model_(model),
      options_(std::move(options)) {
  Node root;
  root.state = prefix_->automaton.initial();
  Push(std::move(root));
}

ShortestPathSearch::~ShortestPathSearch() = default;

std::shared_ptr<const StepDistribution> ShortestPathSearch::Distribution(
    const TokenSequence& tokens) {
  auto it = memo_.find(tokens);
  if (it != memo_.end()) return it->second;
  if (memo_.size() >= kMemoCap) memo_.clear();
  auto dist = Evaluate(model_, tokens, options_.rule, stats_);
  memo_.emplace(tokens, dist);
  return dist;
}

void ShortestPathSearch::Push(Node node) {
  if (node.phase == 0 && prefix_->automaton.is_final(node.state)) {
    // The prefix may end here: the same path also stands at the start of
    // the suffix.
    Node boundary = node;
    boundary.phase = 1;
    boundary.state = suffix_->automaton.initial();
    boundary.prefix_len = boundary.tokens.size();
    heap_.push_back(std::move(boundary));
    std::push_heap(heap_.begin(), heap_.end(), LaterNode{});
  }
  heap_.push_back(std::move(node));
  std::push_heap(heap_.begin(), heap_.end(), LaterNode{});
  if (heap_.size() > options_.frontier_cap) {
    throw Error(Stage::kExec, "search frontier exceeded its cap of " +
                                  std::to_string(options_.frontier_cap) + " nodes");
  }
}

void ShortestPathSearch::Expand(const Node& node) {
  ++stats_.expansions;
  const Automaton& a = node.phase == 0 ? prefix_->automaton : suffix_->automaton;
  const std::size_t len = node.tokens.size();
  const bool model_room = len < model_.max_sequence_length();
  const bool can_extend = model_room && len < options_.max_tokens;
  const auto edges = a.edges(node.state);
  const bool final_suffix = node.phase == 1 && a.is_final(node.state);

  if (final_suffix && !options_.require_eos) {
    Node done = node;
    done.phase = 2;
    Push(std::move(done));
  }
  const bool want_eos = final_suffix && options_.require_eos && model_room;
  if (!(can_extend && !edges.empty()) && !want_eos) return;

  auto dist = Distribution(node.tokens);
  if (want_eos) {
    const TokenId eos = model_.eos();
    double p = dist->p[eos];
    if (p > 0 && (options_.exempt_eos || dist->admissible[eos])) {
      Node done = node;
      done.phase = 2;
      done.eos = true;
      done.cost -= std::log(p);
      done.logprob += std::log(p);
      done.step_probs.push_back(p);
      Push(std::move(done));
    }
  }
  if (!can_extend) return;
  for (const Edge& e : edges) {
    double p = dist->p[e.symbol];
    if (p <= 0) continue;
    if (node.phase == 1 && !dist->admissible[e.symbol]) continue;
    Node child;
    child.tokens = node.tokens;
    child.tokens.push_back(e.symbol);
    child.step_probs = node.step_probs;
    child.step_probs.push_back(p);
    child.logprob = node.logprob + std::log(p);
    bool free = node.phase == 0 && options_.zero_cost_prefix;
    child.cost = node.cost - (free ? 0.0 : std::log(p));
    child.phase = node.phase;
    child.state = e.target;
    child.prefix_len = node.phase == 0 ? child.tokens.size() : node.prefix_len;
    Push(std::move(child));
  }
}

std::optional<MatchResult> ShortestPathSearch::Finish(Node node) {
  if (emitted_.count(node.tokens)) return std::nullopt;
  MatchResult r;
  r.tokens = std::move(node.tokens);
  r.prefix_len = node.prefix_len;
  r.logprob = node.logprob;
  r.cost = node.cost;
  r.eos = node.eos;
  r.step_probs = std::move(node.step_probs);
  auto done = Complete(std::move(r), *prefix_, *suffix_, model_.vocab(), options_.accept);
  if (!done) {
    ++stats_.filtered;
    return std::nullopt;
  }
  emitted_.emplace(done->tokens, 1);
  ++stats_.emitted;
  return done;
}

std::optional<MatchResult> ShortestPathSearch::Next() {
  while (!heap_.empty()) {
    std::pop_heap(heap_.begin(), heap_.end(), LaterNode{});
    Node node = std::move(heap_.back());
    heap_.pop_back();
    if (node.phase == 2) {
      if (auto r = Finish(std::move(node))) return r;
    } else {
      Expand(node);
    }
  }
  return std::nullopt;
}

// ----------------------------------------------------------------------------
// Random sampling

RandomSampler::RandomSampler(std::shared_ptr<const TokenAutomaton> prefix,
                             std::shared_ptr<const TokenAutomaton> suffix,
                             const LanguageModel& model, TraversalOptions options,
                             std::uint64_t seed,
                             std::shared_ptr<const WalkCountTable> prefix_walks)
    : prefix_(prefix ? std::move(prefix) : EmptyPrefix()),
      suffix_(std::move(suffix)),
      model_(model),
      options_(std::move(options)),
      rng_(seed),
      prefix_walks_(std::move(prefix_walks)) {
  if (!prefix_walks_ || prefix_walks_->max_length() != options_.max_tokens) {
    prefix_walks_ =
        std::make_shared<const WalkCountTable>(prefix_->automaton, options_.max_tokens);
  }
  const Automaton& s = suffix_->automaton;
  switch (options_.suffix_sampling) {
    case SuffixSampling::kLocal:
      exact_ = false;
      break;
    case SuffixSampling::kExact:
    case SuffixSampling::kAuto: {
      bool small = IsFinite(s) &&
                   WalkCountTable(s, options_.max_tokens).total() <= options_.exact_budget;
      if (!small && options_.suffix_sampling == SuffixSampling::kExact) {
        throw Error(Stage::kExec,
                    "exact suffix sampling needs a finite suffix language of at most " +
                        std::to_string(options_.exact_budget) + " token paths");
      }
      exact_ = small;
      break;
    }
  }
}

double RandomSampler::Uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

std::size_t RandomSampler::PickWeighted(const std::vector<double>& weights) {
  double total = 0;
  for (double w : weights) total += w;
  double r = Uniform() * total;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0) continue;
    last = i;
    if (r < weights[i]) return i;
    r -= weights[i];
  }
  return last;  // rounding fell off the end
}

WalkCountTable::Count RandomSampler::UniformBelow(const WalkCountTable::Count& bound) {
  using Count = WalkCountTable::Count;
  const std::size_t bits = boost::multiprecision::msb(bound) + 1;
  const Count mask = (Count(1) << bits) - 1;
  while (true) {
    Count r = 0;
    for (std::size_t have = 0; have < bits; have += 64) r = (r << 64) | Count(rng_());
    r &= mask;
    if (r < bound) return r;
  }
}

TokenSequence RandomSampler::SamplePrefix() {
  const Automaton& a = prefix_->automaton;
  if (prefix_walks_->total() == 0) {
    throw Error(Stage::kExec, "prefix language has no strings within " +
                                  std::to_string(options_.max_tokens) + " tokens");
  }
  TokenSequence out;
  StateId q = a.initial();
  while (true) {
    const std::size_t remaining = options_.max_tokens - out.size();
    const auto edges = a.edges(q);
    if (options_.prefix_weighting == PrefixWeighting::kWalkCount) {
      WalkCountTable::Count r = UniformBelow(prefix_walks_->WalksUpTo(q, remaining));
      if (a.is_final(q)) {
        if (r == 0) return out;
        r -= 1;
      }
      for (const Edge& e : edges) {
        if (remaining == 0) break;
        const auto& w = prefix_walks_->WalksUpTo(e.target, remaining - 1);
        if (r < w) {
          out.push_back(e.symbol);
          q = e.target;
          break;
        }
        r -= w;
      }
    } else {
      std::vector<const Edge*> options;
      for (const Edge& e : edges) {
        if (remaining > 0 && prefix_walks_->WalksUpTo(e.target, remaining - 1) > 0) {
          options.push_back(&e);
        }
      }
      const std::size_t n = options.size() + (a.is_final(q) ? 1 : 0);
      const std::size_t pick = static_cast<std::size_t>(rng_() % n);
      if (pick == options.size()) return out;
      out.push_back(options[pick]->symbol);
      q = options[pick]->target;
    }
  }
}

std::shared_ptr<const StepDistribution> RandomSampler::Distribution(
    const TokenSequence& tokens) {
  auto it = dist_memo_.find(tokens);
  if (it != dist_memo_.end()) return it->second;
  if (dist_memo_.size() >= kMemoCap) dist_memo_.clear();
  auto dist = Evaluate(model_, tokens, options_.rule, stats_);
  dist_memo_.emplace(tokens, dist);
  return dist;
}

double RandomSampler::StopWeight(StateId state, const TokenSequence& tokens) {
  const Automaton& s = suffix_->automaton;
  if (!s.is_final(state)) return 0;
  const bool model_room = tokens.size() < model_.max_sequence_length();
  if (!options_.require_eos && s.edges(state).empty()) return 1;
  if (!model_room) return options_.require_eos ? 0 : 1;
  // Either EOS is required, or the string is a proper prefix of others and
  // the model's EOS decides whether it ends here.
  auto dist = Distribution(tokens);
  const TokenId eos = model_.eos();
  bool allowed = options_.exempt_eos || dist->admissible[eos];
  return allowed ? dist->p[eos] : 0;
}

double RandomSampler::Mass(TokenSequence& tokens, StateId state) {
  auto it = mass_memo_.find(tokens);
  if (it != mass_memo_.end()) return it->second;
  const Automaton& s = suffix_->automaton;
  double mass = StopWeight(state, tokens);
  const bool can_extend = tokens.size() < options_.max_tokens &&
                          tokens.size() < model_.max_sequence_length();
  if (can_extend && !s.edges(state).empty()) {
    auto dist = Distribution(tokens);
    for (const Edge& e : s.edges(state)) {
      double p = dist->p[e.symbol];
      if (p <= 0 || !dist->admissible[e.symbol]) continue;
      tokens.push_back(e.symbol);
      mass += p * Mass(tokens, e.target);
      tokens.pop_back();
    }
  }
  mass_memo_.emplace(tokens, mass);
  return mass;
}

std::optional<MatchResult> RandomSampler::TryOnce() {
  MatchResult r;
  r.tokens = SamplePrefix();
  r.prefix_len = r.tokens.size();
  if (options_.score_prefix) {
    TokenSequence context;
    for (TokenId t : r.tokens) {
      double p = Distribution(context)->p[t];
      if (p <= 0) return std::nullopt;
      r.step_probs.push_back(p);
      r.logprob += std::log(p);
      context.push_back(t);
    }
  }
  if (exact_ && r.tokens != mass_prefix_) {
    mass_memo_.clear();
    mass_prefix_ = r.tokens;
  }

  const Automaton& s = suffix_->automaton;
  StateId state = s.initial();
  while (true) {
    const std::size_t len = r.tokens.size();
    const auto edges = s.edges(state);
    const bool can_extend = len < options_.max_tokens && len < model_.max_sequence_length();
    std::vector<double> weights;
    std::shared_ptr<const StepDistribution> dist;
    if (can_extend && !edges.empty()) {
      dist = Distribution(r.tokens);
      for (const Edge& e : edges) {
        double p = dist->p[e.symbol];
        double w = 0;
        if (p > 0 && dist->admissible[e.symbol]) {
          if (exact_) {
            r.tokens.push_back(e.symbol);
            w = p * Mass(r.tokens, e.target);
            r.tokens.pop_back();
          } else {
            w = p;
          }
        }
        weights.push_back(w);
      }
    } else {
      weights.assign(edges.size(), 0.0);
    }
    double stop = StopWeight(state, r.tokens);
    weights.push_back(stop);
    double total = 0;
    for (double w : weights) total += w;
    if (!(total > 0)) return std::nullopt;  // dead end
    std::size_t pick = PickWeighted(weights);
    if (pick == edges.size()) {
      if (options_.require_eos) {
        double p = Distribution(r.tokens)->p[model_.eos()];
        r.eos = true;
        r.step_probs.push_back(p);
        r.logprob += std::log(p);
      }
      break;
    }
    const Edge& e = edges[pick];
    double p = dist->p[e.symbol];
    r.tokens.push_back(e.symbol);
    r.step_probs.push_back(p);
    r.logprob += std::log(p);
    state = e.target;
  }
  r.cost = -r.logprob;
  return Complete(std::move(r), *prefix_, *suffix_, model_.vocab(), options_.accept);
}

std::optional<MatchResult> RandomSampler::Next() {
  for (std::size_t attempt = 0; attempt < options_.retry_budget; ++attempt) {
    if (auto r = TryOnce()) {
      ++stats_.emitted;
      return r;
    }
    ++stats_.discarded;
  }
  throw Error(Stage::kExec, "sampling discarded " + std::to_string(options_.retry_budget) +
                                " consecutive samples (dead ends or filtered)");
}

std::vector<double> ConditionalProbability(const LanguageModel& m,
                                           std::span<const TokenId> prefix,
                                           const std::vector<TokenSequence>& candidates,
                                           const DecisionRule& rule) {
  if (candidates.empty()) throw Error(Stage::kExec, "no candidates");
  std::vector<std::optional<double>> scores;
  double best = -std::numeric_limits<double>::infinity();
  for (const TokenSequence& c : candidates) {
    TokenSequence seq(prefix.begin(), prefix.end());
    seq.insert(seq.end(), c.begin(), c.end());
    ScoringOptions opts;
    opts.prefix_len = prefix.size();
    auto lp = SequenceLogProb(m, seq, rule, opts);
    if (lp) best = std::max(best, *lp);
    scores.push_back(lp);
  }
  if (best == -std::numeric_limits<double>::infinity()) {
    throw Error(Stage::kExec, "every candidate is rejected by the decision rule");
  }
  std::vector<double> probs;
  double total = 0;
  for (const auto& lp : scores) {
    probs.push_back(lp ? std::exp(*lp - best) : 0.0);
    total += probs.back();
  }
  for (double& p : probs) p /= total;
  return probs;
}

}  // namespace lmre
