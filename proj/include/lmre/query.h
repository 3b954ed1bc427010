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

// The query object and the compile-and-execute pipeline:
// regex -> byte automaton -> preprocessors -> token automaton -> traversal.

#ifndef LMRE_QUERY_H_
#define LMRE_QUERY_H_

#include <bitset>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lmre/automaton.h"
#include "lmre/error.h"
#include "lmre/executor.h"
#include "lmre/graph_compiler.h"
#include "lmre/language_model.h"
#include "lmre/preprocessors.h"
#include "lmre/regex.h"
#include "lmre/vocabulary.h"

namespace lmre {

enum class Traversal { kShortest, kRandom };

// Which query region a preprocessor rewrites.
enum class Scope { kBoth, kPrefix, kSuffix };

struct PreprocessorSpec {
  enum class Kind { kLevenshtein, kFilter };
  Kind kind = Kind::kLevenshtein;
  Scope scope = Scope::kBoth;
  // Levenshtein.
  int distance = 1;
  std::bitset<256> alphabet = PrintableAscii();
  // Filter: strings of this byte language are removed.
  Automaton deny{AlphabetKind::kByte};
  FilterMode mode = FilterMode::kEager;

  static PreprocessorSpec Levenshtein(int distance, Scope scope = Scope::kBoth);
  static PreprocessorSpec Filter(Automaton deny, FilterMode mode,
                                 Scope scope = Scope::kBoth);
};

struct QuerySpec {
  // The pattern either starts with the prefix text (the remainder is the
  // suffix) or is the suffix on its own.
  std::string pattern;
  std::string prefix;
  EncodingMode encoding = EncodingMode::kCanonical;
  CanonicalStrategy canonical_strategy = CanonicalStrategy::kAuto;
  DecisionRule rule;
  Traversal traversal = Traversal::kShortest;
  std::uint64_t seed = 0;
  std::size_t max_results = 10;
  std::size_t max_tokens = kDefaultMaxSequenceLength;
  std::size_t frontier_cap = 1'000'000;
  std::size_t retry_budget = 16;
  std::size_t enumerate_budget = kDefaultEnumerateBudget;
  std::size_t state_cap = kDefaultStateCap;
  bool require_eos = false;
  bool exempt_eos = false;
  bool zero_cost_prefix = false;
  PrefixWeighting prefix_weighting = PrefixWeighting::kWalkCount;
  SuffixSampling suffix_sampling = SuffixSampling::kAuto;
  std::vector<PreprocessorSpec> preprocessors;
  // When set, preprocessed byte automata are cached here across runs, keyed
  // by a hash of the region pattern and its preprocessors.
  std::string cache_dir;
};

// One region (prefix or suffix) of a compiled query.
struct QueryRegion {
  std::string pattern;
  // Straight from the regex, before preprocessing.
  Automaton source{AlphabetKind::kByte};
  // After preprocessing.
  Automaton bytes{AlphabetKind::kByte};
  std::shared_ptr<const TokenAutomaton> tokens;
  std::vector<Automaton> deferred_deny;
  // Total Levenshtein distance applied.
  std::size_t edit_distance = 0;
};

// An immutable compiled query.
class Query {
 public:
  const QuerySpec& spec() const { return spec_; }
  const QueryRegion& prefix() const { return prefix_; }
  const QueryRegion& suffix() const { return suffix_; }
  const std::shared_ptr<const Vocabulary>& vocab() const { return vocab_; }
  // Present for random traversal.
  const std::shared_ptr<const WalkCountTable>& prefix_walks() const {
    return prefix_walks_;
  }
  const std::vector<PatternWarning>& warnings() const { return warnings_; }

 private:
  friend Query BuildQuery(const QuerySpec&, std::shared_ptr<const Vocabulary>);
  QuerySpec spec_;
  QueryRegion prefix_;
  QueryRegion suffix_;
  std::shared_ptr<const Vocabulary> vocab_;
  std::shared_ptr<const WalkCountTable> prefix_walks_;
  std::vector<PatternWarning> warnings_;
};

// Validates and compiles. Throws Error with the failing stage.
Query BuildQuery(const QuerySpec& spec, std::shared_ptr<const Vocabulary> vocab);

// Lazily driven result iterator. Errors end the stream and are kept in
// error() rather than thrown, so callers keep the results seen so far.
class ResultStream {
 public:
  ResultStream(const Query& query, const LanguageModel& model);
  ~ResultStream();
  ResultStream(ResultStream&&) noexcept;

  std::optional<MatchResult> Next();
  const std::optional<Error>& error() const { return error_; }
  TraversalStats stats() const;

 private:
  void Annotate(MatchResult& r) const;

  const Query* query_;
  const LanguageModel* model_;
  std::unique_ptr<ResultSource> source_;
  std::size_t produced_ = 0;
  bool done_ = false;
  std::optional<Error> error_;
};

ResultStream Execute(const Query& query, const LanguageModel& model);

}  // namespace lmre

#endif  // LMRE_QUERY_H_
