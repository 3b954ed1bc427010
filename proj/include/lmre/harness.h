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

// Validation harnesses: extraction throughput, bias estimation, prompted /
// unprompted extraction counting, and cloze accuracy.

#ifndef LMRE_HARNESS_H_
#define LMRE_HARNESS_H_

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lmre/automaton.h"
#include "lmre/executor.h"
#include "lmre/graph_compiler.h"
#include "lmre/language_model.h"
#include "lmre/stats.h"

namespace lmre {

// ----------------------------------------------------------------------------
// Extraction

using Validator = std::function<bool(std::string_view)>;

struct ExtractConfig {
  // Regex for the content to extract, and literal conditioning text.
  std::string pattern;
  std::string prefix;
  // Emissions for the engine; samples per length for the baseline.
  std::size_t budget = 100;
  std::vector<std::size_t> baseline_lengths = {1, 2, 4, 8, 16, 32, 64};
  DecisionRule rule = DecisionRule::TopK(40);
  bool require_eos = true;
  EncodingMode encoding = EncodingMode::kCanonical;
  CanonicalStrategy canonical_strategy = CanonicalStrategy::kRuntimeFilter;
  std::size_t max_tokens = kDefaultMaxSequenceLength;
  std::uint64_t seed = 0;
  // Judges an extracted string; defaults to a full match of `pattern`.
  Validator validator;
};

struct ExtractRun {
  std::string name;
  // Baseline generation length (0 for the engine run).
  std::size_t length = 0;
  std::size_t attempts = 0;
  std::size_t valid = 0;
  std::size_t unique_valid = 0;
  // Attempts whose extracted string had been seen before.
  std::size_t duplicates = 0;
  std::size_t model_calls = 0;
  std::vector<std::string> found;  // unique valid strings, first-seen order

  double CallsPerUniqueValid() const {
    return unique_valid ? static_cast<double>(model_calls) / static_cast<double>(unique_valid)
                        : std::numeric_limits<double>::infinity();
  }
};

struct ExtractReport {
  ExtractRun engine;
  std::vector<ExtractRun> baselines;
  // Index into baselines with the fewest model calls per unique valid
  // string, if any baseline found anything.
  std::optional<std::size_t> best_baseline;
};

ExtractReport HarnessExtract(const ExtractConfig& config, const LanguageModel& model);

// ----------------------------------------------------------------------------
// Bias

struct BiasConfig {
  // "{}" is replaced by each group, e.g. "The {} was trained in".
  std::string prefix_template;
  std::vector<std::string> groups;
  std::vector<std::string> outcomes;
  // Text between the prefix and each outcome.
  std::string separator = " ";
  std::size_t samples = 1000;
  EncodingMode encoding = EncodingMode::kCanonical;
  // Levenshtein distance-1 expansion of the prefix.
  bool edits = false;
  PrefixWeighting weighting = PrefixWeighting::kWalkCount;
  DecisionRule rule;
  std::size_t max_tokens = kDefaultMaxSequenceLength;
  std::uint64_t seed = 0;
};

struct BiasGroupReport {
  std::string group;
  std::string prefix;
  std::vector<std::uint64_t> counts;
  std::vector<double> estimate;
  // Exact conditional distribution over outcomes (canonical, no edits).
  std::optional<std::vector<double>> exact;
  std::optional<double> total_variation;
  // Histogram of prefix edit offsets (edits enabled).
  std::vector<std::uint64_t> edit_positions;
  std::size_t unedited = 0;
};

struct BiasReport {
  std::vector<std::string> outcomes;
  std::vector<BiasGroupReport> groups;
  std::optional<ChiSquareResult> chi_square;
  std::size_t model_calls = 0;
  std::size_t discarded = 0;
};

BiasReport HarnessBias(const BiasConfig& config, const LanguageModel& model);

// ----------------------------------------------------------------------------
// Prompted / unprompted extraction

struct ToxicityConfig {
  std::vector<std::string> corpus;
  // Regex for the content being extracted; matched against corpus lines.
  std::string target_pattern;
  // Condition on the text before each match.
  bool prompted = true;
  // Levenshtein expansion of the target.
  bool edits = false;
  std::bitset<256> edit_alphabet;
  EncodingMode encoding = EncodingMode::kCanonical;
  // Results taken per input.
  std::size_t budget = 1000;
  DecisionRule rule = DecisionRule::TopK(40);
  std::size_t max_tokens = kDefaultMaxSequenceLength;
};

struct ToxicityInput {
  std::size_t line = 0;
  std::string prompt;
  std::string target;
  std::size_t extracted = 0;
  bool target_found = false;
  // The budget was not reached: `success` holds every admissible string.
  bool exhausted = false;
  // Distinct extracted strings (sorted).
  std::vector<std::string> success;
};

struct ToxicityReport {
  std::vector<ToxicityInput> inputs;
  std::size_t extracted = 0;
  std::size_t inputs_with_target = 0;
  // [canonical][edited] counts over all extracted results.
  std::array<std::array<std::size_t, 2>, 2> breakdown{};
  std::size_t model_calls = 0;
};

ToxicityReport HarnessToxicity(const ToxicityConfig& config, const LanguageModel& model);

// Leftmost-longest, non-overlapping, non-empty matches as (offset, length).
std::vector<std::pair<std::size_t, std::size_t>> FindMatches(const Automaton& dfa,
                                                             std::string_view line);

// ----------------------------------------------------------------------------
// Cloze

enum class ClozeVariant { kBaseline, kWords, kTerminated, kNoStop };

std::string_view ClozeVariantName(ClozeVariant v);
std::optional<ClozeVariant> ParseClozeVariant(std::string_view name);

struct ClozeItem {
  std::string context;
  std::string answer;
};

// "context<TAB>answer" per line. Throws Error(kIo) on malformed lines.
std::vector<ClozeItem> ParseClozeDataset(std::string_view text);

struct ClozeQuery {
  std::string suffix_pattern;
  bool require_eos = false;
  // Words removed from the completion (no_stop).
  std::optional<Automaton> deny;
};

ClozeQuery MakeClozeQuery(ClozeVariant variant, const ClozeItem& item,
                          const std::vector<std::string>& stop_words);

// Byte language of a variant's completions (after the stop-word filter).
Automaton ClozeLanguage(const ClozeQuery& query);

struct ClozeConfig {
  ClozeVariant variant = ClozeVariant::kBaseline;
  std::vector<std::string> stop_words;
  std::size_t max_items = std::numeric_limits<std::size_t>::max();
  DecisionRule rule;
  EncodingMode encoding = EncodingMode::kCanonical;
  std::size_t max_tokens = kDefaultMaxSequenceLength;
};

struct ClozeReport {
  ClozeVariant variant = ClozeVariant::kBaseline;
  std::size_t items = 0;
  std::size_t correct = 0;
  std::vector<std::string> predictions;
  // (word, count), most frequent first.
  std::vector<std::pair<std::string, std::size_t>> top_predictions;
  std::size_t model_calls = 0;

  double accuracy() const {
    return items ? static_cast<double>(correct) / static_cast<double>(items) : 0.0;
  }
};

ClozeReport HarnessCloze(const std::vector<ClozeItem>& items, const ClozeConfig& config,
                         const LanguageModel& model);

// The bundled English stop-word list.
const std::vector<std::string>& DefaultStopWords();

// ----------------------------------------------------------------------------
// Reports: JSON documents and plain-text tables.

std::string ReportJson(const ExtractReport& r);
std::string ReportJson(const BiasReport& r);
std::string ReportJson(const ToxicityReport& r);
std::string ReportJson(const ClozeReport& r);
std::string ReportTable(const ExtractReport& r);
std::string ReportTable(const BiasReport& r);
std::string ReportTable(const ToxicityReport& r);
std::string ReportTable(const ClozeReport& r);

}  // namespace lmre

#endif  // LMRE_HARNESS_H_
