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


#include "lmre/harness.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

#include "lmre/error.h"
#include "lmre/preprocessors.h"
#include "lmre/query.h"
#include "lmre/regex.h"

namespace lmre {
namespace {

using nlohmann::json;

// The harness borrows the model's vocabulary for the queries it builds.
std::shared_ptr<const Vocabulary> BorrowVocab(const LanguageModel& model) {
  return std::shared_ptr<const Vocabulary>(std::shared_ptr<const Vocabulary>(),
                                           &model.vocab());
}

std::string Join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// "(a|b|c)" over escaped literals.
std::string Alternation(const std::vector<std::string>& words) {
  std::vector<std::string> escaped;
  for (const std::string& w : words) escaped.push_back(EscapeRegex(w));
  return "(" + Join(escaped, "|") + ")";
}

void Drain(ResultStream& stream, std::vector<MatchResult>& out) {
  while (auto r = stream.Next()) out.push_back(std::move(*r));
  if (stream.error()) throw *stream.error();
}

// Longest non-empty prefix of `text` accepted by `dfa`.
std::optional<std::string> LongestMatchAtStart(const Automaton& dfa, std::string_view text) {
  StateId s = dfa.initial();
  std::size_t best = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    s = dfa.Next(s, static_cast<unsigned char>(text[i]));
    if (s < 0) break;
    if (dfa.is_final(s)) best = i + 1;
  }
  if (best == 0) return std::nullopt;
  return std::string(text.substr(0, best));
}

std::string Letters(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (std::isalpha(static_cast<unsigned char>(c))) out.push_back(c);
  }
  return out;
}

json Json(const ChiSquareResult& r) {
  return {{"statistic", r.statistic}, {"dof", r.dof}, {"p_value", r.p_value}};
}

json Json(const ExtractRun& r) {
  json j = {{"name", r.name},
            {"length", r.length},
            {"attempts", r.attempts},
            {"valid", r.valid},
            {"unique_valid", r.unique_valid},
            {"duplicates", r.duplicates},
            {"model_calls", r.model_calls},
            {"found", r.found}};
  j["calls_per_unique_valid"] =
      r.unique_valid ? json(r.CallsPerUniqueValid()) : json(nullptr);
  return j;
}

std::string Fixed(double v, int digits = 4) {
  if (std::isinf(v)) return "inf";
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

}  // namespace

// ----------------------------------------------------------------------------
// Extraction

ExtractReport HarnessExtract(const ExtractConfig& config, const LanguageModel& model) {
  if (config.budget == 0) throw Error(Stage::kExec, "extraction budget must be positive");
  const Automaton target = CompileRegex(config.pattern);
  Validator validator = config.validator;
  if (!validator) {
    validator = [&target](std::string_view s) { return target.Accepts(s); };
  }
  const Vocabulary& vocab = model.vocab();
  ExtractReport report;

  QuerySpec spec;
  spec.prefix = EscapeRegex(config.prefix);
  spec.pattern = config.pattern;
  spec.encoding = config.encoding;
  spec.canonical_strategy = config.canonical_strategy;
  spec.rule = config.rule;
  spec.require_eos = config.require_eos;
  spec.max_tokens = config.max_tokens;
  spec.max_results = config.budget;
  Query query = BuildQuery(spec, BorrowVocab(model));
  ResultStream stream = Execute(query, model);
  std::vector<MatchResult> results;
  Drain(stream, results);

  ExtractRun& engine = report.engine;
  engine.name = "engine";
  std::set<std::string> seen;
  for (const MatchResult& r : results) {
    std::string s = r.text.substr(r.prefix_text_len);
    ++engine.attempts;
    bool fresh = seen.insert(s).second;
    if (!fresh) ++engine.duplicates;
    if (validator(s)) {
      ++engine.valid;
      if (fresh) {
        ++engine.unique_valid;
        engine.found.push_back(s);
      }
    }
  }
  engine.model_calls = stream.stats().model_calls;

  const TokenSequence context = vocab.Encode(config.prefix);
  for (std::size_t n : config.baseline_lengths) {
    ExtractRun run;
    run.name = "baseline";
    run.length = n;
    std::mt19937_64 rng(config.seed ^ (0x9E3779B97F4A7C15ull * (n + 1)));
    std::set<std::string> hits;
    for (std::size_t i = 0; i < config.budget; ++i) {
      TokenSequence seq = context;
      for (std::size_t step = 0; step < n; ++step) {
        if (seq.size() >= model.max_sequence_length()) break;
        std::vector<double> dist = model.NextDistribution(seq);
        ++run.model_calls;
        std::vector<TokenId> admissible = ApplyRule(dist, config.rule);
        if (admissible.empty()) break;
        double total = 0;
        for (TokenId t : admissible) total += dist[t];
        double r = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
        TokenId pick = admissible.back();
        for (TokenId t : admissible) {
          if (r < dist[t]) {
            pick = t;
            break;
          }
          r -= dist[t];
        }
        if (pick == vocab.eos()) break;
        seq.push_back(pick);
      }
      ++run.attempts;
      std::string text = vocab.Decode(std::span<const TokenId>(seq).subspan(context.size()));
      std::optional<std::string> hit = LongestMatchAtStart(target, text);
      if (!hit) continue;
      bool fresh = hits.insert(*hit).second;
      if (!fresh) ++run.duplicates;
      if (validator(*hit)) {
        ++run.valid;
        if (fresh) {
          ++run.unique_valid;
          run.found.push_back(*hit);
        }
      }
    }
    report.baselines.push_back(std::move(run));
  }
  for (std::size_t i = 0; i < report.baselines.size(); ++i) {
    const ExtractRun& b = report.baselines[i];
    if (b.unique_valid == 0) continue;
    if (!report.best_baseline ||
        b.CallsPerUniqueValid() < report.baselines[*report.best_baseline].CallsPerUniqueValid()) {
      report.best_baseline = i;
    }
  }
  return report;
}

// ----------------------------------------------------------------------------
// Bias

BiasReport HarnessBias(const BiasConfig& config, const LanguageModel& model) {
  if (config.samples == 0) throw Error(Stage::kExec, "bias harness needs samples >= 1");
  if (config.groups.empty() || config.outcomes.empty()) {
    throw Error(Stage::kExec, "bias harness needs groups and outcomes");
  }
  const std::size_t slot = config.prefix_template.find("{}");
  if (slot == std::string::npos) {
    throw Error(Stage::kExec, "prefix template needs a {} placeholder");
  }
  const Vocabulary& vocab = model.vocab();
  BiasReport report;
  report.outcomes = config.outcomes;
  std::map<std::string, std::size_t> outcome_index;
  for (std::size_t i = 0; i < config.outcomes.size(); ++i) {
    outcome_index.emplace(config.separator + config.outcomes[i], i);
  }

  for (std::size_t g = 0; g < config.groups.size(); ++g) {
    BiasGroupReport group;
    group.group = config.groups[g];
    group.prefix = config.prefix_template.substr(0, slot) + config.groups[g] +
                   config.prefix_template.substr(slot + 2);
    group.counts.assign(config.outcomes.size(), 0);

    QuerySpec spec;
    spec.prefix = EscapeRegex(group.prefix);
    spec.pattern = EscapeRegex(config.separator) + Alternation(config.outcomes);
    spec.encoding = config.encoding;
    spec.rule = config.rule;
    spec.traversal = Traversal::kRandom;
    spec.seed = config.seed + g;
    spec.max_results = config.samples;
    spec.max_tokens = config.max_tokens;
    spec.prefix_weighting = config.weighting;
    if (config.edits) spec.preprocessors.push_back(PreprocessorSpec::Levenshtein(1, Scope::kPrefix));
    Query query = BuildQuery(spec, BorrowVocab(model));
    ResultStream stream = Execute(query, model);
    std::vector<MatchResult> results;
    Drain(stream, results);
    for (const MatchResult& r : results) {
      auto it = outcome_index.find(r.text.substr(r.prefix_text_len));
      if (it != outcome_index.end()) ++group.counts[it->second];
      if (r.n_edits == 0) ++group.unedited;
      for (std::size_t pos : r.edit_positions) {
        if (pos >= r.prefix_text_len + 1) continue;
        if (group.edit_positions.size() <= pos) group.edit_positions.resize(pos + 1, 0);
        ++group.edit_positions[pos];
      }
    }
    report.model_calls += stream.stats().model_calls;
    report.discarded += stream.stats().discarded;

    double total = 0;
    for (auto c : group.counts) total += static_cast<double>(c);
    for (auto c : group.counts) group.estimate.push_back(total ? c / total : 0.0);
    if (config.encoding == EncodingMode::kCanonical && !config.edits) {
      std::vector<TokenSequence> candidates;
      for (const std::string& o : config.outcomes) {
        candidates.push_back(vocab.Encode(config.separator + o));
      }
      group.exact = ConditionalProbability(model, vocab.Encode(group.prefix), candidates,
                                           config.rule);
      group.total_variation = TotalVariation(group.estimate, *group.exact);
    }
    report.groups.push_back(std::move(group));
  }

  if (report.groups.size() >= 2 && config.outcomes.size() >= 2) {
    ContingencyTable table;
    for (const BiasGroupReport& g : report.groups) table.push_back(g.counts);
    try {
      report.chi_square = ChiSquareTest(table);
    } catch (const Error&) {
      // Degenerate table (an outcome never observed): no test.
    }
  }
  return report;
}

// ----------------------------------------------------------------------------
// Prompted / unprompted extraction

std::vector<std::pair<std::size_t, std::size_t>> FindMatches(const Automaton& dfa,
                                                             std::string_view line) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t start = 0;
  while (start < line.size()) {
    std::optional<std::string> hit = LongestMatchAtStart(dfa, line.substr(start));
    if (hit) {
      out.emplace_back(start, hit->size());
      start += hit->size();
    } else {
      ++start;
    }
  }
  return out;
}

ToxicityReport HarnessToxicity(const ToxicityConfig& config, const LanguageModel& model) {
  const Automaton target = CompileRegex(config.target_pattern);
  ToxicityReport report;
  for (std::size_t line_no = 0; line_no < config.corpus.size(); ++line_no) {
    const std::string& line = config.corpus[line_no];
    for (auto [start, len] : FindMatches(target, line)) {
      // Keep a word's leading space with the word, as the tokenizer does.
      if (start > 0 && line[start - 1] == ' ') {
        --start;
        ++len;
      }
      ToxicityInput input;
      input.line = line_no;
      input.prompt = line.substr(0, start);
      input.target = line.substr(start, len);

      QuerySpec spec;
      spec.prefix = config.prompted ? EscapeRegex(input.prompt) : "";
      spec.pattern = EscapeRegex(input.target);
      spec.encoding = config.encoding;
      spec.rule = config.rule;
      spec.max_results = config.budget;
      spec.max_tokens = config.max_tokens;
      if (config.edits) {
        PreprocessorSpec edit = PreprocessorSpec::Levenshtein(1, Scope::kSuffix);
        if (config.edit_alphabet.any()) edit.alphabet = config.edit_alphabet;
        spec.preprocessors.push_back(edit);
      }
      Query query = BuildQuery(spec, BorrowVocab(model));
      ResultStream stream = Execute(query, model);
      std::vector<MatchResult> results;
      Drain(stream, results);
      std::set<std::string> success;
      for (const MatchResult& r : results) {
        success.insert(r.text.substr(r.prefix_text_len));
        ++report.breakdown[r.canonical ? 1 : 0][r.n_edits > 0 ? 1 : 0];
      }
      input.extracted = results.size();
      input.exhausted = results.size() < config.budget;
      input.success.assign(success.begin(), success.end());
      input.target_found = success.count(input.target) > 0;
      report.extracted += input.extracted;
      report.inputs_with_target += input.target_found ? 1 : 0;
      report.model_calls += stream.stats().model_calls;
      report.inputs.push_back(std::move(input));
    }
  }
  if (report.inputs.empty()) throw Error(Stage::kExec, "no corpus line matches the target pattern");
  return report;
}

// ----------------------------------------------------------------------------
// Cloze

std::string_view ClozeVariantName(ClozeVariant v) {
  switch (v) {
    case ClozeVariant::kBaseline:
      return "baseline";
    case ClozeVariant::kWords:
      return "words";
    case ClozeVariant::kTerminated:
      return "terminated";
    case ClozeVariant::kNoStop:
      return "no_stop";
  }
  return "?";
}

std::optional<ClozeVariant> ParseClozeVariant(std::string_view name) {
  for (ClozeVariant v : {ClozeVariant::kBaseline, ClozeVariant::kWords,
                         ClozeVariant::kTerminated, ClozeVariant::kNoStop}) {
    if (ClozeVariantName(v) == name) return v;
  }
  return std::nullopt;
}

std::vector<ClozeItem> ParseClozeDataset(std::string_view text) {
  std::vector<ClozeItem> items;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string_view::npos) {
      throw Error(Stage::kIo, "cloze dataset line " + std::to_string(line_no) +
                                  ": expected 'context<TAB>answer'");
    }
    items.push_back({std::string(line.substr(0, tab)), std::string(line.substr(tab + 1))});
  }
  return items;
}

namespace {

constexpr std::string_view kClozeTail = R"((\.|!|\?)?(")?)";

}  // namespace

ClozeQuery MakeClozeQuery(ClozeVariant variant, const ClozeItem& item,
                          const std::vector<std::string>& stop_words) {
  ClozeQuery q;
  const std::string baseline = " ([a-zA-Z]+)" + std::string(kClozeTail);
  q.suffix_pattern = baseline;
  switch (variant) {
    case ClozeVariant::kBaseline:
      break;
    case ClozeVariant::kWords: {
      std::set<std::string> words;
      std::string word;
      for (char c : item.context + " ") {
        if (std::isalpha(static_cast<unsigned char>(c))) {
          word.push_back(c);
        } else if (!word.empty()) {
          words.insert(word);
          word.clear();
        }
      }
      if (!words.empty()) {
        q.suffix_pattern = " " + Alternation({words.begin(), words.end()}) +
                           std::string(kClozeTail);
      }
      break;
    }
    case ClozeVariant::kTerminated:
      q.require_eos = true;
      break;
    case ClozeVariant::kNoStop: {
      q.require_eos = true;
      std::vector<std::string> forms;
      for (const std::string& w : stop_words) {
        if (w.empty()) continue;
        forms.push_back(w);
        std::string cap = w;
        cap[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(cap[0])));
        if (cap != w) forms.push_back(cap);
      }
      if (!forms.empty()) {
        q.deny = CompileRegex(" " + Alternation(forms) + std::string(kClozeTail));
      }
      break;
    }
  }
  return q;
}

Automaton ClozeLanguage(const ClozeQuery& query) {
  Automaton bytes = CompileRegex(query.suffix_pattern);
  if (query.deny) bytes = FilterStrings(bytes, *query.deny, FilterMode::kEager).automaton;
  return bytes;
}

ClozeReport HarnessCloze(const std::vector<ClozeItem>& items, const ClozeConfig& config,
                         const LanguageModel& model) {
  const Vocabulary& vocab = model.vocab();
  ClozeReport report;
  report.variant = config.variant;
  std::map<std::string, std::size_t> frequency;
  const std::size_t n = std::min(items.size(), config.max_items);
  for (std::size_t i = 0; i < n; ++i) {
    const ClozeItem& item = items[i];
    ClozeQuery cq = MakeClozeQuery(config.variant, item, config.stop_words);
    // Keep the context within the model window, dropping leading words.
    std::string context = item.context;
    const std::size_t room = config.max_tokens > 16 ? config.max_tokens - 16 : 1;
    while (vocab.Encode(context).size() > room) {
      std::size_t space = context.find(' ', 1);
      if (space == std::string::npos) break;
      context = context.substr(space);
    }
    QuerySpec spec;
    spec.prefix = EscapeRegex(context);
    spec.pattern = cq.suffix_pattern;
    spec.require_eos = cq.require_eos;
    spec.encoding = config.encoding;
    spec.rule = config.rule;
    spec.max_results = 1;
    spec.max_tokens = config.max_tokens;
    if (cq.deny) {
      spec.preprocessors.push_back(
          PreprocessorSpec::Filter(*cq.deny, FilterMode::kEager, Scope::kSuffix));
    }
    Query query = BuildQuery(spec, BorrowVocab(model));
    ResultStream stream = Execute(query, model);
    std::optional<MatchResult> top = stream.Next();
    if (stream.error()) throw *stream.error();
    report.model_calls += stream.stats().model_calls;
    std::string prediction = top ? Letters(top->text.substr(top->prefix_text_len)) : "";
    ++report.items;
    if (prediction == item.answer) ++report.correct;
    ++frequency[prediction];
    report.predictions.push_back(std::move(prediction));
  }
  report.top_predictions.assign(frequency.begin(), frequency.end());
  std::stable_sort(report.top_predictions.begin(), report.top_predictions.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return report;
}

// ----------------------------------------------------------------------------
// Reports

std::string ReportJson(const ExtractReport& r) {
  json j;
  j["task"] = "extract";
  j["engine"] = Json(r.engine);
  j["baselines"] = json::array();
  for (const ExtractRun& b : r.baselines) j["baselines"].push_back(Json(b));
  j["best_baseline_length"] =
      r.best_baseline ? json(r.baselines[*r.best_baseline].length) : json(nullptr);
  return j.dump(2) + "\n";
}

std::string ReportJson(const BiasReport& r) {
  json j;
  j["task"] = "bias";
  j["outcomes"] = r.outcomes;
  j["groups"] = json::array();
  for (const BiasGroupReport& g : r.groups) {
    json gj = {{"group", g.group},
               {"prefix", g.prefix},
               {"counts", g.counts},
               {"estimate", g.estimate},
               {"edit_positions", g.edit_positions},
               {"unedited", g.unedited}};
    gj["exact"] = g.exact ? json(*g.exact) : json(nullptr);
    gj["total_variation"] = g.total_variation ? json(*g.total_variation) : json(nullptr);
    j["groups"].push_back(gj);
  }
  j["chi_square"] = r.chi_square ? Json(*r.chi_square) : json(nullptr);
  j["model_calls"] = r.model_calls;
  j["discarded"] = r.discarded;
  return j.dump(2) + "\n";
}

std::string ReportJson(const ToxicityReport& r) {
  json j;
  j["task"] = "toxicity";
  j["inputs"] = json::array();
  for (const ToxicityInput& in : r.inputs) {
    j["inputs"].push_back({{"line", in.line},
                           {"prompt", in.prompt},
                           {"target", in.target},
                           {"extracted", in.extracted},
                           {"target_found", in.target_found},
                           {"exhausted", in.exhausted},
                           {"success", in.success}});
  }
  j["extracted"] = r.extracted;
  j["inputs_with_target"] = r.inputs_with_target;
  j["breakdown"] = {{"canonical_unedited", r.breakdown[1][0]},
                    {"canonical_edited", r.breakdown[1][1]},
                    {"noncanonical_unedited", r.breakdown[0][0]},
                    {"noncanonical_edited", r.breakdown[0][1]}};
  j["model_calls"] = r.model_calls;
  return j.dump(2) + "\n";
}

std::string ReportJson(const ClozeReport& r) {
  json j;
  j["task"] = "cloze";
  j["variant"] = std::string(ClozeVariantName(r.variant));
  j["items"] = r.items;
  j["correct"] = r.correct;
  j["accuracy"] = r.accuracy();
  j["predictions"] = r.predictions;
  j["top_predictions"] = json::array();
  for (const auto& [word, count] : r.top_predictions) {
    j["top_predictions"].push_back({{"word", word}, {"count", count}});
  }
  j["model_calls"] = r.model_calls;
  return j.dump(2) + "\n";
}

std::string ReportTable(const ExtractReport& r) {
  std::ostringstream os;
  os << "run        length  attempts  unique_valid  duplicates  model_calls  calls/unique\n";
  auto row = [&](const ExtractRun& run) {
    os << run.name << std::string(11 - std::min<std::size_t>(10, run.name.size()), ' ')
       << run.length << "\t" << run.attempts << "\t" << run.unique_valid << "\t"
       << run.duplicates << "\t" << run.model_calls << "\t"
       << Fixed(run.CallsPerUniqueValid(), 2) << "\n";
  };
  row(r.engine);
  for (const ExtractRun& b : r.baselines) row(b);
  return os.str();
}

std::string ReportTable(const BiasReport& r) {
  std::ostringstream os;
  os << "group";
  for (const std::string& o : r.outcomes) os << "\t" << o;
  os << "\tTV\n";
  for (const BiasGroupReport& g : r.groups) {
    os << g.group;
    for (double p : g.estimate) os << "\t" << Fixed(p);
    os << "\t" << (g.total_variation ? Fixed(*g.total_variation) : "-") << "\n";
  }
  if (r.chi_square) {
    os << "chi2=" << Fixed(r.chi_square->statistic) << " dof=" << r.chi_square->dof
       << " p=" << r.chi_square->p_value << "\n";
  }
  return os.str();
}

std::string ReportTable(const ToxicityReport& r) {
  std::ostringstream os;
  os << "inputs=" << r.inputs.size() << " extracted=" << r.extracted
     << " with_target=" << r.inputs_with_target << " model_calls=" << r.model_calls << "\n";
  os << "              unedited  edited\n";
  os << "canonical     " << r.breakdown[1][0] << "\t" << r.breakdown[1][1] << "\n";
  os << "noncanonical  " << r.breakdown[0][0] << "\t" << r.breakdown[0][1] << "\n";
  return os.str();
}

std::string ReportTable(const ClozeReport& r) {
  std::ostringstream os;
  os << ClozeVariantName(r.variant) << ": " << r.correct << "/" << r.items << " = "
     << Fixed(100 * r.accuracy(), 1) << "%\n";
  std::size_t shown = 0;
  for (const auto& [word, count] : r.top_predictions) {
    if (shown++ == 10) break;
    os << "  " << (word.empty() ? "<none>" : word) << "\t" << count << "\n";
  }
  return os.str();
}

}  // namespace lmre
