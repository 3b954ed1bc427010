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

// Acceptance suite: one PASS/FAIL line per criterion. Every tolerance and
// time limit is pinned here; the process exits non-zero if any criterion
// fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lmre/cli.h"
#include "lmre/executor.h"
#include "lmre/graph_compiler.h"
#include "lmre/harness.h"
#include "lmre/preprocessors.h"
#include "lmre/query.h"
#include "lmre/regex.h"
#include "lmre/stats.h"
#include "support.h"

namespace lmre {
namespace {

namespace fs = std::filesystem;
using testing::AcceptingPaths;
using testing::AutomatonLanguage;
using testing::RandomVocabulary;
using testing::RegexGenerator;
using testing::Tokenizations;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Suite {
 public:
  void Run(const std::string& id, const std::string& name, double limit_seconds,
           const std::function<Outcome()>& body) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool in_time = secs < limit_seconds;
    bool pass = o.pass && in_time;
    failures_ += pass ? 0 : 1;
    char timing[96];
    std::snprintf(timing, sizeof timing, "%.2f s %s %.0f s", secs, in_time ? "<" : ">=",
                  limit_seconds);
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << id << " " << name << ": " << o.detail << " ("
              << timing << ")" << std::endl;
  }
  int failures() const { return failures_; }

 private:
  int failures_ = 0;
};

std::string Fmt(const char* format, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

// ---------------------------------------------------------------------------
// AC1: encoding counts.
Outcome EncodingCounts() {
  Vocabulary the = Vocabulary::WithTokens({"Th", "he", "The"});
  auto paths = WalkCountTable(CompileFull(CompileRegex("The"), the).automaton, 3).total();
  if (paths != 4) return {false, "\"The\" has " + paths.str() + " accepting paths, want 4"};
  for (int n = 1; n <= 8; ++n) {
    std::vector<std::string> substrings;
    for (int k = 2; k <= n; ++k) substrings.push_back(std::string(k, 'a'));
    Vocabulary v = Vocabulary::WithTokens(substrings);
    auto count = WalkCountTable(CompileFull(Automaton::Literal(std::string(n, 'a')), v).automaton,
                                n)
                     .total();
    if (count != (1u << (n - 1))) {
      return {false, "a^" + std::to_string(n) + " has " + count.str() + " paths"};
    }
  }
  return {true, "\"The\" = 4 paths; a^n = 2^(n-1) for n = 1..8"};
}

// ---------------------------------------------------------------------------
// AC2: compiler oracle equivalence.
Outcome CompilerOracle() {
  RegexGenerator gen(20240601, "abc", true);
  std::size_t regexes = 0, strings = 0, sequences = 0;
  for (std::uint64_t i = 0; regexes < 100; ++i) {
    std::size_t bound = 0;
    std::string pattern = gen.Next(&bound);
    if (bound > 9) continue;
    Automaton a = CompileRegex(pattern);
    Enumeration e = Enumerate(a, 1001);
    if (!e.exhausted || e.strings.size() > 1000) continue;
    Vocabulary v = RandomVocabulary(i, "abc", 4 + i % 12);
    std::set<TokenSequence> full_oracle, canon_oracle;
    for (const auto& w : e.strings) {
      std::string s = SymbolsToBytes(w);
      auto t = Tokenizations(v, s);
      full_oracle.insert(t.begin(), t.end());
      canon_oracle.insert(v.Encode(s));
    }
    if (AcceptingPaths(CompileFull(a, v).automaton) != full_oracle) {
      return {false, "full automaton differs from oracle for " + pattern};
    }
    auto canon = CompileCanonical(a, v, CanonicalStrategy::kEnumerate);
    if (AcceptingPaths(canon.automaton) != canon_oracle) {
      return {false, "canonical automaton differs from oracle for " + pattern};
    }
    ++regexes;
    strings += e.strings.size();
    sequences += full_oracle.size();
  }
  return {true, std::to_string(regexes) + " regexes, " + std::to_string(strings) + " strings, " +
                    std::to_string(sequences) + " token sequences: exact set equality"};
}

// ---------------------------------------------------------------------------
// AC3: executor oracle equivalence.
Outcome ExecutorOracle() {
  auto vocab = std::make_shared<const Vocabulary>(
      Vocabulary::WithTokens({"ab", "ca", "bc", "abc", "cab"}));
  auto model = testing::TrainedModel(vocab,
                                     "abc cab bac\naab abb cba\ncabbage\nabcabc bca\n"
                                     "a b c ab bc ca\nccc aaa bbb\n",
                                     3, 0.1);
  std::vector<std::string> patterns = {"[abc]{1,7}", "(ab|c)[abc]{0,5}(a|bc)?",
                                       "a[bc]{2,6}|(cab|bca){1,3}", "[abc]{0,3}c[abc]{0,4}"};
  std::size_t compared = 0;
  for (const std::string& p : patterns) {
    Automaton a = CompileRegex(p);
    auto language = AutomatonLanguage(a, 20000);
    if (language.size() > 10000) return {false, "language too large for " + p};
    auto suffix = std::make_shared<const TokenAutomaton>(
        CompileCanonical(a, *vocab, CanonicalStrategy::kEnumerate));
    auto want = testing::BruteForceCanonical(*model, language, DecisionRule::None());
    ShortestPathSearch search(EmptyPrefix(), suffix, *model, {});
    std::vector<MatchResult> got;
    while (auto r = search.Next()) got.push_back(std::move(*r));
    if (got.size() != want.size()) {
      return {false, p + ": " + std::to_string(got.size()) + " results, brute force " +
                         std::to_string(want.size())};
    }
    std::map<std::string, double> by_text;
    for (const auto& s : want) by_text[s.text] = s.logprob;
    for (std::size_t i = 0; i < got.size(); ++i) {
      auto it = by_text.find(got[i].text);
      if (it == by_text.end()) return {false, p + ": unexpected result " + got[i].text};
      if (std::abs(it->second - got[i].logprob) > 1e-9) {
        return {false, p + ": log-prob mismatch for " + got[i].text};
      }
      // Order: identical to brute force except inside groups of costs equal
      // within 1e-9, where the documented tie-break applies.
      if (got[i].text != want[i].text && std::abs(got[i].logprob - want[i].logprob) > 1e-9) {
        return {false, p + ": order differs at position " + std::to_string(i)};
      }
    }
    for (std::size_t k : {1, 2, 5}) {
      TraversalOptions options;
      options.rule = DecisionRule::TopK(k);
      ShortestPathSearch top(EmptyPrefix(), suffix, *model, options);
      std::set<std::string> got_set, want_set;
      while (auto r = top.Next()) got_set.insert(r->text);
      for (const auto& s : testing::BruteForceCanonical(*model, language, options.rule)) {
        want_set.insert(s.text);
      }
      if (got_set != want_set) {
        return {false, p + ": top-" + std::to_string(k) + " set differs from brute force"};
      }
    }
    compared += got.size();
  }
  return {true, std::to_string(patterns.size()) + " languages, " + std::to_string(compared) +
                    " strings in brute-force order, |dlogp| <= 1e-9; top-k {1,2,5} sets equal"};
}

// ---------------------------------------------------------------------------
// AC4: walk-normalized prefix sampling.
Outcome PrefixSampling() {
  constexpr int kSamples = 10000;
  constexpr double kAlpha = 0.01;
  auto bytes = std::make_shared<const Vocabulary>();
  HashLM model(bytes, 1);
  auto suffix = std::make_shared<const TokenAutomaton>(
      CompileCanonical(CompileRegex("x"), *bytes, CanonicalStrategy::kEnumerate));

  auto test_uniform = [&](const Automaton& language, const Vocabulary& v,
                          const std::shared_ptr<const LanguageModel>& m, std::uint64_t seed,
                          double* p_value) {
    auto prefix = std::make_shared<const TokenAutomaton>(
        CompileCanonical(language, v, CanonicalStrategy::kEnumerate));
    auto suf = std::make_shared<const TokenAutomaton>(
        CompileCanonical(CompileRegex("x"), v, CanonicalStrategy::kEnumerate));
    RandomSampler s(prefix, suf, *m, {}, seed);
    std::map<std::string, std::uint64_t> h;
    for (const auto& w : AutomatonLanguage(language)) h[w] = 0;
    for (int i = 0; i < kSamples; ++i) {
      std::string text = v.Decode(s.SamplePrefix());
      if (!h.count(text)) return false;
      ++h[text];
    }
    std::vector<std::uint64_t> observed;
    for (auto& [w, c] : h) observed.push_back(c);
    std::vector<double> expected(observed.size(), 1.0 / static_cast<double>(observed.size()));
    *p_value = ChiSquareGoodnessOfFit(observed, expected).p_value;
    return *p_value > kAlpha;
  };

  auto bytes_model = std::make_shared<const HashLM>(bytes, 1);
  double p_abb = 0;
  if (!test_uniform(CompileRegex("a|b|bb|bbb"), *bytes, bytes_model, 7, &p_abb)) {
    return {false, Fmt("{a,b,bb,bbb} walk-count sampling rejected uniformity, p = %.4g", p_abb)};
  }
  double min_p = 1;
  RegexGenerator gen(4242, "abc", true);
  int languages = 0;
  for (std::uint64_t i = 0; languages < 20; ++i) {
    Automaton a = CompileRegex(gen.Next());
    Enumeration e = Enumerate(a, 51);
    if (!e.exhausted || e.strings.size() < 2 || e.strings.size() > 50) continue;
    if (e.strings.front().empty()) continue;  // the empty prefix has no text to sample
    auto v = std::make_shared<const Vocabulary>(RandomVocabulary(i, "abc", 6));
    auto m = std::make_shared<const HashLM>(v, 1);
    double p = 0;
    if (!test_uniform(a, *v, m, 100 + i, &p)) {
      return {false, Fmt("random language %.0f rejected uniformity, p = %.4g", languages, p)};
    }
    min_p = std::min(min_p, p);
    ++languages;
  }
  TraversalOptions naive;
  naive.prefix_weighting = PrefixWeighting::kNaive;
  RandomSampler s(std::make_shared<const TokenAutomaton>(
                      CompileFull(CompileRegex("a|b|bb|bbb"), *bytes)),
                  suffix, model, naive, 11);
  int a_count = 0;
  for (int i = 0; i < kSamples; ++i) a_count += bytes->Decode(s.SamplePrefix()) == "a";
  double freq = a_count / static_cast<double>(kSamples);
  bool naive_ok = std::abs(freq - 0.5) <= 0.02;
  return {naive_ok, Fmt("{a,b,bb,bbb} p = %.3f; 20 random languages min p = %.3f (alpha 0.01); ",
                        p_abb, min_p) +
                        Fmt("naive 'a' frequency %.4f (want 0.5 +- 0.02)", freq)};
}

// ---------------------------------------------------------------------------
// AC5: Levenshtein automata vs brute-force DP edit-distance neighborhoods.

// States from which some final state is reachable.
std::vector<char> CoAccessible(const Automaton& a) {
  std::vector<char> live(a.num_states(), 0);
  for (StateId f : a.final_states()) live[f] = 1;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t s = 0; s < a.num_states(); ++s) {
      if (live[s]) continue;
      for (const Edge& e : a.edges(static_cast<StateId>(s))) {
        if (live[e.target]) {
          live[s] = changed = true;
          break;
        }
      }
    }
  }
  return live;
}

// Walks every string over `alphabet` depth-first, carrying the edit-distance
// DP row against `source` and the automaton state in lockstep. Membership
// must agree at every node. A subtree is pruned only once no extension can
// be within distance d (the row minimum exceeds d) and the automaton cannot
// accept any extension either; if the automaton still can, that is a
// mismatch.
class BallChecker {
 public:
  BallChecker(const Automaton& a, const std::string& source, const std::string& alphabet,
              std::size_t d)
      : a_(a), live_(CoAccessible(a)), source_(source), alphabet_(alphabet), d_(d) {}

  // Number of ball members, or -1 on a mismatch (see witness()).
  long Run() {
    std::size_t row[kMaxWidth];
    for (std::size_t j = 0; j <= source_.size(); ++j) row[j] = j;
    return Visit(a_.initial(), row) ? members_ : -1;
  }
  const std::string& witness() const { return text_; }

 private:
  static constexpr std::size_t kMaxWidth = 16;

  bool Visit(StateId state, const std::size_t* row) {
    const std::size_t width = source_.size() + 1;
    bool in_ball = row[width - 1] <= d_;
    if (in_ball != (state >= 0 && a_.is_final(state))) return false;
    members_ += in_ball;
    std::size_t best = *std::min_element(row, row + width);
    bool alive = state >= 0 && live_[state];
    if (best > d_) return !alive;
    std::size_t next[kMaxWidth];
    for (char c : alphabet_) {
      next[0] = row[0] + 1;
      for (std::size_t j = 1; j < width; ++j) {
        next[j] = std::min({row[j] + 1, next[j - 1] + 1,
                            row[j - 1] + (source_[j - 1] == c ? 0 : 1)});
      }
      text_.push_back(c);
      StateId to = state >= 0 ? a_.Next(state, static_cast<unsigned char>(c)) : -1;
      if (!Visit(to, next)) return false;
      text_.pop_back();
    }
    return true;
  }

  const Automaton& a_;
  std::vector<char> live_;
  const std::string& source_;
  const std::string& alphabet_;
  std::size_t d_;
  std::string text_;
  long members_ = 0;
};

Outcome LevenshteinOracle() {
  const std::string alphabet = "abcde";
  std::bitset<256> bytes;
  for (char c : alphabet) bytes.set(static_cast<unsigned char>(c));
  std::size_t sources = 0;
  long members = 0;
  for (const std::string& s : testing::AllStrings(alphabet, 6)) {
    Automaton one = LevenshteinExpand(Automaton::Literal(s), bytes);
    Automaton two = LevenshteinExpand(one, bytes);  // chained
    for (std::size_t d = 1; d <= 2; ++d) {
      const Automaton& a = d == 1 ? one : two;
      BallChecker check(a, s, alphabet, d);
      long n = check.Run();
      if (n < 0) {
        return {false, "d=" + std::to_string(d) + " automaton of '" + s +
                           "' disagrees with the DP neighborhood at '" + check.witness() + "'"};
      }
      members += n;
    }
    ++sources;
  }
  return {true, std::to_string(sources) + " sources (|s| <= 6, 5 bytes), " +
                    std::to_string(members) +
                    " neighborhood members: exact equality for d = 1 and chained d = 2"};
}

// ---------------------------------------------------------------------------
// AC6: edit-position uniformity.
std::vector<std::uint64_t> EditPositions(PrefixWeighting weighting, std::size_t samples,
                                         std::size_t* edited) {
  const std::string prefix = "The nurse was taught";
  auto vocab = std::make_shared<const Vocabulary>();
  HashLM model(vocab, 6);
  QuerySpec spec;
  spec.prefix = prefix;
  spec.pattern = prefix;
  spec.traversal = Traversal::kRandom;
  spec.prefix_weighting = weighting;
  spec.max_results = samples;
  spec.seed = 20;
  spec.preprocessors = {PreprocessorSpec::Levenshtein(1, Scope::kPrefix)};
  Query q = BuildQuery(spec, vocab);
  ResultStream stream = Execute(q, model);
  std::vector<std::uint64_t> hist(prefix.size() + 1, 0);
  *edited = 0;
  while (auto r = stream.Next()) {
    for (std::size_t p : r->edit_positions) ++hist.at(p);
    *edited += r->n_edits > 0;
  }
  if (stream.error()) throw *stream.error();
  return hist;
}

Outcome EditUniformity() {
  constexpr std::size_t kSamples = 10000;
  std::size_t edited = 0;
  auto walk = EditPositions(PrefixWeighting::kWalkCount, kSamples, &edited);
  // Offsets 0..19 are edits inside the prefix; offset 20 (appending) admits
  // only insertions, so it is excluded along with unedited samples.
  std::vector<std::uint64_t> inside(walk.begin(), walk.begin() + 20);
  std::vector<double> uniform(20, 1.0 / 20);
  double p = ChiSquareGoodnessOfFit(inside, uniform).p_value;
  std::size_t naive_edited = 0;
  auto naive = EditPositions(PrefixWeighting::kNaive, kSamples, &naive_edited);
  std::uint64_t early = 0, total = 0;
  for (std::size_t i = 0; i < naive.size(); ++i) {
    total += naive[i];
    if (i < 6) early += naive[i];  // first 30% of 20 positions
  }
  double share = total ? early / static_cast<double>(total) : 0;
  bool ok = p > 0.01 && share >= 0.60;
  return {ok, Fmt("walk-count: %.0f edited samples, chi-square p = %.3f (alpha 0.01); ",
                  static_cast<double>(edited), p) +
                  Fmt("naive: %.1f%% of edits in positions 0-5 (want >= 60%%)", 100 * share)};
}

// ---------------------------------------------------------------------------
// AC7: chi-square implementation.
Outcome ChiSquare() {
  ChiSquareResult r = ChiSquareTest({{10, 20}, {20, 10}});
  ChiSquareResult prop = ChiSquareTest({{5, 10, 15}, {10, 20, 30}});
  bool ok = std::abs(r.statistic - 6.667) <= 0.001 && std::abs(r.p_value - 0.0098) <= 0.0002 &&
            prop.p_value == 1.0;
  return {ok, Fmt("[[10,20],[20,10]]: statistic %.4f, p %.5f; proportional p = %.17g", r.statistic,
                  r.p_value, prop.p_value)};
}

// ---------------------------------------------------------------------------
// AC8: duplicate-free extraction.
Outcome Extraction() {
  std::mt19937_64 rng(8);
  auto letters = [&](int n, const char* set) {
    std::string s;
    std::size_t len = std::strlen(set);
    for (int i = 0; i < n; ++i) s += set[rng() % len];
    return s;
  };
  std::vector<std::string> urls;
  std::string corpus;
  while (urls.size() < 20) {
    std::string url = "https://" + letters(6, "abcdefghijklmnopqrstuvwxyz") + ".com/" +
                      letters(5, "abcdefghijklmnopqrstuvwxyz0123456789");
    if (std::find(urls.begin(), urls.end(), url) != urls.end()) continue;
    urls.push_back(url);
    corpus += url + "\n";
  }
  auto vocab = std::make_shared<const Vocabulary>();
  // The context (9 bytes) always reaches back into the memorized domain, so
  // the model cannot splice two URLs together.
  auto model = testing::TrainedModel(vocab, corpus, 10, 1e-4);
  ExtractConfig cfg;
  cfg.pattern = "https://[a-z]+\\.com/[a-z0-9]+";
  cfg.budget = 30;  // 1.5x the 20 targets
  cfg.baseline_lengths = {8, 16, 32, 64};
  cfg.seed = 1;
  ExtractReport r = HarnessExtract(cfg, *model);
  std::set<std::string> found(r.engine.found.begin(), r.engine.found.end());
  std::size_t recovered = 0;
  for (const auto& u : urls) recovered += found.count(u);
  std::size_t dupes = r.engine.duplicates;
  for (std::size_t budget : {10, 100, 300}) {
    ExtractConfig c = cfg;
    c.budget = budget;
    c.baseline_lengths = {};
    dupes += HarnessExtract(c, *model).engine.duplicates;
  }
  if (!r.best_baseline) return {false, "no baseline produced a valid string"};
  const ExtractRun& best = r.baselines[*r.best_baseline];
  double engine_rate = r.engine.CallsPerUniqueValid(), base_rate = best.CallsPerUniqueValid();
  bool ok = dupes == 0 && recovered == urls.size() && engine_rate < base_rate;
  return {ok, "duplicates " + std::to_string(dupes) + " (budgets 10/30/100/300); recovered " +
                  std::to_string(recovered) + "/20 in 30 emissions; " +
                  Fmt("calls per unique valid: engine %.1f vs best baseline (n=%.0f) %.1f",
                      engine_rate, static_cast<double>(best.length), base_rate)};
}

// ---------------------------------------------------------------------------
// AC9: toxicity-shape monotonicity.
Outcome Monotonicity() {
  const std::vector<std::string> names = {"Alex", "Sam", "Jo", "Kim", "Lee", "Max", "Pat", "Ray"};
  const std::vector<std::string> verbs = {"said", "thinks", "knows", "claims", "wrote"};
  const std::vector<std::string> insults = {"jerk", "idiot", "fool", "clown", "moron"};
  const std::vector<std::string> tails = {"", " today", " again", " indeed"};
  std::mt19937_64 rng(9);
  std::vector<std::string> corpus;
  std::string text;
  for (int i = 0; i < 200; ++i) {
    std::string line = names[rng() % names.size()] + " " + verbs[rng() % verbs.size()] + " " +
                       names[rng() % names.size()] + " is a " + insults[rng() % insults.size()] +
                       tails[rng() % tails.size()];
    corpus.push_back(line);
    text += line + "\n";
  }
  auto vocab = std::make_shared<const Vocabulary>(TrainBpe(text, 300));
  auto model = testing::TrainedModel(vocab, text, 4, 0.01);
  std::bitset<256> lowercase;
  for (int c = 'a'; c <= 'z'; ++c) lowercase.set(c);
  auto run = [&](bool edits, EncodingMode enc) {
    ToxicityConfig c;
    c.corpus = corpus;
    c.target_pattern = "jerk|idiot|fool|clown|moron";
    c.prompted = true;
    c.edits = edits;
    c.edit_alphabet = lowercase;
    c.encoding = enc;
    c.budget = 5000;
    c.rule = DecisionRule::TopK(40);
    return HarnessToxicity(c, *model);
  };
  ToxicityReport rep[2][2] = {{run(false, EncodingMode::kCanonical), run(true, EncodingMode::kCanonical)},
                              {run(false, EncodingMode::kFull), run(true, EncodingMode::kFull)}};
  auto subset = [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
  };
  std::size_t inputs = rep[0][0].inputs.size(), ok_edit = 0, ok_full = 0, exhausted = 0;
  std::size_t nonempty = 0;
  for (std::size_t i = 0; i < inputs; ++i) {
    bool edit = subset(rep[0][0].inputs[i].success, rep[0][1].inputs[i].success) &&
                subset(rep[1][0].inputs[i].success, rep[1][1].inputs[i].success);
    bool full = subset(rep[0][0].inputs[i].success, rep[1][0].inputs[i].success) &&
                subset(rep[0][1].inputs[i].success, rep[1][1].inputs[i].success);
    ok_edit += edit;
    ok_full += full;
    bool all_exhausted = true;
    for (auto& row : rep) {
      for (auto& r : row) all_exhausted &= r.inputs[i].exhausted;
    }
    exhausted += all_exhausted;
    nonempty += !rep[0][0].inputs[i].success.empty();
  }
  bool ok = inputs == 200 && ok_edit == inputs && ok_full == inputs;
  return {ok, std::to_string(inputs) + " inputs: no-edit subset of edit " +
                  std::to_string(ok_edit) + "/" + std::to_string(inputs) +
                  ", canonical subset of full " + std::to_string(ok_full) + "/" +
                  std::to_string(inputs) + " (" + std::to_string(nonempty) +
                  " non-empty canonical sets, " + std::to_string(exhausted) +
                  " exhausted under every setting)"};
}

// ---------------------------------------------------------------------------
// AC10: cloze variant structure.
Outcome Cloze() {
  // Givers and receivers come from disjoint name pools. The model has seen
  // "thanked <giver>" but never "thanked <receiver>", and it has seen
  // "thanked Zed" most often of all; Zed never occurs in a passage. An
  // unconstrained completion drifts to Zed (or a fragment of a word); one
  // restricted to the passage's words can only pick among names present.
  const std::vector<std::string> givers = {"Anna", "Carl", "Eli", "Gus", "Ivo"};
  const std::vector<std::string> receivers = {"Ben", "Dora", "Fay", "Hana", "Jill"};
  const std::vector<std::string> objects = {"book", "lamp", "coat", "map", "key"};
  std::mt19937_64 rng(10);
  std::vector<ClozeItem> items;
  for (int i = 0; i < 50; ++i) {
    std::string a = givers[rng() % givers.size()], b = receivers[rng() % receivers.size()];
    std::string obj = objects[rng() % objects.size()];
    items.push_back({a + " gave the " + obj + " to " + b + ". Then " + b + " thanked", a});
  }
  std::string training;
  for (int i = 0; i < 40; ++i) {
    training += "they thanked Zed and the " + objects[rng() % objects.size()] +
                " was on the table.\n";
    if (i % 2 == 0) training += "we thanked " + givers[rng() % givers.size()] + " today.\n";
  }
  auto vocab = std::make_shared<const Vocabulary>();
  auto model = testing::TrainedModel(vocab, training, 6, 0.01);
  const auto& stop = DefaultStopWords();
  std::size_t nested = 0;
  for (const ClozeItem& item : items) {
    ClozeQuery base = MakeClozeQuery(ClozeVariant::kBaseline, item, stop);
    ClozeQuery term = MakeClozeQuery(ClozeVariant::kTerminated, item, stop);
    ClozeQuery nostop = MakeClozeQuery(ClozeVariant::kNoStop, item, stop);
    // A terminated completion is a baseline completion followed by EOS, so
    // inclusion needs the byte languages nested and termination only added.
    bool ok = IsSubset(ClozeLanguage(nostop), ClozeLanguage(term)) &&
              IsSubset(ClozeLanguage(term), ClozeLanguage(base)) && nostop.require_eos &&
              term.require_eos && !base.require_eos;
    nested += ok;
  }
  ClozeConfig cfg;
  cfg.stop_words = stop;
  cfg.variant = ClozeVariant::kBaseline;
  ClozeReport baseline = HarnessCloze(items, cfg, *model);
  cfg.variant = ClozeVariant::kWords;
  ClozeReport words = HarnessCloze(items, cfg, *model);
  bool ok = nested == items.size() && words.accuracy() >= baseline.accuracy();
  return {ok, "NO_STOP <= TERMINATED <= BASELINE for " + std::to_string(nested) + "/" +
                  std::to_string(items.size()) + " items; " +
                  Fmt("accuracy words %.2f vs baseline %.2f", words.accuracy(),
                      baseline.accuracy())};
}

// ---------------------------------------------------------------------------
// AC11: CLI determinism.
struct Invocation {
  int code = 0;
  std::string out, err;
  std::map<std::string, std::string> files;
};

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void Spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

Invocation Invoke(const fs::path& dir, std::vector<std::string> args) {
  Invocation inv;
  std::ostringstream out, err;
  args.insert(args.begin(), "lmre");
  inv.code = RunCli(args, out, err);
  inv.out = out.str();
  // Wall-clock time is the one intentionally varying field.
  inv.err = std::regex_replace(err.str(), std::regex("elapsed=[0-9.]+s"), "elapsed=*");
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) {
      inv.files[fs::relative(entry.path(), dir).string()] = Slurp(entry.path());
    }
  }
  return inv;
}

Outcome Determinism() {
  const fs::path root = fs::temp_directory_path() / "lmre_acceptance_determinism";
  auto setup = [&](const fs::path& dir) {
    fs::remove_all(dir);
    fs::create_directories(dir / "out");
    Spit(dir / "corpus.txt", "the cat sat on the mat\nthe dog sat on the log\nthe cat ran\n");
    Spit(dir / "walk.json", R"j({"pattern": "The (nurse|doctor) was (kind|busy)",
        "prefix": "The ", "traversal": "random", "seed": 7, "max_results": 40,
        "preprocessors": [{"levenshtein": 1, "scope": "prefix"}]})j");
    Spit(dir / "best.json", R"j({"pattern": "the [a-z]{2,5}", "prefix": "the ",
        "top_k": 40, "max_results": 25, "model": "hash:3"})j");
    Spit(dir / "bias.json", R"j({"prefix_template": "The {} was", "groups": ["man", "woman"],
        "outcomes": ["kind", "busy"], "samples": 200, "seed": 4})j");
    Spit(dir / "extract.json", R"j({"pattern": "id: [0-9]{2}", "budget": 15,
        "baseline_lengths": [6], "seed": 2})j");
    Spit(dir / "prompts.txt", "you are a jerk\nhe is such a fool\n");
    Spit(dir / "toxicity.json", R"j({"corpus": "prompts.txt", "target_pattern": " (jerk|fool)",
        "edits": true, "edit_alphabet": "lowercase", "budget": 200})j");
    Spit(dir / "cloze.tsv", "Ann met Bob and then\tAnn\nCid saw Dee and then\tCid\n");
    Spit(dir / "cloze.json", R"j({"dataset": "cloze.tsv", "variant": "no_stop"})j");
  };
  const std::vector<std::vector<std::string>> commands = {
      {"run", "walk.json", "-o", "out/walk.jsonl"},
      {"run", "best.json"},
      {"compile", "walk.json", "--dot", "out/walk"},
      {"train-lm", "corpus.txt", "--order", "3", "--vocab-size", "270", "-o", "out/model"},
      {"harness", "extract", "extract.json"},
      {"harness", "bias", "bias.json", "-o", "out/bias.json"},
      {"harness", "toxicity", "toxicity.json"},
      {"harness", "cloze", "cloze.json"},
  };
  std::size_t identical = 0;
  std::string first_difference;
  for (const auto& command : commands) {
    Invocation runs[2];
    for (int i = 0; i < 2; ++i) {
      fs::path dir = root / ("run" + std::to_string(i));
      setup(dir);
      std::vector<std::string> args;
      for (const std::string& a : command) {
        bool is_path = a.find('.') != std::string::npos || a.rfind("out/", 0) == 0;
        args.push_back(is_path ? (dir / a).string() : a);
      }
      runs[i] = Invoke(dir, args);
      // Paths differ between the two directories; compare them relativized.
      runs[i].err = std::regex_replace(runs[i].err, std::regex(dir.string()), "<dir>");
      if (runs[i].code != 0) {
        return {false, "'" + command[0] + "' exited " + std::to_string(runs[i].code) + ": " +
                           runs[i].err};
      }
    }
    bool same = runs[0].code == runs[1].code && runs[0].out == runs[1].out &&
                runs[0].err == runs[1].err && runs[0].files == runs[1].files;
    identical += same;
    if (!same && first_difference.empty()) first_difference = command[0] + " " + command[1];
  }
  fs::remove_all(root);
  bool ok = identical == commands.size();
  return {ok, std::to_string(identical) + "/" + std::to_string(commands.size()) +
                  " invocations byte-identical across two runs (stdout, output files, stderr "
                  "with elapsed time masked)" +
                  (ok ? "" : "; first difference: " + first_difference)};
}

}  // namespace
}  // namespace lmre

int main() {
  using namespace lmre;
  Suite suite;
  suite.Run("AC1", "encoding counts", 1, EncodingCounts);
  suite.Run("AC2", "compiler oracle equivalence", 60, CompilerOracle);
  suite.Run("AC3", "executor oracle equivalence", 120, ExecutorOracle);
  suite.Run("AC4", "walk-normalized sampling", 60, PrefixSampling);
  suite.Run("AC5", "Levenshtein correctness", 30, LevenshteinOracle);
  suite.Run("AC6", "edit-position uniformity", 60, EditUniformity);
  suite.Run("AC7", "chi-square implementation", 1, ChiSquare);
  suite.Run("AC8", "duplicate-free extraction", 120, Extraction);
  suite.Run("AC9", "monotonicity suite", 120, Monotonicity);
  suite.Run("AC10", "cloze variant structure", 60, Cloze);
  suite.Run("AC11", "CLI determinism", 30, Determinism);
  std::cout << (suite.failures() ? "acceptance: " + std::to_string(suite.failures()) + " failed"
                                 : std::string("acceptance: all criteria passed"))
            << std::endl;
  return suite.failures() ? 1 : 0;
}
