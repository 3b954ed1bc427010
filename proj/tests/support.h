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

// Test-only oracles: independent brute-force implementations that the
// engine's results are checked against.

#ifndef LMRE_TESTS_SUPPORT_H_
#define LMRE_TESTS_SUPPORT_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lmre/automaton.h"
#include "lmre/language_model.h"
#include "lmre/vocabulary.h"

namespace lmre::testing {

// Every string over `alphabet` of length <= max_length, shortest first.
inline std::vector<std::string> AllStrings(std::string_view alphabet, std::size_t max_length) {
  std::vector<std::string> out = {""};
  std::size_t begin = 0;
  for (std::size_t len = 1; len <= max_length; ++len) {
    std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i) {
      for (char c : alphabet) out.push_back(out[i] + c);
    }
    begin = end;
  }
  return out;
}

// Matcher for the generator's regex subset (literals, [...] classes, groups,
// |, ?, *, +, {m,n}) that tracks sets of end positions instead of
// backtracking, so nested repetition stays polynomial. Independent of the
// engine's parser and automata.
class RegexOracle {
 public:
  explicit RegexOracle(std::string pattern) : p_(std::move(pattern)) {}

  bool Matches(std::string_view s) const {
    s_ = s;
    std::size_t pos = 0;
    std::set<std::size_t> ends = Alternation(pos, {0});
    return ends.count(s.size()) > 0;
  }

 private:
  using Positions = std::set<std::size_t>;

  Positions Alternation(std::size_t& pos, const Positions& in) const {
    Positions out = Concat(pos, in);
    while (pos < p_.size() && p_[pos] == '|') {
      ++pos;
      Positions more = Concat(pos, in);
      out.insert(more.begin(), more.end());
    }
    return out;
  }

  Positions Concat(std::size_t& pos, Positions cur) const {
    while (pos < p_.size() && p_[pos] != '|' && p_[pos] != ')') cur = Repeat(pos, cur);
    return cur;
  }

  Positions Repeat(std::size_t& pos, const Positions& in) const {
    std::size_t atom = pos;
    Positions once = Atom(pos, in);
    std::size_t after = pos;
    if (pos >= p_.size()) return once;
    char q = p_[pos];
    auto step = [&](const Positions& from) {
      std::size_t p = atom;
      return Atom(p, from);
    };
    auto closure = [&](Positions acc) {
      Positions frontier = acc;
      while (!frontier.empty()) {
        Positions next;
        for (std::size_t e : step(frontier)) {
          if (acc.insert(e).second) next.insert(e);
        }
        frontier = std::move(next);
      }
      return acc;
    };
    if (q == '?') {
      ++pos;
      once.insert(in.begin(), in.end());
      return once;
    }
    if (q == '*') {
      ++pos;
      return closure(in);
    }
    if (q == '+') {
      ++pos;
      return closure(once);
    }
    if (q == '{') {
      std::size_t close = p_.find('}', pos);
      std::string body = p_.substr(pos + 1, close - pos - 1);
      std::size_t comma = body.find(',');
      int lo = std::stoi(body.substr(0, comma));
      int hi = comma == std::string::npos ? lo : std::stoi(body.substr(comma + 1));
      pos = close + 1;
      Positions cur = in, out;
      for (int i = 0; i <= hi; ++i) {
        if (i >= lo) out.insert(cur.begin(), cur.end());
        if (i < hi) cur = step(cur);
      }
      return out;
    }
    pos = after;
    return once;
  }

  Positions Atom(std::size_t& pos, const Positions& in) const {
    char c = p_[pos];
    if (c == '(') {
      ++pos;
      Positions out = Alternation(pos, in);
      ++pos;  // ')'
      return out;
    }
    std::set<char> allowed;
    if (c == '[') {
      ++pos;
      while (p_[pos] != ']') allowed.insert(p_[pos++]);
      ++pos;
    } else {
      allowed.insert(c);
      ++pos;
    }
    Positions out;
    for (std::size_t i : in) {
      if (i < s_.size() && allowed.count(s_[i])) out.insert(i + 1);
    }
    return out;
  }

  std::string p_;
  mutable std::string_view s_;
};

// Language of `pattern` restricted to strings over `alphabet` up to
// `max_length`, decided by the oracle matcher.
inline std::set<std::string> RegexLanguage(const std::string& pattern, std::string_view alphabet,
                                           std::size_t max_length) {
  RegexOracle oracle(pattern);
  std::set<std::string> out;
  for (const std::string& s : AllStrings(alphabet, max_length)) {
    if (oracle.Matches(s)) out.insert(s);
  }
  return out;
}

inline std::set<std::string> AutomatonLanguage(const Automaton& a, std::size_t limit = 100000) {
  std::set<std::string> out;
  for (const auto& w : Enumerate(a, limit).strings) out.insert(SymbolsToBytes(w));
  return out;
}

// Random regex over `alphabet`. Finite patterns use no unbounded
// repetition; `max_length` receives an upper bound on match length.
class RegexGenerator {
 public:
  RegexGenerator(std::uint64_t seed, std::string alphabet, bool finite)
      : rng_(seed), alphabet_(std::move(alphabet)), finite_(finite) {}

  std::string Next(std::size_t* max_length = nullptr) {
    std::size_t bound = 0;
    std::string p = Expr(3, bound);
    if (max_length) *max_length = bound;
    return p;
  }

 private:
  std::size_t Pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

  std::string Expr(int depth, std::size_t& bound) {
    std::size_t n = 1 + Pick(depth > 0 ? 3 : 1);
    std::string out;
    bound = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t b = 0;
      if (i) out += '|';
      out += Concat(depth, b);
      bound = std::max(bound, b);
    }
    return out;
  }

  std::string Concat(int depth, std::size_t& bound) {
    std::size_t n = 1 + Pick(3);
    std::string out;
    bound = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t b = 0;
      out += Repeat(depth, b);
      bound += b;
    }
    return out;
  }

  std::string Repeat(int depth, std::size_t& bound) {
    std::string atom = Atom(depth, bound);
    switch (Pick(finite_ ? 6 : 8)) {
      case 0:
        return atom + "?";
      case 1: {
        std::size_t lo = Pick(2), hi = lo + Pick(3);
        bound *= hi;
        return atom + "{" + std::to_string(lo) + "," + std::to_string(hi) + "}";
      }
      case 6:
        bound = 1000;
        return atom + "*";
      case 7:
        bound = 1000;
        return atom + "+";
      default:
        return atom;
    }
  }

  std::string Atom(int depth, std::size_t& bound) {
    std::size_t k = Pick(depth > 0 ? 6 : 4);
    if (k == 4 || k == 5) {
      std::string inner = Expr(depth - 1, bound);
      return "(" + inner + ")";
    }
    bound = 1;
    if (k == 3) {
      std::string cls = "[";
      for (char c : alphabet_) {
        if (Pick(2)) cls += c;
      }
      if (cls.size() == 1) cls += alphabet_[0];
      return cls + "]";
    }
    return std::string(1, alphabet_[Pick(alphabet_.size())]);
  }

  std::mt19937_64 rng_;
  std::string alphabet_;
  bool finite_;
};

// A toy vocabulary: all bytes plus `count` random multi-byte tokens over
// `alphabet` (lengths 2..4).
inline Vocabulary RandomVocabulary(std::uint64_t seed, std::string_view alphabet,
                                   std::size_t count) {
  std::mt19937_64 rng(seed);
  std::set<std::string> seen;
  std::vector<std::string> extra;
  // Tokens are added shortest first so every one has a split into existing
  // tokens.
  std::vector<std::string> candidates;
  for (std::size_t len = 2; len <= 4; ++len) {
    for (const std::string& s : AllStrings(alphabet, len)) {
      if (s.size() == len) candidates.push_back(s);
    }
  }
  std::shuffle(candidates.begin(), candidates.end(), rng);
  candidates.resize(std::min(count, candidates.size()));
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const std::string& a, const std::string& b) { return a.size() < b.size(); });
  return Vocabulary::WithTokens(candidates);
}

// Every token sequence spelling `text`, by plain recursion over the token
// table (no tries, no automata).
inline void Tokenizations(const Vocabulary& v, std::string_view text, TokenSequence& path,
                          std::set<TokenSequence>& out) {
  if (text.empty()) {
    out.insert(path);
    return;
  }
  for (TokenId id = 0; id < v.eos(); ++id) {
    const std::string& b = v.bytes(id);
    if (!b.empty() && text.substr(0, b.size()) == b) {
      path.push_back(id);
      Tokenizations(v, text.substr(b.size()), path, out);
      path.pop_back();
    }
  }
}

inline std::set<TokenSequence> Tokenizations(const Vocabulary& v, std::string_view text) {
  std::set<TokenSequence> out;
  TokenSequence path;
  Tokenizations(v, text, path, out);
  return out;
}

// Every accepting symbol sequence of an acyclic automaton.
inline std::set<std::vector<Symbol>> AcceptingPaths(const Automaton& a) {
  std::set<std::vector<Symbol>> out;
  std::vector<Symbol> path;
  std::function<void(StateId)> walk = [&](StateId s) {
    if (a.is_final(s)) out.insert(path);
    for (const Edge& e : a.edges(s)) {
      path.push_back(e.symbol);
      walk(e.target);
      path.pop_back();
    }
  };
  walk(a.initial());
  return out;
}

inline std::size_t EditDistance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

// Strings reachable from `source` with at most `distance` single-byte
// insertions, deletions or substitutions drawn from `alphabet`.
inline std::set<std::string> EditNeighborhood(const std::string& source,
                                              std::string_view alphabet, int distance) {
  std::set<std::string> ball = {source};
  std::set<std::string> frontier = ball;
  for (int d = 0; d < distance; ++d) {
    std::set<std::string> next;
    for (const std::string& s : frontier) {
      for (std::size_t i = 0; i <= s.size(); ++i) {
        for (char c : alphabet) {
          next.insert(s.substr(0, i) + c + s.substr(i));
          if (i < s.size()) next.insert(s.substr(0, i) + c + s.substr(i + 1));
        }
        if (i < s.size()) next.insert(s.substr(0, i) + s.substr(i + 1));
      }
    }
    frontier.clear();
    for (const std::string& s : next) {
      if (ball.insert(s).second) frontier.insert(s);
    }
  }
  return ball;
}

// A small n-gram model over the byte vocabulary trained on `corpus`.
inline std::shared_ptr<NGramLM> TrainedModel(std::shared_ptr<const Vocabulary> vocab,
                                             std::string_view corpus, std::size_t order,
                                             double alpha) {
  auto m = std::make_shared<NGramLM>(std::move(vocab), order, alpha);
  m->Train(corpus);
  return m;
}

// Brute-force scoring of a finite language under canonical encoding: every
// string that survives the rule with its log-probability, ordered by the
// search's documented tie-break (cost, then token count, then tokens).
struct Scored {
  std::string text;
  TokenSequence tokens;
  double logprob;
};

inline std::vector<Scored> BruteForceCanonical(const LanguageModel& m,
                                               const std::set<std::string>& language,
                                               const DecisionRule& rule) {
  std::vector<Scored> out;
  for (const std::string& s : language) {
    if (s.empty()) continue;
    TokenSequence t = m.vocab().Encode(s);
    auto lp = SequenceLogProb(m, t, rule);
    if (lp) out.push_back({s, t, *lp});
  }
  std::sort(out.begin(), out.end(), [](const Scored& a, const Scored& b) {
    if (a.logprob != b.logprob) return a.logprob > b.logprob;
    if (a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
    return a.tokens < b.tokens;
  });
  return out;
}

}  // namespace lmre::testing

#endif  // LMRE_TESTS_SUPPORT_H_
