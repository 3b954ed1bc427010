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

#include "lmre/regex.h"

#include <cctype>
#include <utility>

#include "lmre/error.h"

namespace lmre {
namespace {

using Kind = RegexNode::Kind;

constexpr int kMaxRepeat = 1000;

std::size_t Utf8Length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 0;
}

bool IsQuantifier(char c) { return c == '*' || c == '+' || c == '?' || c == '{'; }

std::bitset<256> DigitSet() {
  std::bitset<256> s;
  for (int c = '0'; c <= '9'; ++c) s.set(c);
  return s;
}

std::bitset<256> WordSet() {
  std::bitset<256> s = DigitSet();
  for (int c = 'a'; c <= 'z'; ++c) s.set(c);
  for (int c = 'A'; c <= 'Z'; ++c) s.set(c);
  s.set('_');
  return s;
}

std::bitset<256> SpaceSet() {
  std::bitset<256> s;
  for (char c : std::string_view(" \t\n\r\f\v")) s.set(static_cast<unsigned char>(c));
  return s;
}

class Parser {
 public:
  explicit Parser(std::string_view pattern) : p_(pattern) {}

  RegexNode Parse() {
    RegexNode node = ParseAlternation();
    if (pos_ < p_.size()) {
      if (p_[pos_] == ')') Fail("unbalanced ')'");
      Fail("unexpected character");
    }
    return node;
  }

 private:
  [[noreturn]] void Fail(const std::string& message) const { Fail(message, pos_); }
  [[noreturn]] void Fail(const std::string& message, std::size_t at) const {
    throw Error(Stage::kParse, message, at);
  }

  bool AtEnd() const { return pos_ >= p_.size(); }
  char Peek() const { return p_[pos_]; }

  RegexNode ParseAlternation() {
    std::size_t begin = pos_;
    std::vector<RegexNode> branches;
    branches.push_back(ParseConcat());
    while (!AtEnd() && Peek() == '|') {
      ++pos_;
      branches.push_back(ParseConcat());
    }
    if (branches.size() == 1) return std::move(branches.front());
    RegexNode node;
    node.kind = Kind::kAlternation;
    node.children = std::move(branches);
    node.begin = begin;
    node.end = pos_;
    return node;
  }

  RegexNode ParseConcat() {
    std::size_t begin = pos_;
    std::vector<RegexNode> items;
    while (!AtEnd() && Peek() != '|' && Peek() != ')') {
      items.push_back(ParseRepeat());
    }
    if (items.empty()) {
      RegexNode eps;
      eps.kind = Kind::kEmptyString;
      eps.begin = eps.end = begin;
      return eps;
    }
    if (items.size() == 1) return std::move(items.front());
    RegexNode node;
    node.kind = Kind::kConcat;
    node.children = std::move(items);
    node.begin = begin;
    node.end = pos_;
    return node;
  }

  RegexNode ParseRepeat() {
    std::size_t begin = pos_;
    RegexNode atom = ParseAtom();
    bool quantified = false;
    while (!AtEnd() && IsQuantifier(Peek())) {
      if (quantified) Fail("multiple repeat");
      quantified = true;
      char q = Peek();
      if (q == '{') {
        auto [min, max] = ParseBounds();
        atom = ExpandBounded(std::move(atom), min, max, begin);
        continue;
      }
      ++pos_;
      RegexNode node;
      node.kind = q == '*' ? Kind::kStar : q == '+' ? Kind::kPlus : Kind::kOptional;
      node.children.push_back(std::move(atom));
      node.begin = begin;
      node.end = pos_;
      atom = std::move(node);
    }
    return atom;
  }

  int ParseNumber() {
    std::size_t start = pos_;
    long value = 0;
    while (!AtEnd() && std::isdigit(static_cast<unsigned char>(Peek()))) {
      value = value * 10 + (Peek() - '0');
      if (value > kMaxRepeat) Fail("repetition count too large", start);
      ++pos_;
    }
    if (pos_ == start) Fail("expected repetition count");
    return static_cast<int>(value);
  }

  // Parses {m}, {m,} or {m,n}; max < 0 means unbounded.
  std::pair<int, int> ParseBounds() {
    std::size_t open = pos_;
    ++pos_;
    int min = ParseNumber();
    int max = min;
    if (!AtEnd() && Peek() == ',') {
      ++pos_;
      max = (!AtEnd() && Peek() == '}') ? -1 : ParseNumber();
    }
    if (AtEnd() || Peek() != '}') Fail("unterminated repetition", open);
    ++pos_;
    if (max >= 0 && max < min) Fail("repetition bounds out of order", open);
    return {min, max};
  }

  RegexNode ExpandBounded(RegexNode atom, int min, int max, std::size_t begin) {
    RegexNode node;
    node.kind = Kind::kConcat;
    node.begin = begin;
    node.end = pos_;
    for (int i = 0; i < min; ++i) node.children.push_back(atom);
    if (max < 0) {
      RegexNode star;
      star.kind = Kind::kStar;
      star.children.push_back(atom);
      star.begin = begin;
      star.end = pos_;
      node.children.push_back(std::move(star));
    } else if (max > min) {
      // x{0,k} as (x(x(...)?)?)?
      RegexNode tail;
      for (int i = 0; i < max - min; ++i) {
        RegexNode opt;
        opt.kind = Kind::kOptional;
        opt.begin = begin;
        opt.end = pos_;
        if (i == 0) {
          opt.children.push_back(atom);
        } else {
          RegexNode inner;
          inner.kind = Kind::kConcat;
          inner.children.push_back(atom);
          inner.children.push_back(std::move(tail));
          opt.children.push_back(std::move(inner));
        }
        tail = std::move(opt);
      }
      node.children.push_back(std::move(tail));
    }
    if (node.children.empty()) {
      node.kind = Kind::kEmptyString;
    } else if (node.children.size() == 1) {
      return std::move(node.children.front());
    }
    return node;
  }

  RegexNode ParseAtom() {
    std::size_t begin = pos_;
    char c = Peek();
    switch (c) {
      case '(': {
        ++pos_;
        RegexNode inner = ParseAlternation();
        if (AtEnd() || Peek() != ')') Fail("unbalanced '('", begin);
        ++pos_;
        RegexNode group;
        group.kind = Kind::kGroup;
        group.children.push_back(std::move(inner));
        group.begin = begin;
        group.end = pos_;
        return group;
      }
      case '[':
        return ParseClass();
      case '*':
      case '+':
      case '?':
      case '{':
        Fail("dangling repetition operator");
      case '}':
        Fail("unescaped '}'");
      case ']':
        Fail("unescaped ']'");
      case '^':
      case '$':
        Fail("anchors are not supported");
      case '.': {
        ++pos_;
        RegexNode any;
        any.kind = Kind::kClass;
        any.bytes.set();
        any.bytes.reset('\n');
        any.begin = begin;
        any.end = pos_;
        return any;
      }
      case '\\':
        return ParseEscape();
      default:
        return ParseLiteralChar();
    }
  }

  RegexNode Literal(unsigned char b, std::size_t begin, std::size_t end) {
    RegexNode node;
    node.kind = Kind::kLiteral;
    node.byte = b;
    node.begin = begin;
    node.end = end;
    return node;
  }

  RegexNode ClassNode(std::bitset<256> set, std::size_t begin, std::size_t end) {
    RegexNode node;
    node.kind = Kind::kClass;
    node.bytes = set;
    node.begin = begin;
    node.end = end;
    return node;
  }

  // A whole UTF-8 code point is one unit for quantifiers.
  RegexNode ParseLiteralChar() {
    std::size_t begin = pos_;
    auto lead = static_cast<unsigned char>(Peek());
    std::size_t len = Utf8Length(lead);
    if (len == 0 || pos_ + len > p_.size()) Fail("invalid UTF-8");
    for (std::size_t i = 1; i < len; ++i) {
      if ((static_cast<unsigned char>(p_[pos_ + i]) >> 6) != 0x2) Fail("invalid UTF-8");
    }
    pos_ += len;
    if (len == 1) return Literal(lead, begin, pos_);
    RegexNode seq;
    seq.kind = Kind::kConcat;
    seq.begin = begin;
    seq.end = pos_;
    for (std::size_t i = 0; i < len; ++i) {
      seq.children.push_back(
          Literal(static_cast<unsigned char>(p_[begin + i]), begin, pos_));
    }
    return seq;
  }

  // Returns true and fills `set` for class escapes (\d, \w, ...); otherwise
  // fills `byte` with the escaped literal.
  bool ReadEscape(std::bitset<256>& set, unsigned char& byte) {
    std::size_t at = pos_;
    ++pos_;  // backslash
    if (AtEnd()) Fail("trailing backslash", at);
    char c = Peek();
    ++pos_;
    switch (c) {
      case 'd': set = DigitSet(); return true;
      case 'D': set = ~DigitSet(); return true;
      case 'w': set = WordSet(); return true;
      case 'W': set = ~WordSet(); return true;
      case 's': set = SpaceSet(); return true;
      case 'S': set = ~SpaceSet(); return true;
      case 'n': byte = '\n'; return false;
      case 't': byte = '\t'; return false;
      case 'r': byte = '\r'; return false;
      case 'f': byte = '\f'; return false;
      case 'v': byte = '\v'; return false;
      case '0': byte = '\0'; return false;
      case 'x': {
        if (pos_ + 2 > p_.size()) Fail("truncated \\x escape", at);
        int value = 0;
        for (int i = 0; i < 2; ++i) {
          char h = p_[pos_++];
          value <<= 4;
          if (h >= '0' && h <= '9') value |= h - '0';
          else if (h >= 'a' && h <= 'f') value |= h - 'a' + 10;
          else if (h >= 'A' && h <= 'F') value |= h - 'A' + 10;
          else Fail("bad hex digit in \\x escape", at);
        }
        byte = static_cast<unsigned char>(value);
        return false;
      }
      default:
        if (std::isalnum(static_cast<unsigned char>(c))) {
          Fail(std::string("unknown escape \\") + c, at);
        }
        if (static_cast<unsigned char>(c) >= 0x80) Fail("escaped non-ASCII byte", at);
        byte = static_cast<unsigned char>(c);
        return false;
    }
  }

  RegexNode ParseEscape() {
    std::size_t begin = pos_;
    std::bitset<256> set;
    unsigned char byte = 0;
    if (ReadEscape(set, byte)) return ClassNode(set, begin, pos_);
    return Literal(byte, begin, pos_);
  }

  RegexNode ParseClass() {
    std::size_t begin = pos_;
    ++pos_;  // [
    bool negate = false;
    if (!AtEnd() && Peek() == '^') {
      negate = true;
      ++pos_;
    }
    std::bitset<256> set;
    std::vector<std::string> sequences;
    bool any_item = false;
    while (true) {
      if (AtEnd()) Fail("unterminated character class", begin);
      if (Peek() == ']') break;
      any_item = true;
      std::size_t item_at = pos_;
      auto lead = static_cast<unsigned char>(Peek());
      if (lead >= 0x80) {
        std::size_t len = Utf8Length(lead);
        if (len == 0 || pos_ + len > p_.size()) Fail("invalid UTF-8");
        if (negate) Fail("non-ASCII characters in negated class", item_at);
        sequences.emplace_back(p_.substr(pos_, len));
        pos_ += len;
        if (!AtEnd() && Peek() == '-' && pos_ + 1 < p_.size() && p_[pos_ + 1] != ']') {
          Fail("ranges over non-ASCII characters are not supported", item_at);
        }
        continue;
      }
      unsigned char lo;
      if (lead == '\\') {
        std::bitset<256> esc_set;
        if (ReadEscape(esc_set, lo)) {
          set |= esc_set;
          continue;
        }
      } else {
        lo = lead;
        ++pos_;
      }
      if (!AtEnd() && Peek() == '-' && pos_ + 1 < p_.size() && p_[pos_ + 1] != ']') {
        ++pos_;  // -
        unsigned char hi;
        if (Peek() == '\\') {
          std::bitset<256> esc_set;
          if (ReadEscape(esc_set, hi)) Fail("class escape used as range bound", item_at);
        } else {
          hi = static_cast<unsigned char>(Peek());
          if (hi >= 0x80) Fail("ranges over non-ASCII characters are not supported", item_at);
          ++pos_;
        }
        if (hi < lo) Fail("character range out of order", item_at);
        for (int b = lo; b <= hi; ++b) set.set(b);
      } else {
        set.set(lo);
      }
    }
    ++pos_;  // ]
    if (!any_item) Fail("empty character class", begin);
    if (negate) set = ~set;
    if (set.none() && sequences.empty()) Fail("empty character class", begin);
    RegexNode node = ClassNode(set, begin, pos_);
    node.sequences = std::move(sequences);
    return node;
  }

  std::string_view p_;
  std::size_t pos_ = 0;
};

// Thompson construction into an epsilon-NFA.
class NfaBuilder {
 public:
  explicit NfaBuilder(Automaton& nfa) : nfa_(nfa) {}

  // Returns (entry, exit) states of the fragment.
  std::pair<StateId, StateId> Build(const RegexNode& node) {
    switch (node.kind) {
      case Kind::kLiteral: {
        auto [in, out] = Pair();
        nfa_.AddEdge(in, node.byte, out);
        return {in, out};
      }
      case Kind::kEmptyString: {
        auto [in, out] = Pair();
        nfa_.AddEdge(in, kEpsilon, out);
        return {in, out};
      }
      case Kind::kEmptySet:
        return Pair();
      case Kind::kClass: {
        auto [in, out] = Pair();
        for (int b = 0; b < 256; ++b) {
          if (node.bytes.test(b)) nfa_.AddEdge(in, b, out);
        }
        for (const std::string& seq : node.sequences) {
          StateId cur = in;
          for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
            StateId next = nfa_.AddState();
            nfa_.AddEdge(cur, static_cast<unsigned char>(seq[i]), next);
            cur = next;
          }
          nfa_.AddEdge(cur, static_cast<unsigned char>(seq.back()), out);
        }
        return {in, out};
      }
      case Kind::kGroup:
        return Build(node.children.front());
      case Kind::kConcat: {
        auto [in, cur] = Build(node.children.front());
        for (std::size_t i = 1; i < node.children.size(); ++i) {
          auto [cin, cout] = Build(node.children[i]);
          nfa_.AddEdge(cur, kEpsilon, cin);
          cur = cout;
        }
        return {in, cur};
      }
      case Kind::kAlternation: {
        auto [in, out] = Pair();
        for (const RegexNode& child : node.children) {
          auto [cin, cout] = Build(child);
          nfa_.AddEdge(in, kEpsilon, cin);
          nfa_.AddEdge(cout, kEpsilon, out);
        }
        return {in, out};
      }
      case Kind::kStar:
      case Kind::kPlus:
      case Kind::kOptional: {
        auto [in, out] = Pair();
        auto [cin, cout] = Build(node.children.front());
        nfa_.AddEdge(in, kEpsilon, cin);
        nfa_.AddEdge(cout, kEpsilon, out);
        if (node.kind != Kind::kPlus) nfa_.AddEdge(in, kEpsilon, out);
        if (node.kind != Kind::kOptional) nfa_.AddEdge(cout, kEpsilon, cin);
        return {in, out};
      }
    }
    return Pair();
  }

 private:
  std::pair<StateId, StateId> Pair() { return {nfa_.AddState(), nfa_.AddState()}; }

  Automaton& nfa_;
};

}  // namespace

RegexNode ParseRegex(std::string_view pattern) { return Parser(pattern).Parse(); }

Automaton CompileRegex(const RegexNode& ast, std::size_t state_cap) {
  Automaton nfa(AlphabetKind::kByte);
  auto [in, out] = NfaBuilder(nfa).Build(ast);
  nfa.set_initial(in);
  nfa.set_final(out);
  return Minimize(nfa, state_cap);
}

Automaton CompileRegex(std::string_view pattern, std::size_t state_cap) {
  return CompileRegex(ParseRegex(pattern), state_cap);
}

std::string EscapeRegex(std::string_view text) {
  static constexpr std::string_view kMeta = "\\.^$|?*+()[]{}-/\"";
  std::string out;
  for (char c : text) {
    if (kMeta.find(c) != std::string_view::npos) {
      out.push_back('\\');
      out.push_back(c);
    } else if (c == '\n') {
      out += "\\n";
    } else if (c == '\t') {
      out += "\\t";
    } else if (c == '\r') {
      out += "\\r";
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::vector<PatternWarning> LintPattern(std::string_view pattern) {
  std::vector<PatternWarning> warnings;
  bool in_class = false;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    char c = pattern[i];
    if (c == '\\') {
      ++i;
      continue;
    }
    if (in_class) {
      if (c == ']') in_class = false;
      continue;
    }
    if (c == '[') {
      in_class = true;
    } else if (c == '.') {
      bool quantified = i + 1 < pattern.size() && IsQuantifier(pattern[i + 1]);
      if (!quantified) {
        warnings.push_back(
            {i, "unescaped '.' matches any byte; use '\\.' for a literal dot"});
      }
    }
  }
  return warnings;
}

}  // namespace lmre
