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

#ifndef LMRE_REGEX_H_
#define LMRE_REGEX_H_

#include <bitset>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "lmre/automaton.h"

namespace lmre {

// Parsed regular expression over bytes. Bounded repetition is already
// desugared into concatenations and optionals.
struct RegexNode {
  enum class Kind {
    kLiteral,      // one byte
    kEmptyString,  // epsilon
    kEmptySet,     // no strings
    kConcat,
    kAlternation,
    kStar,
    kPlus,
    kOptional,
    kClass,  // bytes in `bytes`, plus whole multi-byte UTF-8 sequences
    kGroup,
  };

  Kind kind = Kind::kEmptyString;
  unsigned char byte = 0;
  std::bitset<256> bytes;
  std::vector<std::string> sequences;
  std::vector<RegexNode> children;
  // Source span [begin, end) in the pattern.
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Throws Error(Stage::kParse) with the byte offset of the problem.
RegexNode ParseRegex(std::string_view pattern);

// Byte-level minimal DFA for the expression.
Automaton CompileRegex(const RegexNode& ast,
                       std::size_t state_cap = kDefaultStateCap);

// Parse + compile.
Automaton CompileRegex(std::string_view pattern,
                       std::size_t state_cap = kDefaultStateCap);

// Backslash-escapes every metacharacter so the result matches `text` only.
std::string EscapeRegex(std::string_view text);

struct PatternWarning {
  std::size_t offset;
  std::string message;
};

// Flags an unescaped `.` that is not followed by a quantifier: it matches any
// byte, though a literal dot (as in a domain name) is usually what was meant.
std::vector<PatternWarning> LintPattern(std::string_view pattern);

}  // namespace lmre

#endif  // LMRE_REGEX_H_
