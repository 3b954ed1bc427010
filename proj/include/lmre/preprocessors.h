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

// Query-time rewrites of byte automata: edit-distance neighborhoods and
// string filters.

#ifndef LMRE_PREPROCESSORS_H_
#define LMRE_PREPROCESSORS_H_

#include <bitset>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lmre/automaton.h"

namespace lmre {

// Printable ASCII, 0x20..0x7E.
std::bitset<256> PrintableAscii();

// Accepts every string within one substitution, insertion or deletion of a
// string of L(a); inserted and substituted bytes come from `alphabet`.
// Returns a minimal DFA.
Automaton LevenshteinExpand(const Automaton& a, const std::bitset<256>& alphabet,
                            std::size_t state_cap = kDefaultStateCap);

// `distance` chained single-edit expansions.
Automaton LevenshteinExpand(const Automaton& a, const std::bitset<256>& alphabet,
                            int distance, std::size_t state_cap = kDefaultStateCap);

struct EditAlignment {
  std::size_t distance = 0;
  // Offsets in the aligned string where each edit happens, ascending. A
  // deletion at offset i removed a byte just before text[i].
  std::vector<std::size_t> positions;
};

// Minimum edit distance from `text` to L(a) (a deterministic), if at most
// `max_distance`. Among optimal alignments, matches are preferred as long as
// possible, so each edit sits at the first position where `text` departs
// from the language.
std::optional<EditAlignment> AlignEdits(const Automaton& a, std::string_view text,
                                        std::size_t max_distance);

enum class FilterMode {
  // Automaton difference up front.
  kEager,
  // Leave the automaton alone; reject matches when they complete.
  kDeferred,
};

struct FilterResult {
  Automaton automaton;
  // Present in deferred mode: completed strings in this language are dropped.
  std::optional<Automaton> deferred_deny;
};

// L(a) \ L(deny). Eager mode reports a state-cap overflow as a compile error
// that suggests deferred mode.
FilterResult FilterStrings(const Automaton& a, const Automaton& deny, FilterMode mode,
                           std::size_t state_cap = kDefaultStateCap);

// Accepts exactly the given words.
Automaton WordListAutomaton(const std::vector<std::string>& words);

// One word per line; blank lines and lines starting with '#' are skipped.
std::vector<std::string> ParseWordList(std::string_view text);

}  // namespace lmre

#endif  // LMRE_PREPROCESSORS_H_
