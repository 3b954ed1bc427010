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

// Lifts byte-level automata into token space. The full automaton accepts
// every tokenization of every string; the canonical automaton accepts only
// the encoder's output for each string.

#ifndef LMRE_GRAPH_COMPILER_H_
#define LMRE_GRAPH_COMPILER_H_

#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

#include "lmre/automaton.h"
#include "lmre/vocabulary.h"

namespace lmre {

enum class EncodingMode { kFull, kCanonical };

enum class CanonicalStrategy {
  // Encode every string of a finite language and build the trie.
  kEnumerate,
  // Keep the full automaton; the executor drops non-canonical completions.
  kRuntimeFilter,
  // kEnumerate when the language is finite and within budget, otherwise
  // kRuntimeFilter.
  kAuto,
};

inline constexpr std::size_t kDefaultEnumerateBudget = 100'000;

struct TokenAutomaton {
  Automaton automaton{AlphabetKind::kToken};
  EncodingMode mode = EncodingMode::kFull;
  // Strategy actually used for canonical automata (never kAuto).
  CanonicalStrategy strategy = CanonicalStrategy::kRuntimeFilter;
  // Completed paths must satisfy encode(decode(path)) == path.
  bool runtime_filter = false;
  // For automata that share the byte automaton's states (full and
  // runtime-filtered ones), byte_state[s] is the byte state that token state
  // s stands for, so an edge (s, t, s') covers the byte path spelling
  // bytes(t) from byte_state[s] to byte_state[s']. Empty for trie automata.
  std::vector<StateId> byte_state;
};

// Every (u, v) such that the byte path spelling `word` leads from u to v.
// `a` must be deterministic. Pairs are ordered by u.
std::vector<std::pair<StateId, StateId>> GetConnectingWalks(
    const Automaton& a, std::string_view word);

// Byte edges become single-byte token edges; every multi-byte token gets one
// shortcut edge per connecting walk. Deterministic when `a` is.
TokenAutomaton CompileFull(const Automaton& a, const Vocabulary& vocab,
                           std::size_t edge_cap = 50'000'000);

TokenAutomaton CompileCanonical(const Automaton& a, const Vocabulary& vocab,
                                CanonicalStrategy strategy,
                                std::size_t budget = kDefaultEnumerateBudget);

TokenAutomaton CompileTokens(const Automaton& a, const Vocabulary& vocab,
                             EncodingMode mode, CanonicalStrategy strategy,
                             std::size_t budget = kDefaultEnumerateBudget);

// Renders token edges as their (Ġ-marked) text.
SymbolLabeler TokenLabeler(const Vocabulary& vocab);

}  // namespace lmre

#endif  // LMRE_GRAPH_COMPILER_H_
