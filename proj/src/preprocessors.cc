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


#include "lmre/preprocessors.h"

#include <algorithm>
#include <limits>

#include "lmre/error.h"

namespace lmre {
namespace {

const Automaton& Deterministic(const Automaton& a, Automaton& storage,
                               std::size_t state_cap) {
  if (a.IsDeterministic()) return a;
  storage = Determinize(a, state_cap);
  return storage;
}

}  // namespace

std::bitset<256> PrintableAscii() {
  std::bitset<256> bytes;
  for (int b = 0x20; b <= 0x7E; ++b) bytes.set(b);
  return bytes;
}

Automaton LevenshteinExpand(const Automaton& input, const std::bitset<256>& alphabet,
                            std::size_t state_cap) {
  Automaton storage;
  const Automaton& a = Deterministic(input, storage, state_cap);
  std::vector<Symbol> symbols;
  for (int c = 0; c < 256; ++c) {
    if (alphabet.test(c)) symbols.push_back(c);
  }
  // State (q, e) is 2q + e: e counts the edits spent so far.
  Automaton nfa(AlphabetKind::kByte);
  for (std::size_t q = 0; q < a.num_states(); ++q) {
    bool final = a.is_final(static_cast<StateId>(q));
    nfa.AddState(final);
    nfa.AddState(final);
  }
  nfa.set_initial(2 * a.initial());
  for (std::size_t q = 0; q < a.num_states(); ++q) {
    const auto from0 = static_cast<StateId>(2 * q);
    const auto from1 = static_cast<StateId>(2 * q + 1);
    for (Symbol c : symbols) nfa.AddEdge(from0, c, from1);  // insertion
    for (const Edge& e : a.edges(static_cast<StateId>(q))) {
      const StateId to0 = 2 * e.target;
      const StateId to1 = 2 * e.target + 1;
      nfa.AddEdge(from0, e.symbol, to0);  // match
      nfa.AddEdge(from1, e.symbol, to1);
      nfa.AddEdge(from0, kEpsilon, to1);  // deletion
      for (Symbol c : symbols) nfa.AddEdge(from0, c, to1);  // substitution
    }
  }
  return Minimize(nfa, state_cap);
}

Automaton LevenshteinExpand(const Automaton& a, const std::bitset<256>& alphabet,
                            int distance, std::size_t state_cap) {
  if (distance < 1) throw Error(Stage::kCompile, "edit distance must be at least 1");
  Automaton out = LevenshteinExpand(a, alphabet, state_cap);
  for (int i = 1; i < distance; ++i) out = LevenshteinExpand(out, alphabet, state_cap);
  return out;
}

std::optional<EditAlignment> AlignEdits(const Automaton& input, std::string_view text,
                                        std::size_t max_distance) {
  Automaton storage;
  const Automaton& a = Deterministic(input, storage, kDefaultStateCap);
  const std::size_t n = text.size();
  const std::size_t num = a.num_states();
  const std::size_t inf = max_distance + 1;
  // d[i][q]: fewest edits turning text[i..] into a string accepted from q.
  std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(num, inf));
  auto relax_deletions = [&](std::vector<std::size_t>& layer) {
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t q = 0; q < num; ++q) {
        for (const Edge& e : a.edges(static_cast<StateId>(q))) {
          std::size_t via = std::min(inf, layer[e.target] + 1);
          if (via < layer[q]) {
            layer[q] = via;
            changed = true;
          }
        }
      }
    }
  };
  for (std::size_t q = 0; q < num; ++q) {
    if (a.is_final(static_cast<StateId>(q))) d[n][q] = 0;
  }
  relax_deletions(d[n]);
  for (std::size_t i = n; i-- > 0;) {
    const auto byte = static_cast<unsigned char>(text[i]);
    for (std::size_t q = 0; q < num; ++q) {
      std::size_t best = std::min(inf, d[i + 1][q] + 1);  // insertion
      for (const Edge& e : a.edges(static_cast<StateId>(q))) {
        std::size_t cost = d[i + 1][e.target] + (e.symbol == byte ? 0 : 1);
        best = std::min(best, cost);
      }
      d[i][q] = best;
    }
    relax_deletions(d[i]);
  }
  StateId q = a.initial();
  if (d[0][q] > max_distance) return std::nullopt;

  EditAlignment out;
  out.distance = d[0][q];
  std::size_t i = 0;
  while (d[i][q] > 0 || i < n) {
    const std::size_t here = d[i][q];
    if (i < n) {
      StateId next = a.Next(q, static_cast<unsigned char>(text[i]));
      if (next >= 0 && d[i + 1][next] == here) {
        q = next;
        ++i;
        continue;
      }
    }
    out.positions.push_back(i);
    bool moved = false;
    if (i < n) {
      for (const Edge& e : a.edges(q)) {  // substitution
        if (d[i + 1][e.target] + 1 == here) {
          q = e.target;
          ++i;
          moved = true;
          break;
        }
      }
      if (!moved && d[i + 1][q] + 1 == here) {  // insertion
        ++i;
        moved = true;
      }
    }
    if (!moved) {
      for (const Edge& e : a.edges(q)) {  // deletion
        if (d[i][e.target] + 1 == here) {
          q = e.target;
          moved = true;
          break;
        }
      }
    }
    if (!moved) throw Error(Stage::kExec, "edit alignment traceback failed");
  }
  return out;
}

FilterResult FilterStrings(const Automaton& a, const Automaton& deny, FilterMode mode,
                           std::size_t state_cap) {
  if (a.kind() != deny.kind()) {
    throw Error(Stage::kCompile, "filter alphabet does not match the pattern's");
  }
  if (mode == FilterMode::kDeferred) return {a, deny};
  try {
    return {Minimize(Difference(a, deny, state_cap), state_cap), std::nullopt};
  } catch (const Error& e) {
    throw Error(Stage::kCompile,
                std::string(e.what()) + "; use the deferred filter mode instead");
  }
}

Automaton WordListAutomaton(const std::vector<std::string>& words) {
  Automaton trie(AlphabetKind::kByte);
  trie.AddState(false);
  for (const std::string& w : words) {
    StateId s = trie.initial();
    for (char c : w) {
      StateId next = trie.Next(s, static_cast<unsigned char>(c));
      if (next < 0) {
        next = trie.AddState(false);
        trie.AddEdge(s, static_cast<unsigned char>(c), next);
      }
      s = next;
    }
    trie.set_final(s);
  }
  return Minimize(trie);
}

std::vector<std::string> ParseWordList(std::string_view text) {
  std::vector<std::string> words;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty() && line.front() != '#') words.emplace_back(line);
    pos = nl + 1;
  }
  return words;
}

}  // namespace lmre
