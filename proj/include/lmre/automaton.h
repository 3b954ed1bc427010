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

// Finite automata over byte or token alphabets, and the algebra the rest of
// the engine is built on: determinization, minimization, products,
// enumeration and walk counting.

#ifndef LMRE_AUTOMATON_H_
#define LMRE_AUTOMATON_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace lmre {

using StateId = std::int32_t;
using Symbol = std::int32_t;

// Marks an epsilon edge. Only transient NFAs (regex construction, products
// before determinization) carry these.
inline constexpr Symbol kEpsilon = -1;

inline constexpr std::size_t kDefaultStateCap = 1'000'000;

enum class AlphabetKind { kByte, kToken };

struct Edge {
  Symbol symbol;
  StateId target;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

class Automaton {
 public:
  explicit Automaton(AlphabetKind kind = AlphabetKind::kByte);

  // An automaton with a single non-final initial state (the empty language).
  static Automaton EmptyLanguage(AlphabetKind kind);
  // A single final initial state with no edges: accepts only the empty string.
  static Automaton EmptyString(AlphabetKind kind);
  // Accepts every string over `symbols`.
  static Automaton Universal(AlphabetKind kind, std::span<const Symbol> symbols);
  // Single path spelling `word`.
  static Automaton Literal(AlphabetKind kind, std::span<const Symbol> word);
  static Automaton Literal(std::string_view bytes);

  AlphabetKind kind() const { return kind_; }
  std::size_t num_states() const { return edges_.size(); }
  std::size_t num_edges() const;

  StateId initial() const { return initial_; }
  void set_initial(StateId state);

  bool is_final(StateId state) const { return finals_[state] != 0; }
  void set_final(StateId state, bool final = true);
  std::vector<StateId> final_states() const;

  StateId AddState(bool final = false);
  // Edge lists stay sorted by (symbol, target); exact duplicates are dropped.
  void AddEdge(StateId from, Symbol symbol, StateId to);

  std::span<const Edge> edges(StateId state) const { return edges_[state]; }

  // Target of the unique `symbol` edge, or -1. Binary search; meaningful for
  // deterministic automata.
  StateId Next(StateId state, Symbol symbol) const;

  bool HasEpsilon() const;
  bool IsDeterministic() const;

  // Membership; correct for nondeterministic automata too.
  bool Accepts(std::span<const Symbol> word) const;
  bool Accepts(std::string_view bytes) const;

  // True if no final state is reachable.
  bool IsEmpty() const;

  friend bool operator==(const Automaton&, const Automaton&) = default;

 private:
  AlphabetKind kind_;
  StateId initial_ = 0;
  std::vector<std::vector<Edge>> edges_;
  std::vector<char> finals_;
};

std::vector<Symbol> BytesToSymbols(std::string_view bytes);
std::string SymbolsToBytes(std::span<const Symbol> symbols);

// Subset construction (with epsilon closure). States are numbered in
// breadth-first order from the initial state.
Automaton Determinize(const Automaton& a, std::size_t state_cap = kDefaultStateCap);

// Minimal trimmed DFA in canonical breadth-first numbering: two automata with
// the same language minimize to identical values.
Automaton Minimize(const Automaton& a, std::size_t state_cap = kDefaultStateCap);

// Removes states that are unreachable or cannot reach a final state. The
// initial state is always kept.
Automaton Trim(const Automaton& a);

Automaton Intersect(const Automaton& a, const Automaton& b);
// L(a) \ L(b).
Automaton Difference(const Automaton& a, const Automaton& b,
                     std::size_t state_cap = kDefaultStateCap);
Automaton Union(const Automaton& a, const Automaton& b);
// Epsilon-linked concatenation; determinize before stepping through it.
Automaton Concat(const Automaton& a, const Automaton& b);

bool Equivalent(const Automaton& a, const Automaton& b);
// L(a) is a subset of L(b).
bool IsSubset(const Automaton& a, const Automaton& b);

struct Enumeration {
  std::vector<std::vector<Symbol>> strings;
  // True when every accepted string was produced.
  bool exhausted = false;
};

// Accepted strings in length-then-lexicographic order, at most `limit`.
Enumeration Enumerate(const Automaton& a, std::size_t limit);

// Whether the accepted language is finite.
bool IsFinite(const Automaton& a);

// count(q, n): number of walks of length n from q that end in a final state.
class WalkCountTable {
 public:
  using Count = boost::multiprecision::cpp_int;

  WalkCountTable() = default;
  WalkCountTable(const Automaton& a, std::size_t max_length);

  std::size_t max_length() const { return max_length_; }
  const Count& count(StateId state, std::size_t length) const;
  // Sum of count(state, n) for n <= length (length clamped to max_length).
  const Count& WalksUpTo(StateId state, std::size_t length) const;
  // All accepting walks from the initial state of length <= max_length.
  const Count& total() const;

 private:
  std::size_t max_length_ = 0;
  StateId initial_ = 0;
  std::vector<std::vector<Count>> counts_;
  std::vector<std::vector<Count>> cumulative_;
};

// Labels one edge symbol for rendering; defaults print bytes or token ids.
using SymbolLabeler = std::function<std::string(Symbol)>;

// Graphviz DOT text. Output is a pure function of the automaton.
std::string DumpDot(const Automaton& a, const SymbolLabeler& labeler = {});

// Line-based interchange format:
//   BYTE|TOKEN <TAB> num_states <TAB> initial
//   from <TAB> symbol <TAB> to        (one line per edge)
//   state                             (one line per final state)
std::string Serialize(const Automaton& a);
Automaton ParseAutomaton(std::string_view text);

}  // namespace lmre

#endif  // LMRE_AUTOMATON_H_
