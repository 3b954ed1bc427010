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

#include "lmre/automaton.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <deque>
#include <map>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "lmre/error.h"

namespace lmre {

Automaton::Automaton(AlphabetKind kind) : kind_(kind) {}

Automaton Automaton::EmptyLanguage(AlphabetKind kind) {
  Automaton a(kind);
  a.AddState(false);
  return a;
}

Automaton Automaton::EmptyString(AlphabetKind kind) {
  Automaton a(kind);
  a.AddState(true);
  return a;
}

Automaton Automaton::Universal(AlphabetKind kind,
                               std::span<const Symbol> symbols) {
  Automaton a(kind);
  StateId s = a.AddState(true);
  for (Symbol sym : symbols) a.AddEdge(s, sym, s);
  return a;
}

Automaton Automaton::Literal(AlphabetKind kind, std::span<const Symbol> word) {
  Automaton a(kind);
  StateId cur = a.AddState(word.empty());
  for (std::size_t i = 0; i < word.size(); ++i) {
    StateId next = a.AddState(i + 1 == word.size());
    a.AddEdge(cur, word[i], next);
    cur = next;
  }
  return a;
}

Automaton Automaton::Literal(std::string_view bytes) {
  auto symbols = BytesToSymbols(bytes);
  return Literal(AlphabetKind::kByte, symbols);
}

std::size_t Automaton::num_edges() const {
  std::size_t n = 0;
  for (const auto& list : edges_) n += list.size();
  return n;
}

void Automaton::set_initial(StateId state) { initial_ = state; }

void Automaton::set_final(StateId state, bool final) {
  finals_[state] = final ? 1 : 0;
}

std::vector<StateId> Automaton::final_states() const {
  std::vector<StateId> out;
  for (std::size_t i = 0; i < finals_.size(); ++i) {
    if (finals_[i]) out.push_back(static_cast<StateId>(i));
  }
  return out;
}

StateId Automaton::AddState(bool final) {
  edges_.emplace_back();
  finals_.push_back(final ? 1 : 0);
  return static_cast<StateId>(edges_.size() - 1);
}

void Automaton::AddEdge(StateId from, Symbol symbol, StateId to) {
  auto& list = edges_[from];
  Edge e{symbol, to};
  auto it = std::lower_bound(list.begin(), list.end(), e);
  if (it != list.end() && *it == e) return;
  list.insert(it, e);
}

StateId Automaton::Next(StateId state, Symbol symbol) const {
  const auto& list = edges_[state];
  auto it = std::lower_bound(list.begin(), list.end(), Edge{symbol, -1});
  if (it == list.end() || it->symbol != symbol) return -1;
  return it->target;
}

bool Automaton::HasEpsilon() const {
  for (const auto& list : edges_) {
    if (!list.empty() && list.front().symbol == kEpsilon) return true;
  }
  return false;
}

bool Automaton::IsDeterministic() const {
  for (const auto& list : edges_) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i].symbol == kEpsilon) return false;
      if (i > 0 && list[i].symbol == list[i - 1].symbol) return false;
    }
  }
  return true;
}

namespace {

// Hash for state sets and partition signatures.
struct StateVectorHash {
  std::size_t operator()(const std::vector<StateId>& v) const {
    std::size_t h = v.size();
    for (StateId x : v) h = (h ^ static_cast<std::size_t>(x)) * 0x100000001b3ULL;
    return h;
  }
};

// `seen` is scratch of size num_states(), all zero on entry and on return.
void EpsilonClose(const Automaton& a, std::vector<StateId>& states, std::vector<char>& seen) {
  for (StateId s : states) seen[s] = 1;
  // `states` doubles as the worklist: entries past `i` are still unexpanded.
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (const Edge& e : a.edges(states[i])) {
      if (e.symbol != kEpsilon) break;
      if (!seen[e.target]) {
        seen[e.target] = 1;
        states.push_back(e.target);
      }
    }
  }
  for (StateId s : states) seen[s] = 0;
  std::sort(states.begin(), states.end());
}

void EpsilonClose(const Automaton& a, std::vector<StateId>& states) {
  std::vector<char> seen(a.num_states(), 0);
  EpsilonClose(a, states, seen);
}

// Read-only view of a run of state ids, used as a hash key into storage that
// outlives the map.
struct StateSpan {
  const StateId* data;
  std::size_t size;
  friend bool operator==(const StateSpan& x, const StateSpan& y) {
    return x.size == y.size && std::equal(x.data, x.data + x.size, y.data);
  }
};

struct StateSpanHash {
  std::size_t operator()(const StateSpan& v) const {
    std::size_t h = v.size;
    for (std::size_t i = 0; i < v.size; ++i) {
      h = (h ^ static_cast<std::size_t>(v.data[i])) * 0x100000001b3ULL;
    }
    return h;
  }
};

}  // namespace

bool Automaton::Accepts(std::span<const Symbol> word) const {
  std::vector<StateId> current{initial_};
  EpsilonClose(*this, current);
  for (Symbol sym : word) {
    std::vector<StateId> next;
    for (StateId s : current) {
      const auto& list = edges_[s];
      auto it = std::lower_bound(list.begin(), list.end(), Edge{sym, -1});
      for (; it != list.end() && it->symbol == sym; ++it) {
        next.push_back(it->target);
      }
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    if (next.empty()) return false;
    EpsilonClose(*this, next);
    current = std::move(next);
  }
  for (StateId s : current) {
    if (is_final(s)) return true;
  }
  return false;
}

bool Automaton::Accepts(std::string_view bytes) const {
  auto symbols = BytesToSymbols(bytes);
  return Accepts(std::span<const Symbol>(symbols));
}

bool Automaton::IsEmpty() const {
  if (edges_.empty()) return true;
  std::vector<char> seen(num_states(), 0);
  std::vector<StateId> stack{initial_};
  seen[initial_] = 1;
  while (!stack.empty()) {
    StateId s = stack.back();
    stack.pop_back();
    if (is_final(s)) return false;
    for (const Edge& e : edges_[s]) {
      if (!seen[e.target]) {
        seen[e.target] = 1;
        stack.push_back(e.target);
      }
    }
  }
  return true;
}

std::vector<Symbol> BytesToSymbols(std::string_view bytes) {
  std::vector<Symbol> out;
  out.reserve(bytes.size());
  for (char c : bytes) out.push_back(static_cast<unsigned char>(c));
  return out;
}

std::string SymbolsToBytes(std::span<const Symbol> symbols) {
  std::string out;
  out.reserve(symbols.size());
  for (Symbol s : symbols) out.push_back(static_cast<char>(s));
  return out;
}

Automaton Determinize(const Automaton& a, std::size_t state_cap) {
  Automaton out(a.kind());
  if (a.num_states() == 0) return Automaton::EmptyLanguage(a.kind());
  std::unordered_map<std::vector<StateId>, StateId, StateVectorHash> ids;
  std::deque<std::pair<std::vector<StateId>, StateId>> work;
  std::vector<char> seen(a.num_states(), 0);

  auto intern = [&](const std::vector<StateId>& set) -> StateId {
    auto it = ids.find(set);
    if (it != ids.end()) return it->second;
    if (ids.size() >= state_cap) {
      throw Error(Stage::kCompile, "determinization exceeded state cap of " +
                                       std::to_string(state_cap));
    }
    bool final = std::any_of(set.begin(), set.end(),
                             [&](StateId s) { return a.is_final(s); });
    StateId id = out.AddState(final);
    ids.emplace(set, id);
    work.emplace_back(set, id);
    return id;
  };

  std::vector<StateId> target{a.initial()};
  EpsilonClose(a, target, seen);
  out.set_initial(intern(target));

  std::vector<std::pair<Symbol, StateId>> moves;
  while (!work.empty()) {
    auto [set, from] = std::move(work.front());
    work.pop_front();
    moves.clear();
    for (StateId s : set) {
      for (const Edge& e : a.edges(s)) {
        if (e.symbol != kEpsilon) moves.emplace_back(e.symbol, e.target);
      }
    }
    std::sort(moves.begin(), moves.end());
    moves.erase(std::unique(moves.begin(), moves.end()), moves.end());
    for (std::size_t i = 0; i < moves.size();) {
      Symbol sym = moves[i].first;
      target.clear();
      for (; i < moves.size() && moves[i].first == sym; ++i) {
        target.push_back(moves[i].second);
      }
      EpsilonClose(a, target, seen);
      out.AddEdge(from, sym, intern(target));
    }
  }
  return out;
}

Automaton Trim(const Automaton& a) {
  const std::size_t n = a.num_states();
  if (n == 0) return Automaton::EmptyLanguage(a.kind());
  std::vector<char> reach(n, 0), coreach(n, 0);
  std::vector<std::vector<StateId>> reverse(n);
  std::vector<StateId> stack{a.initial()};
  reach[a.initial()] = 1;
  while (!stack.empty()) {
    StateId s = stack.back();
    stack.pop_back();
    for (const Edge& e : a.edges(s)) {
      reverse[e.target].push_back(s);
      if (!reach[e.target]) {
        reach[e.target] = 1;
        stack.push_back(e.target);
      }
    }
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (reach[s] && a.is_final(static_cast<StateId>(s))) {
      coreach[s] = 1;
      stack.push_back(static_cast<StateId>(s));
    }
  }
  while (!stack.empty()) {
    StateId s = stack.back();
    stack.pop_back();
    for (StateId p : reverse[s]) {
      if (!coreach[p]) {
        coreach[p] = 1;
        stack.push_back(p);
      }
    }
  }
  std::vector<StateId> remap(n, -1);
  Automaton out(a.kind());
  for (std::size_t s = 0; s < n; ++s) {
    if ((reach[s] && coreach[s]) || static_cast<StateId>(s) == a.initial()) {
      remap[s] = out.AddState(a.is_final(static_cast<StateId>(s)));
    }
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (remap[s] < 0) continue;
    for (const Edge& e : a.edges(static_cast<StateId>(s))) {
      if (remap[e.target] >= 0 && (reach[e.target] && coreach[e.target])) {
        out.AddEdge(remap[s], e.symbol, remap[e.target]);
      }
    }
  }
  out.set_initial(remap[a.initial()]);
  return out;
}

Automaton Minimize(const Automaton& input, std::size_t state_cap) {
  Automaton dfa = Trim(input.IsDeterministic() ? input
                                               : Determinize(input, state_cap));
  const std::size_t n = dfa.num_states();

  // Moore partition refinement; partial transitions mean "dead".
  std::vector<StateId> cls(n);
  for (std::size_t s = 0; s < n; ++s) {
    cls[s] = dfa.is_final(static_cast<StateId>(s)) ? 1 : 0;
  }
  std::size_t num_classes = 0;
  std::vector<StateId> buffer;
  std::vector<std::size_t> offsets(n + 1);
  while (true) {
    // Signature of s: its class, then (symbol, target class) per edge.
    buffer.clear();
    for (std::size_t s = 0; s < n; ++s) {
      offsets[s] = buffer.size();
      buffer.push_back(cls[s]);
      for (const Edge& e : dfa.edges(static_cast<StateId>(s))) {
        buffer.push_back(e.symbol);
        buffer.push_back(cls[e.target]);
      }
    }
    offsets[n] = buffer.size();
    std::unordered_map<StateSpan, StateId, StateSpanHash> signatures;
    signatures.reserve(n);
    std::vector<StateId> next(n);
    for (std::size_t s = 0; s < n; ++s) {
      StateSpan sig{buffer.data() + offsets[s], offsets[s + 1] - offsets[s]};
      auto [it, inserted] =
          signatures.emplace(sig, static_cast<StateId>(signatures.size()));
      next[s] = it->second;
    }
    cls = std::move(next);
    if (signatures.size() == num_classes) break;
    num_classes = signatures.size();
  }

  // Canonical breadth-first numbering of the quotient.
  std::vector<StateId> representative(num_classes, -1);
  for (std::size_t s = 0; s < n; ++s) {
    if (representative[cls[s]] < 0) representative[cls[s]] = static_cast<StateId>(s);
  }
  Automaton out(dfa.kind());
  std::vector<StateId> order(num_classes, -1);
  std::deque<StateId> queue;
  StateId start_cls = cls[dfa.initial()];
  order[start_cls] = out.AddState(dfa.is_final(dfa.initial()));
  queue.push_back(start_cls);
  while (!queue.empty()) {
    StateId c = queue.front();
    queue.pop_front();
    for (const Edge& e : dfa.edges(representative[c])) {
      StateId tc = cls[e.target];
      if (order[tc] < 0) {
        order[tc] = out.AddState(dfa.is_final(representative[tc]));
        queue.push_back(tc);
      }
      out.AddEdge(order[c], e.symbol, order[tc]);
    }
  }
  out.set_initial(order[start_cls]);
  return out;
}

namespace {

void CheckSameKind(const Automaton& a, const Automaton& b, const char* op) {
  if (a.kind() != b.kind()) {
    throw Error(Stage::kCompile,
                std::string(op) + ": alphabet mismatch between operands");
  }
}

const Automaton& EpsilonFree(const Automaton& a, Automaton& storage) {
  if (!a.HasEpsilon()) return a;
  storage = Determinize(a);
  return storage;
}

}  // namespace

Automaton Intersect(const Automaton& a_in, const Automaton& b_in) {
  CheckSameKind(a_in, b_in, "intersect");
  Automaton sa, sb;
  const Automaton& a = EpsilonFree(a_in, sa);
  const Automaton& b = EpsilonFree(b_in, sb);
  Automaton out(a.kind());
  std::map<std::pair<StateId, StateId>, StateId> ids;
  std::deque<std::pair<StateId, StateId>> work;
  auto intern = [&](StateId p, StateId q) {
    auto key = std::make_pair(p, q);
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    StateId id = out.AddState(a.is_final(p) && b.is_final(q));
    ids.emplace(key, id);
    work.push_back(key);
    return id;
  };
  out.set_initial(intern(a.initial(), b.initial()));
  while (!work.empty()) {
    auto [p, q] = work.front();
    work.pop_front();
    StateId from = ids.at({p, q});
    auto ea = a.edges(p);
    auto eb = b.edges(q);
    std::size_t i = 0, j = 0;
    while (i < ea.size() && j < eb.size()) {
      if (ea[i].symbol < eb[j].symbol) {
        ++i;
      } else if (eb[j].symbol < ea[i].symbol) {
        ++j;
      } else {
        Symbol sym = ea[i].symbol;
        std::size_t j_end = j;
        while (j_end < eb.size() && eb[j_end].symbol == sym) ++j_end;
        for (; i < ea.size() && ea[i].symbol == sym; ++i) {
          for (std::size_t k = j; k < j_end; ++k) {
            out.AddEdge(from, sym, intern(ea[i].target, eb[k].target));
          }
        }
        j = j_end;
      }
    }
  }
  return Trim(out);
}

Automaton Difference(const Automaton& a_in, const Automaton& b_in,
                     std::size_t state_cap) {
  CheckSameKind(a_in, b_in, "difference");
  Automaton sa;
  const Automaton& a = EpsilonFree(a_in, sa);
  Automaton b = b_in.IsDeterministic() ? b_in : Determinize(b_in, state_cap);
  Automaton out(a.kind());
  std::map<std::pair<StateId, StateId>, StateId> ids;
  std::deque<std::pair<StateId, StateId>> work;
  auto intern = [&](StateId p, StateId q) {
    auto key = std::make_pair(p, q);
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    if (ids.size() >= state_cap) {
      throw Error(Stage::kCompile, "difference exceeded state cap of " +
                                       std::to_string(state_cap));
    }
    bool final = a.is_final(p) && (q < 0 || !b.is_final(q));
    StateId id = out.AddState(final);
    ids.emplace(key, id);
    work.push_back(key);
    return id;
  };
  out.set_initial(intern(a.initial(), b.initial()));
  while (!work.empty()) {
    auto [p, q] = work.front();
    work.pop_front();
    StateId from = ids.at({p, q});
    for (const Edge& e : a.edges(p)) {
      StateId qn = q < 0 ? -1 : b.Next(q, e.symbol);
      out.AddEdge(from, e.symbol, intern(e.target, qn));
    }
  }
  return Trim(out);
}

namespace {

// Copies `src` into `dst`, returning the id offset.
StateId Embed(Automaton& dst, const Automaton& src) {
  StateId offset = static_cast<StateId>(dst.num_states());
  for (std::size_t s = 0; s < src.num_states(); ++s) {
    dst.AddState(src.is_final(static_cast<StateId>(s)));
  }
  for (std::size_t s = 0; s < src.num_states(); ++s) {
    for (const Edge& e : src.edges(static_cast<StateId>(s))) {
      dst.AddEdge(offset + static_cast<StateId>(s), e.symbol,
                  offset + e.target);
    }
  }
  return offset;
}

}  // namespace

Automaton Union(const Automaton& a, const Automaton& b) {
  CheckSameKind(a, b, "union");
  Automaton out(a.kind());
  StateId start = out.AddState(false);
  StateId oa = Embed(out, a);
  StateId ob = Embed(out, b);
  out.AddEdge(start, kEpsilon, oa + a.initial());
  out.AddEdge(start, kEpsilon, ob + b.initial());
  out.set_initial(start);
  return out;
}

Automaton Concat(const Automaton& a, const Automaton& b) {
  CheckSameKind(a, b, "concat");
  Automaton out(a.kind());
  StateId oa = Embed(out, a);
  StateId ob = Embed(out, b);
  for (StateId f : a.final_states()) {
    out.set_final(oa + f, false);
    out.AddEdge(oa + f, kEpsilon, ob + b.initial());
  }
  out.set_initial(oa + a.initial());
  return out;
}

bool Equivalent(const Automaton& a, const Automaton& b) {
  return a.kind() == b.kind() && Minimize(a) == Minimize(b);
}

bool IsSubset(const Automaton& a, const Automaton& b) {
  return Difference(a, b).IsEmpty();
}

Enumeration Enumerate(const Automaton& a, std::size_t limit) {
  Automaton dfa = Trim(a.IsDeterministic() ? a : Determinize(a));
  Enumeration result;
  if (limit == 0) {
    result.exhausted = dfa.IsEmpty();
    return result;
  }
  struct Item {
    StateId state;
    std::vector<Symbol> word;
  };
  std::deque<Item> queue;
  queue.push_back({dfa.initial(), {}});
  while (!queue.empty()) {
    Item item = std::move(queue.front());
    queue.pop_front();
    if (dfa.is_final(item.state)) {
      result.strings.push_back(item.word);
      if (result.strings.size() == limit) {
        // Trimmed: anything left in the queue leads to another string.
        result.exhausted = queue.empty() && dfa.edges(item.state).empty();
        return result;
      }
    }
    for (const Edge& e : dfa.edges(item.state)) {
      Item child{e.target, item.word};
      child.word.push_back(e.symbol);
      queue.push_back(std::move(child));
    }
  }
  result.exhausted = true;
  return result;
}

bool IsFinite(const Automaton& a) {
  Automaton t = Trim(a.HasEpsilon() ? Determinize(a) : a);
  const std::size_t n = t.num_states();
  // 0 = unvisited, 1 = on stack, 2 = done.
  std::vector<char> color(n, 0);
  std::vector<std::pair<StateId, std::size_t>> stack;
  for (std::size_t root = 0; root < n; ++root) {
    if (color[root]) continue;
    stack.emplace_back(static_cast<StateId>(root), 0);
    color[root] = 1;
    while (!stack.empty()) {
      auto& [s, idx] = stack.back();
      auto edges = t.edges(s);
      if (idx < edges.size()) {
        StateId next = edges[idx++].target;
        if (color[next] == 1) return false;
        if (color[next] == 0) {
          color[next] = 1;
          stack.emplace_back(next, 0);
        }
      } else {
        color[s] = 2;
        stack.pop_back();
      }
    }
  }
  return true;
}

WalkCountTable::WalkCountTable(const Automaton& a, std::size_t max_length)
    : max_length_(max_length), initial_(a.initial()) {
  const std::size_t n = a.num_states();
  counts_.assign(n, std::vector<Count>(max_length + 1));
  cumulative_.assign(n, std::vector<Count>(max_length + 1));
  for (std::size_t s = 0; s < n; ++s) {
    counts_[s][0] = a.is_final(static_cast<StateId>(s)) ? 1 : 0;
  }
  for (std::size_t len = 1; len <= max_length; ++len) {
    for (std::size_t s = 0; s < n; ++s) {
      Count sum = 0;
      for (const Edge& e : a.edges(static_cast<StateId>(s))) {
        sum += counts_[e.target][len - 1];
      }
      counts_[s][len] = std::move(sum);
    }
  }
  for (std::size_t s = 0; s < n; ++s) {
    Count running = 0;
    for (std::size_t len = 0; len <= max_length; ++len) {
      running += counts_[s][len];
      cumulative_[s][len] = running;
    }
  }
}

const WalkCountTable::Count& WalkCountTable::count(StateId state,
                                                   std::size_t length) const {
  static const Count kZero = 0;
  if (length > max_length_) return kZero;
  return counts_[state][length];
}

const WalkCountTable::Count& WalkCountTable::WalksUpTo(
    StateId state, std::size_t length) const {
  return cumulative_[state][std::min(length, max_length_)];
}

const WalkCountTable::Count& WalkCountTable::total() const {
  return WalksUpTo(initial_, max_length_);
}

namespace {

std::string DefaultLabel(AlphabetKind kind, Symbol sym) {
  if (sym == kEpsilon) return "eps";
  if (kind == AlphabetKind::kToken) return std::to_string(sym);
  if (sym >= 0x21 && sym < 0x7f) return std::string(1, static_cast<char>(sym));
  if (sym == ' ') return "\xC4\xA0";  // Ġ
  char buf[8];
  std::snprintf(buf, sizeof(buf), "\\x%02X", sym);
  return buf;
}

std::string DotEscape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string DumpDot(const Automaton& a, const SymbolLabeler& labeler) {
  std::ostringstream os;
  os << "digraph automaton {\n";
  os << "  rankdir=LR;\n";
  os << "  node [shape=circle];\n";
  os << "  start [shape=point];\n";
  for (std::size_t s = 0; s < a.num_states(); ++s) {
    os << "  " << s;
    if (a.is_final(static_cast<StateId>(s))) os << " [shape=doublecircle]";
    os << ";\n";
  }
  os << "  start -> " << a.initial() << ";\n";
  for (std::size_t s = 0; s < a.num_states(); ++s) {
    for (const Edge& e : a.edges(static_cast<StateId>(s))) {
      std::string label = (labeler && e.symbol != kEpsilon)
                              ? labeler(e.symbol)
                              : DefaultLabel(a.kind(), e.symbol);
      os << "  " << s << " -> " << e.target << " [label=\""
         << DotEscape(label) << "\"];\n";
    }
  }
  os << "}\n";
  return os.str();
}

std::string Serialize(const Automaton& a) {
  std::ostringstream os;
  os << (a.kind() == AlphabetKind::kByte ? "BYTE" : "TOKEN") << '\t'
     << a.num_states() << '\t' << a.initial() << '\n';
  for (std::size_t s = 0; s < a.num_states(); ++s) {
    for (const Edge& e : a.edges(static_cast<StateId>(s))) {
      os << s << '\t' << e.symbol << '\t' << e.target << '\n';
    }
  }
  for (StateId f : a.final_states()) os << f << '\n';
  return os.str();
}

namespace {

std::vector<std::string_view> SplitTabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

long long ParseInt(std::string_view field, std::size_t line_no) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(Stage::kIo, "automaton line " + std::to_string(line_no) +
                                ": bad integer '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

Automaton ParseAutomaton(std::string_view text) {
  std::size_t pos = 0, line_no = 0;
  bool have_header = false;
  Automaton out;
  long long num_states = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    auto fields = SplitTabs(line);
    if (!have_header) {
      if (fields.size() != 3) throw Error(Stage::kIo, "automaton: bad header");
      AlphabetKind kind;
      if (fields[0] == "BYTE") {
        kind = AlphabetKind::kByte;
      } else if (fields[0] == "TOKEN") {
        kind = AlphabetKind::kToken;
      } else {
        throw Error(Stage::kIo, "automaton: unknown alphabet tag");
      }
      out = Automaton(kind);
      num_states = ParseInt(fields[1], line_no);
      long long initial = ParseInt(fields[2], line_no);
      if (num_states <= 0 || initial < 0 || initial >= num_states) {
        throw Error(Stage::kIo, "automaton: bad header values");
      }
      for (long long i = 0; i < num_states; ++i) out.AddState(false);
      out.set_initial(static_cast<StateId>(initial));
      have_header = true;
      continue;
    }
    auto check_state = [&](long long s) {
      if (s < 0 || s >= num_states) {
        throw Error(Stage::kIo, "automaton line " + std::to_string(line_no) +
                                    ": state out of range");
      }
      return static_cast<StateId>(s);
    };
    if (fields.size() == 3) {
      StateId from = check_state(ParseInt(fields[0], line_no));
      Symbol sym = static_cast<Symbol>(ParseInt(fields[1], line_no));
      StateId to = check_state(ParseInt(fields[2], line_no));
      out.AddEdge(from, sym, to);
    } else if (fields.size() == 1) {
      out.set_final(check_state(ParseInt(fields[0], line_no)));
    } else {
      throw Error(Stage::kIo, "automaton line " + std::to_string(line_no) +
                                  ": expected 1 or 3 fields");
    }
  }
  if (!have_header) throw Error(Stage::kIo, "automaton: empty input");
  return out;
}

}  // namespace lmre
