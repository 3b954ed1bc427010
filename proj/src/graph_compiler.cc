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


#include "lmre/graph_compiler.h"

#include <map>
#include <string>

#include "lmre/error.h"

namespace lmre {
namespace {

// Byte trie over the multi-byte tokens, so all shortcut edges leaving a state
// are found in one joint walk of the trie and the automaton.
struct TokenTrie {
  struct Node {
    std::map<unsigned char, int> children;
    TokenId token = -1;
  };
  std::vector<Node> nodes{Node{}};

  explicit TokenTrie(const Vocabulary& vocab) {
    for (TokenId id = 256; id < vocab.eos(); ++id) {
      int node = 0;
      for (char c : vocab.bytes(id)) {
        auto b = static_cast<unsigned char>(c);
        auto it = nodes[node].children.find(b);
        if (it == nodes[node].children.end()) {
          it = nodes[node].children.emplace(b, static_cast<int>(nodes.size())).first;
          nodes.emplace_back();
        }
        node = it->second;
      }
      nodes[node].token = id;
    }
  }
};

void RequireDeterministic(const Automaton& a) {
  if (a.kind() != AlphabetKind::kByte) {
    throw Error(Stage::kCompile, "token compilation needs a byte automaton");
  }
  if (!a.IsDeterministic()) {
    throw Error(Stage::kCompile, "token compilation needs a deterministic automaton");
  }
}

}  // namespace

std::vector<std::pair<StateId, StateId>> GetConnectingWalks(const Automaton& a,
                                                            std::string_view word) {
  std::vector<std::pair<StateId, StateId>> walks;
  for (std::size_t u = 0; u < a.num_states(); ++u) {
    StateId s = static_cast<StateId>(u);
    for (char c : word) {
      s = a.Next(s, static_cast<unsigned char>(c));
      if (s < 0) break;
    }
    if (s >= 0) walks.emplace_back(static_cast<StateId>(u), s);
  }
  return walks;
}

TokenAutomaton CompileFull(const Automaton& a, const Vocabulary& vocab,
                           std::size_t edge_cap) {
  RequireDeterministic(a);
  TokenAutomaton out;
  out.mode = EncodingMode::kFull;
  Automaton& t = out.automaton;
  for (std::size_t s = 0; s < a.num_states(); ++s) {
    t.AddState(a.is_final(static_cast<StateId>(s)));
    out.byte_state.push_back(static_cast<StateId>(s));
  }
  t.set_initial(a.initial());
  std::size_t edges = 0;
  for (std::size_t s = 0; s < a.num_states(); ++s) {
    for (const Edge& e : a.edges(static_cast<StateId>(s))) {
      // Byte b is token id b.
      t.AddEdge(static_cast<StateId>(s), e.symbol, e.target);
      ++edges;
    }
  }
  const TokenTrie trie(vocab);
  struct Frame {
    int node;
    StateId state;
  };
  std::vector<Frame> stack;
  for (std::size_t u = 0; u < a.num_states(); ++u) {
    stack.push_back({0, static_cast<StateId>(u)});
    while (!stack.empty()) {
      Frame f = stack.back();
      stack.pop_back();
      const auto& node = trie.nodes[f.node];
      if (node.token >= 0) {
        t.AddEdge(static_cast<StateId>(u), node.token, f.state);
        if (++edges > edge_cap) {
          throw Error(Stage::kCompile, "token automaton exceeds edge cap of " +
                                           std::to_string(edge_cap));
        }
      }
      for (const auto& [byte, child] : node.children) {
        StateId next = a.Next(f.state, byte);
        if (next >= 0) stack.push_back({child, next});
      }
    }
  }
  return out;
}

TokenAutomaton CompileCanonical(const Automaton& a, const Vocabulary& vocab,
                                CanonicalStrategy strategy, std::size_t budget) {
  RequireDeterministic(a);
  if (strategy == CanonicalStrategy::kAuto) {
    strategy = IsFinite(a) && Enumerate(a, budget + 1).exhausted
                   ? CanonicalStrategy::kEnumerate
                   : CanonicalStrategy::kRuntimeFilter;
  }
  if (strategy == CanonicalStrategy::kRuntimeFilter) {
    TokenAutomaton out = CompileFull(a, vocab);
    out.mode = EncodingMode::kCanonical;
    out.strategy = CanonicalStrategy::kRuntimeFilter;
    out.runtime_filter = true;
    return out;
  }
  if (!IsFinite(a)) {
    throw Error(Stage::kCompile,
                "canonical enumeration needs a finite language; use the runtime filter");
  }
  Enumeration strings = Enumerate(a, budget + 1);
  if (!strings.exhausted || strings.strings.size() > budget) {
    throw Error(Stage::kCompile,
                "canonical enumeration needs a finite language of at most " +
                    std::to_string(budget) + " strings; use the runtime filter");
  }
  Automaton trie(AlphabetKind::kToken);
  trie.AddState(false);
  for (const auto& word : strings.strings) {
    StateId s = trie.initial();
    for (TokenId id : vocab.Encode(SymbolsToBytes(word))) {
      StateId next = trie.Next(s, id);
      if (next < 0) {
        next = trie.AddState(false);
        trie.AddEdge(s, id, next);
      }
      s = next;
    }
    trie.set_final(s);
  }
  TokenAutomaton out;
  out.automaton = Minimize(trie);
  out.mode = EncodingMode::kCanonical;
  out.strategy = CanonicalStrategy::kEnumerate;
  return out;
}

TokenAutomaton CompileTokens(const Automaton& a, const Vocabulary& vocab,
                             EncodingMode mode, CanonicalStrategy strategy,
                             std::size_t budget) {
  return mode == EncodingMode::kFull ? CompileFull(a, vocab)
                                     : CompileCanonical(a, vocab, strategy, budget);
}

SymbolLabeler TokenLabeler(const Vocabulary& vocab) {
  return [&vocab](Symbol sym) {
    if (sym < 0 || static_cast<std::size_t>(sym) >= vocab.size()) {
      return std::to_string(sym);
    }
    return vocab.Render(sym);
  };
}

}  // namespace lmre
