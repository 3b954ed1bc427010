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

#include "lmre/vocabulary.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "lmre/error.h"

namespace lmre {
namespace {

std::vector<std::string> ByteTokens() {
  std::vector<std::string> tokens;
  tokens.reserve(256);
  for (int b = 0; b < 256; ++b) tokens.emplace_back(1, static_cast<char>(b));
  return tokens;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Stage::kIo, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Stage::kIo, "cannot write " + path);
  out << text;
  if (!out) throw Error(Stage::kIo, "write failed for " + path);
}

std::vector<std::string_view> Lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

long long ParseId(std::string_view s, const char* what) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(Stage::kIo, std::string(what) + ": bad integer '" + std::string(s) + "'");
  }
  return v;
}

int HexValue(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

// Merges every non-overlapping occurrence of (left, right), left to right.
void ApplyMerge(TokenSequence& seq, TokenId left, TokenId right, TokenId result) {
  std::size_t out = 0;
  for (std::size_t i = 0; i < seq.size();) {
    if (i + 1 < seq.size() && seq[i] == left && seq[i + 1] == right) {
      seq[out++] = result;
      i += 2;
    } else {
      seq[out++] = seq[i++];
    }
  }
  seq.resize(out);
}

}  // namespace

Vocabulary::Vocabulary() : tokens_(ByteTokens()) {
  tokens_.emplace_back();  // EOS
  Index();
}

Vocabulary::Vocabulary(std::vector<std::string> tokens,
                       const std::vector<std::pair<TokenId, TokenId>>& merges)
    : tokens_(std::move(tokens)), pair_list_(merges) {
  if (tokens_.size() < 256) {
    throw Error(Stage::kModel, "vocabulary needs the 256 byte tokens");
  }
  for (int b = 0; b < 256; ++b) {
    if (tokens_[b].size() != 1 || static_cast<unsigned char>(tokens_[b][0]) != b) {
      throw Error(Stage::kModel, "token " + std::to_string(b) + " must be byte " +
                                     std::to_string(b));
    }
  }
  tokens_.emplace_back();  // EOS
  Index();
}

void Vocabulary::Index() {
  by_bytes_.clear();
  rank_.clear();
  merges_.clear();
  max_token_length_ = 1;
  for (std::size_t id = 0; id + 1 < tokens_.size(); ++id) {
    const std::string& t = tokens_[id];
    if (t.empty()) throw Error(Stage::kModel, "empty regular token " + std::to_string(id));
    if (!by_bytes_.emplace(t, static_cast<TokenId>(id)).second) {
      throw Error(Stage::kModel, "duplicate token bytes for id " + std::to_string(id));
    }
    max_token_length_ = std::max(max_token_length_, t.size());
  }
  const auto regular = static_cast<TokenId>(tokens_.size() - 1);
  for (const auto& [left, right] : pair_list_) {
    if (left < 0 || right < 0 || left >= regular || right >= regular) {
      throw Error(Stage::kModel, "merge references unknown token");
    }
    auto it = by_bytes_.find(tokens_[left] + tokens_[right]);
    if (it == by_bytes_.end()) {
      throw Error(Stage::kModel, "merge (" + std::to_string(left) + ", " +
                                     std::to_string(right) + ") has no result token");
    }
    if (rank_.emplace(std::make_pair(left, right), merges_.size()).second) {
      merges_.push_back({left, right, it->second});
    }
  }
}

Vocabulary Vocabulary::WithTokens(const std::vector<std::string>& extra) {
  std::vector<std::string> tokens = ByteTokens();
  std::unordered_map<std::string, TokenId> known;
  for (int b = 0; b < 256; ++b) known.emplace(tokens[b], b);
  std::vector<std::pair<TokenId, TokenId>> merges;
  for (const std::string& t : extra) {
    if (t.size() < 2 || known.count(t)) {
      throw Error(Stage::kModel, "extra token '" + t + "' must be new and multi-byte");
    }
    for (std::size_t split = t.size() - 1; split >= 1; --split) {
      auto l = known.find(t.substr(0, split));
      auto r = known.find(t.substr(split));
      if (l != known.end() && r != known.end()) {
        merges.emplace_back(l->second, r->second);
        break;
      }
    }
    known.emplace(t, static_cast<TokenId>(tokens.size()));
    tokens.push_back(t);
  }
  return Vocabulary(std::move(tokens), merges);
}

std::optional<TokenId> Vocabulary::Find(std::string_view bytes) const {
  auto it = by_bytes_.find(std::string(bytes));
  if (it == by_bytes_.end()) return std::nullopt;
  return it->second;
}

TokenSequence Vocabulary::Encode(std::string_view text) const {
  TokenSequence seq;
  seq.reserve(text.size());
  for (char c : text) seq.push_back(static_cast<unsigned char>(c));
  while (seq.size() >= 2) {
    std::size_t best_rank = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      auto it = rank_.find({seq[i], seq[i + 1]});
      if (it != rank_.end() && it->second < best_rank) best_rank = it->second;
    }
    if (best_rank == std::numeric_limits<std::size_t>::max()) break;
    const Merge& m = merges_[best_rank];
    ApplyMerge(seq, m.left, m.right, m.result);
  }
  return seq;
}

std::string Vocabulary::Decode(std::span<const TokenId> tokens) const {
  std::string out;
  for (TokenId t : tokens) {
    if (t < 0 || static_cast<std::size_t>(t) >= tokens_.size()) {
      throw Error(Stage::kModel, "unknown token id " + std::to_string(t));
    }
    out += tokens_[t];
  }
  return out;
}

bool Vocabulary::IsCanonical(std::span<const TokenId> tokens) const {
  if (std::find(tokens.begin(), tokens.end(), eos()) != tokens.end()) return false;
  TokenSequence canonical = Encode(Decode(tokens));
  return std::equal(canonical.begin(), canonical.end(), tokens.begin(), tokens.end());
}

std::vector<TokenSequence> Vocabulary::AllTokenizations(std::string_view text,
                                                        std::size_t limit) const {
  if (text.size() > limit) {
    throw Error(Stage::kCompile, "string of length " + std::to_string(text.size()) +
                                     " exceeds tokenization oracle limit " +
                                     std::to_string(limit));
  }
  // Candidate token ids starting at each position, ascending.
  std::vector<std::vector<std::pair<TokenId, std::size_t>>> starts(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    for (std::size_t len = 1; len <= max_token_length_ && i + len <= text.size(); ++len) {
      if (auto id = Find(text.substr(i, len))) starts[i].emplace_back(*id, len);
    }
    std::sort(starts[i].begin(), starts[i].end());
  }
  std::vector<TokenSequence> out;
  TokenSequence current;
  auto dfs = [&](auto&& self, std::size_t pos) -> void {
    if (pos == text.size()) {
      out.push_back(current);
      return;
    }
    for (const auto& [id, len] : starts[pos]) {
      current.push_back(id);
      self(self, pos + len);
      current.pop_back();
    }
  };
  dfs(dfs, 0);
  return out;
}

std::string Vocabulary::Render(TokenId id) const {
  if (id == eos()) return "<eos>";
  std::string out;
  for (char c : bytes(id)) {
    auto b = static_cast<unsigned char>(c);
    if (b == ' ') {
      out += "\xC4\xA0";  // Ġ
    } else if (b >= 0x21 && b < 0x7f) {
      out.push_back(c);
    } else {
      char buf[8];
      std::snprintf(buf, sizeof(buf), "\\x%02X", b);
      out += buf;
    }
  }
  return out;
}

std::string Vocabulary::TokensFileText() const {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (std::size_t id = 0; id < tokens_.size(); ++id) {
    out += std::to_string(id);
    out.push_back('\t');
    for (char c : tokens_[id]) {
      auto b = static_cast<unsigned char>(c);
      out.push_back(kHex[b >> 4]);
      out.push_back(kHex[b & 0xF]);
    }
    out.push_back('\n');
  }
  return out;
}

std::string Vocabulary::MergesFileText() const {
  std::string out;
  for (const auto& [left, right] : pair_list_) {
    out += std::to_string(left) + '\t' + std::to_string(right) + '\n';
  }
  return out;
}

Vocabulary Vocabulary::FromFileText(std::string_view tokens_text,
                                    std::string_view merges_text) {
  std::vector<std::string> tokens;
  bool saw_eos = false;
  for (std::string_view line : Lines(tokens_text)) {
    if (line.empty()) continue;
    if (saw_eos) throw Error(Stage::kIo, "tokens file: EOS must be the last token");
    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) throw Error(Stage::kIo, "tokens file: missing tab");
    long long id = ParseId(line.substr(0, tab), "tokens file");
    if (id != static_cast<long long>(tokens.size())) {
      throw Error(Stage::kIo, "tokens file: ids must be dense and ordered");
    }
    std::string_view hex = line.substr(tab + 1);
    if (hex.size() % 2) throw Error(Stage::kIo, "tokens file: odd hex length");
    std::string bytes;
    for (std::size_t i = 0; i < hex.size(); i += 2) {
      int hi = HexValue(hex[i]), lo = HexValue(hex[i + 1]);
      if (hi < 0 || lo < 0) throw Error(Stage::kIo, "tokens file: bad hex");
      bytes.push_back(static_cast<char>(hi * 16 + lo));
    }
    if (bytes.empty()) {
      saw_eos = true;
      continue;
    }
    tokens.push_back(std::move(bytes));
  }
  if (!saw_eos) throw Error(Stage::kIo, "tokens file: no EOS token");
  std::vector<std::pair<TokenId, TokenId>> merges;
  for (std::string_view line : Lines(merges_text)) {
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) throw Error(Stage::kIo, "merges file: missing tab");
    merges.emplace_back(static_cast<TokenId>(ParseId(line.substr(0, tab), "merges file")),
                        static_cast<TokenId>(ParseId(line.substr(tab + 1), "merges file")));
  }
  return Vocabulary(std::move(tokens), merges);
}

void Vocabulary::Save(const std::string& tokens_path,
                      const std::string& merges_path) const {
  WriteFile(tokens_path, TokensFileText());
  WriteFile(merges_path, MergesFileText());
}

Vocabulary Vocabulary::Load(const std::string& tokens_path,
                            const std::string& merges_path) {
  return FromFileText(ReadFile(tokens_path), ReadFile(merges_path));
}

Vocabulary TrainBpe(std::string_view corpus, std::size_t target_size) {
  if (target_size < 256) throw Error(Stage::kModel, "target vocabulary size must be >= 256");
  std::vector<TokenSequence> sequences;
  for (std::string_view line : Lines(corpus)) {
    if (line.empty()) continue;
    TokenSequence seq;
    for (char c : line) seq.push_back(static_cast<unsigned char>(c));
    sequences.push_back(std::move(seq));
  }
  if (sequences.empty()) throw Error(Stage::kModel, "empty training corpus");

  std::vector<std::string> tokens = ByteTokens();
  std::unordered_map<std::string, TokenId> known;
  for (int b = 0; b < 256; ++b) known.emplace(tokens[b], b);
  std::vector<std::pair<TokenId, TokenId>> merges;
  std::map<std::pair<TokenId, TokenId>, bool> used;

  while (tokens.size() < target_size) {
    std::map<std::pair<TokenId, TokenId>, std::size_t> counts;
    for (const TokenSequence& seq : sequences) {
      for (std::size_t i = 0; i + 1 < seq.size(); ++i) ++counts[{seq[i], seq[i + 1]}];
    }
    if (counts.empty()) break;
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it) {
      if (it->second > best->second) {
        best = it;
      } else if (it->second == best->second) {
        const auto& [l, r] = it->first;
        const auto& [bl, br] = best->first;
        if (std::tie(tokens[l], tokens[r]) < std::tie(tokens[bl], tokens[br])) best = it;
      }
    }
    auto [left, right] = best->first;
    std::string joined = tokens[left] + tokens[right];
    TokenId result;
    if (auto it = known.find(joined); it != known.end()) {
      result = it->second;
    } else {
      result = static_cast<TokenId>(tokens.size());
      known.emplace(joined, result);
      tokens.push_back(joined);
    }
    if (!used[{left, right}]) {
      used[{left, right}] = true;
      merges.emplace_back(left, right);
    }
    for (TokenSequence& seq : sequences) ApplyMerge(seq, left, right, result);
  }
  return Vocabulary(std::move(tokens), merges);
}

}  // namespace lmre
