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

// Byte-level BPE vocabulary: canonical encoding by ranked merges, decoding,
// and an exhaustive all-tokenizations oracle.

#ifndef LMRE_VOCABULARY_H_
#define LMRE_VOCABULARY_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lmre {

using TokenId = std::int32_t;
using TokenSequence = std::vector<TokenId>;

struct Merge {
  TokenId left;
  TokenId right;
  TokenId result;
};

inline constexpr std::size_t kDefaultTokenizationLimit = 16;

// Token ids are dense. Ids 0..255 are the single bytes, then multi-byte
// tokens, and the last id is the end-of-sequence token (empty byte string).
class Vocabulary {
 public:
  // 256 byte tokens plus EOS.
  Vocabulary();

  // `tokens` are the regular tokens (the first 256 must be the single bytes
  // in order); `merges` are ordered (left, right) pairs whose concatenation
  // must already be a token. EOS is appended.
  Vocabulary(std::vector<std::string> tokens,
             const std::vector<std::pair<TokenId, TokenId>>& merges);

  // Convenience for toy vocabularies: all bytes plus `extra` multi-byte
  // tokens, with merges derived for each extra token from the longest
  // existing prefix split, in the order given.
  static Vocabulary WithTokens(const std::vector<std::string>& extra);

  std::size_t size() const { return tokens_.size(); }
  TokenId eos() const { return static_cast<TokenId>(tokens_.size() - 1); }
  const std::string& bytes(TokenId id) const { return tokens_.at(id); }
  std::optional<TokenId> Find(std::string_view bytes) const;
  const std::vector<Merge>& merges() const { return merges_; }
  std::size_t max_token_length() const { return max_token_length_; }

  // Canonical BPE encoding: repeatedly merge the lowest-ranked adjacent pair.
  TokenSequence Encode(std::string_view text) const;
  // Throws Error(kModel) on an unknown id. EOS decodes to nothing.
  std::string Decode(std::span<const TokenId> tokens) const;
  bool IsCanonical(std::span<const TokenId> tokens) const;

  // Every token sequence (EOS excluded) that decodes to `text`, in
  // lexicographic order.
  std::vector<TokenSequence> AllTokenizations(
      std::string_view text, std::size_t limit = kDefaultTokenizationLimit) const;

  // Printable form: a leading/embedded space renders as "Ġ", other
  // non-printable bytes as \xHH, EOS as <eos>.
  std::string Render(TokenId id) const;

  // tokens file: "id<TAB>hex" per line (EOS has empty hex);
  // merges file: "left<TAB>right" per line in rank order.
  std::string TokensFileText() const;
  std::string MergesFileText() const;
  static Vocabulary FromFileText(std::string_view tokens_text,
                                 std::string_view merges_text);
  void Save(const std::string& tokens_path, const std::string& merges_path) const;
  static Vocabulary Load(const std::string& tokens_path,
                         const std::string& merges_path);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.pair_list_ == b.pair_list_;
  }

 private:
  void Index();

  std::vector<std::string> tokens_;
  std::vector<std::pair<TokenId, TokenId>> pair_list_;
  std::vector<Merge> merges_;
  std::unordered_map<std::string, TokenId> by_bytes_;
  std::map<std::pair<TokenId, TokenId>, std::size_t> rank_;
  std::size_t max_token_length_ = 1;
};

// Greedy BPE training on newline-separated text: merge the most frequent
// adjacent pair (ties: lexicographically smallest byte strings) until the
// vocabulary has `target_size` regular tokens or no pair remains.
// `target_size` excludes EOS and must be >= 256.
Vocabulary TrainBpe(std::string_view corpus, std::size_t target_size);

}  // namespace lmre

#endif  // LMRE_VOCABULARY_H_
