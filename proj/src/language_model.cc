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


#include "lmre/language_model.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "lmre/error.h"

namespace lmre {
namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

void CheckLength(const LanguageModel& m, std::size_t length) {
  if (length >= m.max_sequence_length()) {
    throw Error(Stage::kModel, "context of " + std::to_string(length) +
                                   " tokens reaches the model's maximum of " +
                                   std::to_string(m.max_sequence_length()));
  }
}

std::vector<std::string_view> Split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = text.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(text.substr(pos));
      return out;
    }
    out.push_back(text.substr(pos, next - pos));
    pos = next + 1;
  }
}

template <typename T>
T ParseNumber(std::string_view s) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(Stage::kIo, "model file: bad number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<TokenId> ApplyRule(std::span<const double> dist, const DecisionRule& rule) {
  std::vector<TokenId> ids;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] > 0) ids.push_back(static_cast<TokenId>(i));
  }
  if (rule.kind == DecisionRule::Kind::kTopK && rule.k < ids.size()) {
    auto by_prob = [&](TokenId a, TokenId b) {
      return dist[a] != dist[b] ? dist[a] > dist[b] : a < b;
    };
    std::nth_element(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(rule.k),
                     ids.end(), by_prob);
    ids.resize(rule.k);
    std::sort(ids.begin(), ids.end());
  }
  return ids;
}

std::vector<char> AdmissibleMask(std::span<const double> dist, const DecisionRule& rule) {
  std::vector<char> mask(dist.size(), 0);
  for (TokenId id : ApplyRule(dist, rule)) mask[id] = 1;
  return mask;
}

std::optional<double> SequenceLogProb(const LanguageModel& m,
                                      std::span<const TokenId> tokens,
                                      const DecisionRule& rule,
                                      const ScoringOptions& options) {
  std::vector<TokenId> steps(tokens.begin(), tokens.end());
  if (options.require_eos) steps.push_back(m.eos());
  if (steps.size() > m.max_sequence_length()) {
    throw Error(Stage::kModel, "sequence of " + std::to_string(steps.size()) +
                                   " tokens exceeds the model's maximum");
  }
  double total = 0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    std::vector<double> dist =
        m.NextDistribution(std::span<const TokenId>(steps.data(), i));
    TokenId t = steps[i];
    if (t < 0 || static_cast<std::size_t>(t) >= dist.size() || dist[t] <= 0) {
      return std::nullopt;
    }
    bool is_final_eos = options.require_eos && i + 1 == steps.size();
    bool exempt = i < options.prefix_len || (is_final_eos && options.exempt_eos);
    if (!exempt && rule.kind == DecisionRule::Kind::kTopK) {
      std::vector<TokenId> admissible = ApplyRule(dist, rule);
      if (!std::binary_search(admissible.begin(), admissible.end(), t)) {
        return std::nullopt;
      }
    }
    total += std::log(dist[t]);
  }
  return total;
}

NGramLM::NGramLM(std::shared_ptr<const Vocabulary> vocab, std::size_t order,
                 double alpha, std::size_t max_sequence_length)
    : vocab_(std::move(vocab)),
      order_(order),
      alpha_(alpha),
      max_length_(max_sequence_length) {
  if (order_ == 0) throw Error(Stage::kModel, "n-gram order must be at least 1");
  if (!(alpha_ >= 0)) throw Error(Stage::kModel, "smoothing alpha must be >= 0");
}

std::vector<TokenId> NGramLM::Context(std::span<const TokenId> prefix) const {
  std::vector<TokenId> ctx(order_ - 1, vocab_->eos());
  std::size_t take = std::min(prefix.size(), order_ - 1);
  std::copy(prefix.end() - static_cast<std::ptrdiff_t>(take), prefix.end(),
            ctx.end() - static_cast<std::ptrdiff_t>(take));
  return ctx;
}

void NGramLM::TrainSequence(std::span<const TokenId> tokens) {
  std::vector<TokenId> seq(tokens.begin(), tokens.end());
  seq.push_back(vocab_->eos());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    Row& row = rows_[Context(std::span<const TokenId>(seq.data(), i))];
    ++row.total;
    ++row.counts[seq[i]];
  }
}

void NGramLM::Train(std::string_view corpus) {
  std::size_t pos = 0;
  while (pos < corpus.size()) {
    std::size_t nl = corpus.find('\n', pos);
    if (nl == std::string_view::npos) nl = corpus.size();
    std::string_view line = corpus.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) TrainSequence(vocab_->Encode(line));
    pos = nl + 1;
  }
}

std::vector<double> NGramLM::NextDistribution(std::span<const TokenId> prefix) const {
  CheckLength(*this, prefix.size());
  const std::size_t v = vocab_->size();
  auto it = rows_.find(Context(prefix));
  if (it == rows_.end() || (alpha_ == 0 && it->second.total == 0)) {
    return std::vector<double>(v, 1.0 / static_cast<double>(v));
  }
  const Row& row = it->second;
  const double denom = static_cast<double>(row.total) + alpha_ * static_cast<double>(v);
  std::vector<double> dist(v, alpha_ / denom);
  for (const auto& [token, count] : row.counts) {
    dist[token] = (static_cast<double>(count) + alpha_) / denom;
  }
  return dist;
}

std::string NGramLM::Serialize() const {
  std::ostringstream os;
  char alpha[64];
  std::snprintf(alpha, sizeof(alpha), "%.17g", alpha_);
  os << "lmre-ngram v1\n"
     << "order\t" << order_ << '\n'
     << "alpha\t" << alpha << '\n'
     << "max_length\t" << max_length_ << '\n'
     << "vocab_size\t" << vocab_->size() << '\n';
  for (const auto& [ctx, row] : rows_) {
    for (std::size_t i = 0; i < ctx.size(); ++i) os << (i ? " " : "") << ctx[i];
    os << '\t';
    bool first = true;
    for (const auto& [token, count] : row.counts) {
      os << (first ? "" : " ") << token << ':' << count;
      first = false;
    }
    os << '\n';
  }
  return os.str();
}

NGramLM NGramLM::Parse(std::shared_ptr<const Vocabulary> vocab, std::string_view text) {
  std::vector<std::string_view> lines = Split(text, '\n');
  if (lines.size() < 5 || lines[0] != "lmre-ngram v1") {
    throw Error(Stage::kIo, "model file: missing 'lmre-ngram v1' header");
  }
  auto field = [&](std::size_t i, std::string_view key) {
    std::vector<std::string_view> parts = Split(lines[i], '\t');
    if (parts.size() != 2 || parts[0] != key) {
      throw Error(Stage::kIo, "model file: expected '" + std::string(key) + "'");
    }
    return parts[1];
  };
  auto order = ParseNumber<std::size_t>(field(1, "order"));
  double alpha = std::stod(std::string(field(2, "alpha")));
  auto max_length = ParseNumber<std::size_t>(field(3, "max_length"));
  auto vocab_size = ParseNumber<std::size_t>(field(4, "vocab_size"));
  if (vocab_size != vocab->size()) {
    throw Error(Stage::kModel, "model was trained with a vocabulary of " +
                                   std::to_string(vocab_size) + " tokens, not " +
                                   std::to_string(vocab->size()));
  }
  NGramLM lm(std::move(vocab), order, alpha, max_length);
  for (std::size_t i = 5; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string_view> parts = Split(lines[i], '\t');
    if (parts.size() != 2) throw Error(Stage::kIo, "model file: malformed row");
    std::vector<TokenId> ctx;
    if (!parts[0].empty()) {
      for (std::string_view id : Split(parts[0], ' ')) ctx.push_back(ParseNumber<TokenId>(id));
    }
    if (ctx.size() + 1 != order) throw Error(Stage::kIo, "model file: context length");
    Row row;
    for (std::string_view entry : Split(parts[1], ' ')) {
      std::size_t colon = entry.find(':');
      if (colon == std::string_view::npos) throw Error(Stage::kIo, "model file: bad count");
      auto token = ParseNumber<TokenId>(entry.substr(0, colon));
      auto count = ParseNumber<std::uint64_t>(entry.substr(colon + 1));
      if (token < 0 || static_cast<std::size_t>(token) >= vocab_size) {
        throw Error(Stage::kIo, "model file: token id out of range");
      }
      row.counts[token] = count;
      row.total += count;
    }
    lm.rows_[std::move(ctx)] = std::move(row);
  }
  return lm;
}

HashLM::HashLM(std::shared_ptr<const Vocabulary> vocab, std::uint64_t seed,
               std::size_t window, double scale, std::size_t max_sequence_length)
    : vocab_(std::move(vocab)),
      seed_(seed),
      window_(window),
      scale_(scale),
      max_length_(max_sequence_length) {}

std::vector<double> HashLM::NextDistribution(std::span<const TokenId> prefix) const {
  CheckLength(*this, prefix.size());
  std::uint64_t h = SplitMix64(seed_);
  std::size_t take = std::min(prefix.size(), window_);
  // Distinguish "short context" from contexts padded with real tokens.
  h = SplitMix64(h ^ take);
  for (std::size_t i = prefix.size() - take; i < prefix.size(); ++i) {
    h = SplitMix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(prefix[i])));
  }
  const std::size_t v = vocab_->size();
  std::vector<double> logits(v);
  for (std::size_t i = 0; i < v; ++i) {
    std::uint64_t r = SplitMix64(h ^ (0xD6E8FEB86659FD93ull * (i + 1)));
    logits[i] = scale_ * static_cast<double>(r >> 11) * 0x1.0p-53;
  }
  double max = *std::max_element(logits.begin(), logits.end());
  double sum = 0;
  for (double& l : logits) {
    l = std::exp(l - max);
    sum += l;
  }
  for (double& l : logits) l /= sum;
  return logits;
}

}  // namespace lmre
