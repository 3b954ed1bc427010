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


#include "lmre/query.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

namespace lmre {
namespace {

void Validate(const QuerySpec& spec) {
  if (spec.max_tokens == 0) throw Error(Stage::kCompile, "max_tokens must be positive");
  if (spec.frontier_cap == 0) throw Error(Stage::kCompile, "frontier_cap must be positive");
  if (spec.retry_budget == 0) throw Error(Stage::kCompile, "retry_budget must be positive");
  if (spec.rule.kind == DecisionRule::Kind::kTopK && spec.rule.k == 0) {
    throw Error(Stage::kCompile, "top_k must be positive");
  }
  for (const PreprocessorSpec& p : spec.preprocessors) {
    if (p.kind == PreprocessorSpec::Kind::kLevenshtein && p.distance < 1) {
      throw Error(Stage::kCompile, "levenshtein distance must be at least 1");
    }
  }
}

// Splits the query into prefix and suffix patterns.
std::string SuffixPattern(const QuerySpec& spec) {
  if (spec.prefix.empty()) return spec.pattern;
  if (spec.pattern.compare(0, spec.prefix.size(), spec.prefix) == 0) {
    std::string rest = spec.pattern.substr(spec.prefix.size());
    try {
      ParseRegex(rest);
    } catch (const Error& e) {
      throw Error(Stage::kParse, "prefix is not a factor of the pattern: the remainder '" +
                                     rest + "' does not parse (" + e.what() + ")");
    }
    return rest;
  }
  if (spec.pattern.find(spec.prefix) != std::string::npos) {
    throw Error(Stage::kParse,
                "prefix is not a factor of the pattern: it occurs only after the start");
  }
  return spec.pattern;
}

bool Applies(Scope scope, bool is_prefix) {
  return scope == Scope::kBoth || (scope == Scope::kPrefix) == is_prefix;
}

std::uint64_t Fnv1a(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

// Everything that determines a region's preprocessed byte automaton.
std::string CacheKeyText(const QuerySpec& spec, const std::string& pattern, bool is_prefix) {
  std::ostringstream os;
  os << "lmre-region v1\n" << pattern << "\n" << is_prefix << "\n" << spec.state_cap << "\n";
  for (const PreprocessorSpec& p : spec.preprocessors) {
    os << static_cast<int>(p.kind) << ' ' << static_cast<int>(p.scope) << ' ' << p.distance
       << ' ' << p.alphabet.to_string() << ' ' << static_cast<int>(p.mode) << '\n';
    if (p.kind == PreprocessorSpec::Kind::kFilter) os << Serialize(p.deny);
  }
  return os.str();
}

struct CachedRegion {
  Automaton bytes;
  std::vector<Automaton> deferred;
  std::size_t edit_distance;
};

std::filesystem::path CachePath(const QuerySpec& spec, const std::string& key) {
  char name[32];
  std::snprintf(name, sizeof(name), "%016llx.region",
                static_cast<unsigned long long>(Fnv1a(key)));
  return std::filesystem::path(spec.cache_dir) / name;
}

// Cache file: the key text's length and bytes (to rule out hash collisions),
// the edit distance, the number of deferred automata, then length-prefixed
// serialized automata (bytes first).
std::optional<CachedRegion> LoadCached(const QuerySpec& spec, const std::string& key) {
  std::ifstream in(CachePath(spec, key), std::ios::binary);
  if (!in) return std::nullopt;
  std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::istringstream is(contents);
  auto read_blob = [&is]() -> std::optional<std::string> {
    std::size_t n = 0;
    if (!(is >> n) || is.get() != '\n') return std::nullopt;
    std::string blob(n, '\0');
    if (!is.read(blob.data(), static_cast<std::streamsize>(n))) return std::nullopt;
    return blob;
  };
  try {
    auto stored_key = read_blob();
    if (!stored_key || *stored_key != key) return std::nullopt;
    CachedRegion region;
    std::size_t deferred = 0;
    if (!(is >> region.edit_distance >> deferred)) return std::nullopt;
    auto bytes = read_blob();
    if (!bytes) return std::nullopt;
    region.bytes = ParseAutomaton(*bytes);
    for (std::size_t i = 0; i < deferred; ++i) {
      auto blob = read_blob();
      if (!blob) return std::nullopt;
      region.deferred.push_back(ParseAutomaton(*blob));
    }
    return region;
  } catch (const Error&) {
    return std::nullopt;  // a corrupt entry is recomputed
  }
}

void StoreCached(const QuerySpec& spec, const std::string& key, const QueryRegion& region) {
  std::error_code ec;
  std::filesystem::create_directories(spec.cache_dir, ec);
  std::ostringstream os;
  auto blob = [&os](const std::string& b) { os << b.size() << '\n' << b; };
  blob(key);
  os << region.edit_distance << ' ' << region.deferred_deny.size() << '\n';
  blob(Serialize(region.bytes));
  for (const Automaton& a : region.deferred_deny) blob(Serialize(a));
  // Write then rename so concurrent readers never see a partial entry.
  std::filesystem::path path = CachePath(spec, key);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) return;  // caching is best effort
    out << os.str();
  }
  std::filesystem::rename(tmp, path, ec);
}

QueryRegion CompileRegion(const QuerySpec& spec, const std::string& pattern,
                          bool is_prefix, const Vocabulary& vocab) {
  QueryRegion region;
  region.pattern = pattern;
  region.source = pattern.empty() ? Automaton::EmptyString(AlphabetKind::kByte)
                                  : CompileRegex(pattern, spec.state_cap);
  region.bytes = region.source;
  const std::string key = spec.cache_dir.empty() ? "" : CacheKeyText(spec, pattern, is_prefix);
  std::optional<CachedRegion> cached;
  if (!key.empty()) cached = LoadCached(spec, key);
  if (cached) {
    region.bytes = std::move(cached->bytes);
    region.deferred_deny = std::move(cached->deferred);
    region.edit_distance = cached->edit_distance;
  }
  // An absent prefix stays absent: expanding it would invent conditioning
  // text.
  const bool active = !(is_prefix && pattern.empty());
  for (const PreprocessorSpec& p : spec.preprocessors) {
    if (cached || !active || !Applies(p.scope, is_prefix)) continue;
    if (p.kind == PreprocessorSpec::Kind::kLevenshtein) {
      region.bytes = LevenshteinExpand(region.bytes, p.alphabet, p.distance, spec.state_cap);
      region.edit_distance += static_cast<std::size_t>(p.distance);
    } else {
      FilterResult f = FilterStrings(region.bytes, p.deny, p.mode, spec.state_cap);
      region.bytes = std::move(f.automaton);
      if (f.deferred_deny) region.deferred_deny.push_back(std::move(*f.deferred_deny));
    }
  }
  if (!key.empty() && !cached) StoreCached(spec, key, region);
  region.tokens = std::make_shared<const TokenAutomaton>(
      CompileTokens(region.bytes, vocab, spec.encoding, spec.canonical_strategy,
                    spec.enumerate_budget));
  return region;
}

}  // namespace

PreprocessorSpec PreprocessorSpec::Levenshtein(int distance, Scope scope) {
  PreprocessorSpec p;
  p.kind = Kind::kLevenshtein;
  p.distance = distance;
  p.scope = scope;
  return p;
}

PreprocessorSpec PreprocessorSpec::Filter(Automaton deny, FilterMode mode, Scope scope) {
  PreprocessorSpec p;
  p.kind = Kind::kFilter;
  p.deny = std::move(deny);
  p.mode = mode;
  p.scope = scope;
  return p;
}

Query BuildQuery(const QuerySpec& spec, std::shared_ptr<const Vocabulary> vocab) {
  if (!vocab) throw Error(Stage::kModel, "query needs a vocabulary");
  Validate(spec);
  Query q;
  q.spec_ = spec;
  q.vocab_ = std::move(vocab);
  const std::string suffix = SuffixPattern(spec);
  for (const PatternWarning& w : LintPattern(spec.prefix)) q.warnings_.push_back(w);
  for (const PatternWarning& w : LintPattern(spec.pattern)) q.warnings_.push_back(w);
  q.prefix_ = CompileRegion(spec, spec.prefix, true, *q.vocab_);
  q.suffix_ = CompileRegion(spec, suffix, false, *q.vocab_);
  if (spec.traversal == Traversal::kRandom) {
    q.prefix_walks_ = std::make_shared<const WalkCountTable>(q.prefix_.tokens->automaton,
                                                             spec.max_tokens);
  }
  return q;
}

ResultStream::ResultStream(const Query& query, const LanguageModel& model)
    : query_(&query), model_(&model) {}

ResultStream::~ResultStream() = default;
ResultStream::ResultStream(ResultStream&&) noexcept = default;

TraversalStats ResultStream::stats() const {
  return source_ ? source_->stats() : TraversalStats{};
}

void ResultStream::Annotate(MatchResult& r) const {
  const std::string_view text(r.text);
  const QueryRegion* regions[2] = {&query_->prefix(), &query_->suffix()};
  const std::string_view parts[2] = {text.substr(0, r.prefix_text_len),
                                     text.substr(r.prefix_text_len)};
  for (int i = 0; i < 2; ++i) {
    if (regions[i]->edit_distance == 0) continue;
    auto alignment = AlignEdits(regions[i]->source, parts[i], regions[i]->edit_distance);
    if (!alignment) continue;
    r.n_edits += alignment->distance;
    for (std::size_t pos : alignment->positions) {
      r.edit_positions.push_back(pos + (i == 1 ? r.prefix_text_len : 0));
    }
  }
}

std::optional<MatchResult> ResultStream::Next() {
  if (done_ || produced_ >= query_->spec().max_results) return std::nullopt;
  try {
    if (!source_) {
      const Vocabulary& ours = *query_->vocab();
      if (&model_->vocab() != &ours && !(model_->vocab() == ours)) {
        throw Error(Stage::kModel, "the model's vocabulary differs from the query's");
      }
      const QuerySpec& spec = query_->spec();
      TraversalOptions options;
      options.rule = spec.rule;
      options.max_tokens = spec.max_tokens;
      options.frontier_cap = spec.frontier_cap;
      options.retry_budget = spec.retry_budget;
      options.require_eos = spec.require_eos;
      options.exempt_eos = spec.exempt_eos;
      options.zero_cost_prefix = spec.zero_cost_prefix;
      options.prefix_weighting = spec.prefix_weighting;
      options.suffix_sampling = spec.suffix_sampling;
      const Query* q = query_;
      if (!q->prefix().deferred_deny.empty() || !q->suffix().deferred_deny.empty()) {
        options.accept = [q](std::string_view head, std::string_view tail) {
          for (const Automaton& deny : q->prefix().deferred_deny) {
            if (deny.Accepts(head)) return false;
          }
          for (const Automaton& deny : q->suffix().deferred_deny) {
            if (deny.Accepts(tail)) return false;
          }
          return true;
        };
      }
      if (spec.traversal == Traversal::kShortest) {
        source_ = std::make_unique<ShortestPathSearch>(q->prefix().tokens, q->suffix().tokens,
                                                       *model_, options);
      } else {
        source_ = std::make_unique<RandomSampler>(q->prefix().tokens, q->suffix().tokens,
                                                  *model_, options, spec.seed,
                                                  q->prefix_walks());
      }
    }
    std::optional<MatchResult> r = source_->Next();
    if (!r) {
      done_ = true;
      return std::nullopt;
    }
    Annotate(*r);
    ++produced_;
    return r;
  } catch (const Error& e) {
    error_ = e;
  } catch (const std::exception& e) {
    error_ = Error(Stage::kExec, e.what());
  }
  done_ = true;
  return std::nullopt;
}

ResultStream Execute(const Query& query, const LanguageModel& model) {
  return ResultStream(query, model);
}

}  // namespace lmre
