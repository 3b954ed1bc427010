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

#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>

#include "support.h"

namespace lmre {
namespace {

// Wraps a model and counts distribution requests.
class CountingModel : public LanguageModel {
 public:
  explicit CountingModel(const LanguageModel& inner) : inner_(inner) {}
  const Vocabulary& vocab() const override { return inner_.vocab(); }
  std::size_t max_sequence_length() const override { return inner_.max_sequence_length(); }
  std::vector<double> NextDistribution(std::span<const TokenId> prefix) const override {
    ++calls;
    return inner_.NextDistribution(prefix);
  }
  mutable std::atomic<int> calls{0};

 private:
  const LanguageModel& inner_;
};

class QueryTest : public ::testing::Test {
 protected:
  QueryTest()
      : vocab_(std::make_shared<const Vocabulary>(Vocabulary::WithTokens({"th", "the", " a"}))),
        model_(vocab_, 21) {}

  std::vector<MatchResult> Run(const QuerySpec& spec, std::optional<Error>* error = nullptr) {
    Query q = BuildQuery(spec, vocab_);
    ResultStream s = Execute(q, model_);
    std::vector<MatchResult> out;
    while (auto r = s.Next()) out.push_back(std::move(*r));
    if (error) *error = s.error();
    return out;
  }

  std::shared_ptr<const Vocabulary> vocab_;
  HashLM model_;
};

TEST_F(QueryTest, PrefixIsSplitOffThePattern) {
  QuerySpec spec;
  spec.pattern = "the (cat|dog)";
  spec.prefix = "the ";
  Query q = BuildQuery(spec, vocab_);
  EXPECT_EQ(q.prefix().pattern, "the ");
  EXPECT_EQ(q.suffix().pattern, "(cat|dog)");
  auto results = Run(spec);
  ASSERT_EQ(results.size(), 2u);
  for (const auto& r : results) {
    EXPECT_EQ(r.text.substr(0, r.prefix_text_len), "the ");
    EXPECT_TRUE(r.text == "the cat" || r.text == "the dog") << r.text;
    EXPECT_GT(r.prefix_len, 0u);
  }
}

TEST_F(QueryTest, PatternWithoutPrefixIsTheSuffix) {
  QuerySpec spec;
  spec.pattern = "(cat|dog)";
  spec.prefix = "the ";
  Query q = BuildQuery(spec, vocab_);
  EXPECT_EQ(q.suffix().pattern, "(cat|dog)");
  auto results = Run(spec);
  for (const auto& r : results) EXPECT_EQ(r.text.rfind("the ", 0), 0u);
}

TEST_F(QueryTest, PrefixMustBeAFactor) {
  QuerySpec spec;
  spec.pattern = "(the) cat";
  spec.prefix = "(the";
  try {
    BuildQuery(spec, vocab_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.stage(), Stage::kParse);
  }
  spec.pattern = "a the b";
  spec.prefix = "the";
  EXPECT_THROW(BuildQuery(spec, vocab_), Error);
}

TEST_F(QueryTest, InvalidSettingsAreCompileErrors) {
  QuerySpec spec;
  spec.pattern = "a";
  spec.max_tokens = 0;
  try {
    BuildQuery(spec, vocab_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.stage(), Stage::kCompile);
  }
}

TEST_F(QueryTest, WarningsForBareDot) {
  QuerySpec spec;
  spec.pattern = "a.b";
  EXPECT_EQ(BuildQuery(spec, vocab_).warnings().size(), 1u);
}

TEST_F(QueryTest, PrefixEditsAreReported) {
  QuerySpec spec;
  spec.pattern = "the cat";
  spec.prefix = "the ";
  spec.traversal = Traversal::kRandom;
  spec.max_results = 200;
  spec.seed = 4;
  auto lev = PreprocessorSpec::Levenshtein(1, Scope::kPrefix);
  for (std::size_t b = 0; b < 256; ++b) lev.alphabet[b] = (b >= 'a' && b <= 'z') || b == ' ';
  spec.preprocessors = {lev};
  std::size_t edited = 0;
  for (const auto& r : Run(spec)) {
    EXPECT_EQ(r.text.substr(r.prefix_text_len), "cat");
    EXPECT_LE(r.n_edits, 1u);
    EXPECT_EQ(r.edit_positions.size(), r.n_edits);
    for (std::size_t p : r.edit_positions) EXPECT_LE(p, r.prefix_text_len);
    EXPECT_EQ(testing::EditDistance(r.text.substr(0, r.prefix_text_len), "the "), r.n_edits);
    edited += r.n_edits;
  }
  EXPECT_GT(edited, 0u);
}

TEST_F(QueryTest, EmptyPrefixIsNeverExpanded) {
  QuerySpec spec;
  spec.pattern = "cat";
  spec.preprocessors = {PreprocessorSpec::Levenshtein(1, Scope::kPrefix)};
  Query q = BuildQuery(spec, vocab_);
  EXPECT_EQ(q.prefix().edit_distance, 0u);
  EXPECT_TRUE(q.prefix().bytes.Accepts(""));
  EXPECT_EQ(testing::AutomatonLanguage(q.prefix().bytes).size(), 1u);
}

TEST_F(QueryTest, DeferredFilterDropsDeniedStrings) {
  QuerySpec spec;
  spec.pattern = "(cat|dog|cow)";
  spec.preprocessors = {
      PreprocessorSpec::Filter(Automaton::Literal("dog"), FilterMode::kDeferred)};
  auto results = Run(spec);
  ASSERT_EQ(results.size(), 2u);
  for (const auto& r : results) EXPECT_NE(r.text, "dog");
  spec.preprocessors[0].mode = FilterMode::kEager;
  EXPECT_EQ(Run(spec).size(), 2u);
}

TEST_F(QueryTest, MaxResultsAndLazyModelCalls) {
  QuerySpec spec;
  spec.pattern = "[a-z]+";
  spec.max_results = 0;
  Query q = BuildQuery(spec, vocab_);
  CountingModel counting(model_);
  ResultStream s = Execute(q, counting);
  EXPECT_FALSE(s.Next().has_value());
  EXPECT_EQ(counting.calls.load(), 0);
  spec.max_results = 3;
  EXPECT_EQ(Run(spec).size(), 3u);
}

TEST_F(QueryTest, VocabularyMismatchIsAModelError) {
  QuerySpec spec;
  spec.pattern = "a";
  Query q = BuildQuery(spec, vocab_);
  HashLM other(std::make_shared<const Vocabulary>(), 1);
  ResultStream s = Execute(q, other);
  EXPECT_FALSE(s.Next().has_value());
  ASSERT_TRUE(s.error().has_value());
  EXPECT_EQ(s.error()->stage(), Stage::kModel);
}

TEST_F(QueryTest, ExecutionErrorsEndTheStream) {
  QuerySpec spec;
  spec.pattern = "[a-z]+";
  spec.encoding = EncodingMode::kFull;
  spec.frontier_cap = 5;
  spec.max_results = 100;
  std::optional<Error> error;
  Run(spec, &error);
  ASSERT_TRUE(error.has_value());
  EXPECT_EQ(error->stage(), Stage::kExec);
}

TEST_F(QueryTest, RandomTraversalIsReproducible) {
  QuerySpec spec;
  spec.pattern = "the [a-z]{2,4}";
  spec.prefix = "the ";
  spec.traversal = Traversal::kRandom;
  spec.max_results = 20;
  spec.seed = 9;
  auto a = Run(spec), b = Run(spec);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].tokens, b[i].tokens);
}

TEST_F(QueryTest, CacheStoresAndReusesPreprocessedAutomata) {
  auto dir = std::filesystem::temp_directory_path() / "lmre_query_cache_test";
  std::filesystem::remove_all(dir);
  QuerySpec spec;
  spec.pattern = "the (cat|dog)";
  spec.prefix = "the ";
  spec.preprocessors = {PreprocessorSpec::Levenshtein(1, Scope::kPrefix)};
  spec.cache_dir = dir.string();
  Query first = BuildQuery(spec, vocab_);
  std::size_t files = 0;
  for (auto& entry : std::filesystem::directory_iterator(dir)) files += entry.is_regular_file();
  EXPECT_EQ(files, 2u);
  Query second = BuildQuery(spec, vocab_);
  EXPECT_EQ(first.prefix().bytes, second.prefix().bytes);
  EXPECT_EQ(second.prefix().edit_distance, 1u);
  EXPECT_EQ(first.suffix().bytes, second.suffix().bytes);
  // A different preprocessor set misses the cache.
  spec.preprocessors.clear();
  Query third = BuildQuery(spec, vocab_);
  EXPECT_EQ(third.prefix().edit_distance, 0u);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace lmre
