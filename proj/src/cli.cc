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


#include "lmre/cli.h"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lmre/harness.h"
#include "lmre/preprocessors.h"

namespace lmre {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Stage::kIo, "cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Stage::kIo, "cannot write " + path);
  out << text;
  if (!out) throw Error(Stage::kIo, "write failed for " + path);
}

json ReadJson(const std::string& path) {
  try {
    return json::parse(ReadText(path));
  } catch (const json::exception& e) {
    throw Error(Stage::kIo, path + ": invalid JSON: " + e.what());
  }
}

// Typed access to a config object with a fixed key inventory.
class Config {
 public:
  Config(json j, std::string path, std::set<std::string> allowed)
      : j_(std::move(j)), path_(std::move(path)) {
    if (!j_.is_object()) throw Error(Stage::kIo, path_ + ": expected a JSON object");
    for (const auto& [key, value] : j_.items()) {
      if (!allowed.count(key)) throw Error(Stage::kIo, path_ + ": unknown key '" + key + "'");
    }
  }

  bool Has(const std::string& key) const { return j_.contains(key) && !j_[key].is_null(); }

  template <typename T>
  T Get(const std::string& key, T fallback) const {
    if (!Has(key)) return fallback;
    try {
      return j_[key].get<T>();
    } catch (const json::exception&) {
      throw Error(Stage::kIo, path_ + ": key '" + key + "' has the wrong type");
    }
  }

  const json& Raw(const std::string& key) const { return j_[key]; }

  // Resolves a path relative to the config file.
  std::string Path(const std::string& key) const {
    std::string p = Get<std::string>(key, "");
    if (p.empty() || fs::path(p).is_absolute()) return p;
    return (fs::path(path_).parent_path() / p).lexically_normal().string();
  }

  std::string Resolve(const std::string& p) const {
    if (p.empty() || fs::path(p).is_absolute()) return p;
    return (fs::path(path_).parent_path() / p).lexically_normal().string();
  }

  const std::string& path() const { return path_; }

 private:
  json j_;
  std::string path_;
};

template <typename T>
T Choice(const Config& c, const std::string& key, T fallback,
         std::initializer_list<std::pair<const char*, T>> options) {
  if (!c.Has(key)) return fallback;
  std::string value = c.Get<std::string>(key, "");
  for (const auto& [name, v] : options) {
    if (value == name) return v;
  }
  throw Error(Stage::kIo, c.path() + ": bad value '" + value + "' for '" + key + "'");
}

EncodingMode Encoding(const Config& c) {
  return Choice(c, "encoding", EncodingMode::kCanonical,
                {{"canonical", EncodingMode::kCanonical}, {"full", EncodingMode::kFull}});
}

DecisionRule Rule(const Config& c) {
  if (!c.Has("top_k")) return DecisionRule::None();
  long long k = c.Get<long long>("top_k", 0);
  if (k <= 0) throw Error(Stage::kIo, c.path() + ": top_k must be positive");
  return DecisionRule::TopK(static_cast<std::size_t>(k));
}

std::size_t Count(const Config& c, const std::string& key, std::size_t fallback) {
  if (!c.Has(key)) return fallback;
  long long v = c.Get<long long>(key, 0);
  if (v < 0) throw Error(Stage::kIo, c.path() + ": '" + key + "' must be >= 0");
  return static_cast<std::size_t>(v);
}

std::bitset<256> Alphabet(const std::string& name) {
  if (name.empty() || name == "printable") return PrintableAscii();
  std::bitset<256> bytes;
  if (name == "lowercase") {
    for (char c = 'a'; c <= 'z'; ++c) bytes.set(static_cast<unsigned char>(c));
    return bytes;
  }
  for (char c : name) bytes.set(static_cast<unsigned char>(c));
  return bytes;
}

Scope ParseScope(const std::string& path, const json& j) {
  if (!j.contains("scope")) return Scope::kBoth;
  std::string s = j["scope"].is_string() ? j["scope"].get<std::string>() : "";
  if (s == "both") return Scope::kBoth;
  if (s == "prefix") return Scope::kPrefix;
  if (s == "suffix") return Scope::kSuffix;
  throw Error(Stage::kIo, path + ": preprocessor scope must be both, prefix or suffix");
}

std::vector<PreprocessorSpec> Preprocessors(const Config& c) {
  std::vector<PreprocessorSpec> out;
  if (!c.Has("preprocessors")) return out;
  const json& list = c.Raw("preprocessors");
  if (!list.is_array()) throw Error(Stage::kIo, c.path() + ": preprocessors must be a list");
  for (const json& p : list) {
    if (!p.is_object()) throw Error(Stage::kIo, c.path() + ": bad preprocessor entry");
    Config entry(p, c.path(), {"levenshtein", "alphabet", "filter", "filter_pattern", "mode",
                               "scope"});
    Scope scope = ParseScope(c.path(), p);
    if (entry.Has("levenshtein")) {
      PreprocessorSpec spec = PreprocessorSpec::Levenshtein(entry.Get<int>("levenshtein", 1), scope);
      spec.alphabet = Alphabet(entry.Get<std::string>("alphabet", ""));
      out.push_back(spec);
      continue;
    }
    FilterMode mode = Choice(entry, "mode", FilterMode::kEager,
                             {{"eager", FilterMode::kEager}, {"deferred", FilterMode::kDeferred}});
    if (entry.Has("filter")) {
      std::string words = ReadText(c.Resolve(entry.Get<std::string>("filter", "")));
      out.push_back(PreprocessorSpec::Filter(WordListAutomaton(ParseWordList(words)), mode, scope));
    } else if (entry.Has("filter_pattern")) {
      out.push_back(PreprocessorSpec::Filter(
          CompileRegex(entry.Get<std::string>("filter_pattern", "")), mode, scope));
    } else {
      throw Error(Stage::kIo, c.path() + ": preprocessor needs levenshtein, filter or "
                                         "filter_pattern");
    }
  }
  return out;
}

std::uint64_t Seed(const Config& c) {
  if (!c.Has("seed")) return 0;
  try {
    return c.Raw("seed").get<std::uint64_t>();
  } catch (const json::exception&) {
    throw Error(Stage::kIo, c.path() + ": seed must be a non-negative integer");
  }
}

std::pair<std::shared_ptr<const Vocabulary>, std::shared_ptr<const LanguageModel>> ModelOf(
    const Config& c) {
  auto vocab = LoadVocabulary(c.Path("vocab"));
  std::string model = c.Get<std::string>("model", "hash:0");
  if (model.rfind("hash:", 0) != 0) {
    model = c.Resolve(model);
    // A train-lm output directory names its model file.
    if (std::filesystem::is_directory(model)) model = (std::filesystem::path(model) / "model.ngram").string();
  }
  return {vocab, LoadModel(model, vocab)};
}

std::ostream& Output(const std::string& path, std::ofstream& file, std::ostream& fallback) {
  if (path.empty() || path == "-") return fallback;
  file.open(path, std::ios::binary);
  if (!file) throw Error(Stage::kIo, "cannot write " + path);
  return file;
}

std::string TrimSeconds(double s) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << s;
  return os.str();
}

std::string Shape(const Automaton& a) {
  std::ostringstream os;
  os << a.num_states() << " states, " << a.num_edges() << " edges";
  if (IsFinite(a)) {
    os << ", " << WalkCountTable(a, a.num_states()).total() << " accepting paths";
  } else {
    os << ", infinite language";
  }
  return os.str();
}

// --- subcommands -------------------------------------------------------------

int CmdRun(const std::string& spec_path, const std::string& out_path, double limit_seconds,
           std::ostream& out, std::ostream& err) {
  LoadedSpec spec = LoadQuerySpec(spec_path);
  if (const char* dir = std::getenv(kCacheDirEnv)) spec.query.cache_dir = dir;
  Query query = BuildQuery(spec.query, spec.vocab);
  for (const PatternWarning& w : query.warnings()) {
    err << "warning: offset " << w.offset << ": " << w.message << "\n";
  }
  std::ofstream file;
  std::ostream& o = Output(out_path, file, out);
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  ResultStream stream = Execute(query, *spec.model);
  std::size_t n = 0;
  bool timed_out = false;
  while (auto r = stream.Next()) {
    o << ResultJson(*r) << '\n';
    o.flush();
    ++n;
    if (limit_seconds > 0 && elapsed() > limit_seconds) {
      timed_out = true;
      break;
    }
  }
  TraversalStats stats = stream.stats();
  err << "results=" << n << " elapsed=" << TrimSeconds(elapsed()) << "s"
      << " model_calls=" << stats.model_calls << " discarded=" << stats.discarded
      << (timed_out ? " stopped=time_limit" : "") << "\n";
  if (stream.error()) {
    err << "error: " << stream.error()->what() << "\n";
    return ExitCodeFor(stream.error()->stage());
  }
  return kExitOk;
}

int CmdCompile(const std::string& spec_path, const std::string& dot_prefix, std::ostream& out,
               std::ostream& err) {
  LoadedSpec spec = LoadQuerySpec(spec_path);
  if (const char* dir = std::getenv(kCacheDirEnv)) spec.query.cache_dir = dir;
  Query query = BuildQuery(spec.query, spec.vocab);
  for (const PatternWarning& w : query.warnings()) {
    err << "warning: offset " << w.offset << ": " << w.message << "\n";
  }
  Automaton bytes = query.suffix().bytes;
  Automaton tokens = query.suffix().tokens->automaton;
  if (!query.spec().prefix.empty()) {
    bytes = Minimize(Concat(query.prefix().bytes, query.suffix().bytes));
    tokens = Minimize(Concat(query.prefix().tokens->automaton, query.suffix().tokens->automaton));
  }
  WriteText(dot_prefix + ".bytes.dot", DumpDot(bytes));
  WriteText(dot_prefix + ".tokens.dot", DumpDot(tokens, TokenLabeler(*spec.vocab)));
  out << "byte automaton: " << Shape(bytes) << "\n";
  out << "token automaton: " << Shape(tokens) << "\n";
  return kExitOk;
}

int CmdTrainLm(const std::string& corpus_path, std::size_t order, std::size_t vocab_size,
               double alpha, std::size_t max_length, const std::string& out_dir,
               std::ostream& out) {
  std::string corpus = ReadText(corpus_path);
  auto vocab = std::make_shared<const Vocabulary>(TrainBpe(corpus, vocab_size));
  NGramLM lm(vocab, order, alpha, max_length);
  lm.Train(corpus);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(Stage::kIo, "cannot create " + out_dir);
  vocab->Save((fs::path(out_dir) / "tokens.txt").string(),
              (fs::path(out_dir) / "merges.txt").string());
  WriteText((fs::path(out_dir) / "model.ngram").string(), lm.Serialize());
  out << "vocabulary: " << vocab->size() << " tokens (" << vocab->merges().size()
      << " merges)\nmodel: order " << order << ", alpha " << alpha << "\n";
  return kExitOk;
}

const std::set<std::string> kModelKeys = {"model", "vocab"};

std::set<std::string> With(std::set<std::string> keys) {
  keys.insert(kModelKeys.begin(), kModelKeys.end());
  return keys;
}

int CmdHarness(const std::string& task, const std::string& config_path,
               const std::string& out_path, std::ostream& out, std::ostream& err) {
  json j = ReadJson(config_path);
  std::string report, table;
  if (task == "extract") {
    Config c(j, config_path,
             With({"pattern", "prefix", "budget", "baseline_lengths", "top_k", "require_eos",
                   "encoding", "seed", "max_tokens"}));
    auto [vocab, model] = ModelOf(c);
    ExtractConfig cfg;
    cfg.pattern = c.Get<std::string>("pattern", "");
    cfg.prefix = c.Get<std::string>("prefix", "");
    cfg.budget = Count(c, "budget", cfg.budget);
    cfg.baseline_lengths = c.Get<std::vector<std::size_t>>("baseline_lengths", cfg.baseline_lengths);
    cfg.rule = c.Has("top_k") ? Rule(c) : cfg.rule;
    cfg.require_eos = c.Get<bool>("require_eos", cfg.require_eos);
    cfg.encoding = Encoding(c);
    cfg.seed = Seed(c);
    cfg.max_tokens = Count(c, "max_tokens", cfg.max_tokens);
    ExtractReport r = HarnessExtract(cfg, *model);
    report = ReportJson(r);
    table = ReportTable(r);
  } else if (task == "bias") {
    Config c(j, config_path,
             With({"prefix_template", "groups", "outcomes", "separator", "samples", "encoding",
                   "edits", "weighting", "top_k", "seed", "max_tokens"}));
    auto [vocab, model] = ModelOf(c);
    BiasConfig cfg;
    cfg.prefix_template = c.Get<std::string>("prefix_template", "");
    cfg.groups = c.Get<std::vector<std::string>>("groups", {});
    cfg.outcomes = c.Get<std::vector<std::string>>("outcomes", {});
    cfg.separator = c.Get<std::string>("separator", cfg.separator);
    cfg.samples = Count(c, "samples", cfg.samples);
    cfg.encoding = Encoding(c);
    cfg.edits = c.Get<bool>("edits", false);
    cfg.weighting = Choice(c, "weighting", PrefixWeighting::kWalkCount,
                           {{"walk", PrefixWeighting::kWalkCount},
                            {"naive", PrefixWeighting::kNaive}});
    cfg.rule = Rule(c);
    cfg.seed = Seed(c);
    cfg.max_tokens = Count(c, "max_tokens", cfg.max_tokens);
    BiasReport r = HarnessBias(cfg, *model);
    report = ReportJson(r);
    table = ReportTable(r);
  } else if (task == "toxicity") {
    Config c(j, config_path,
             With({"corpus", "target_pattern", "prompted", "edits", "edit_alphabet", "encoding",
                   "budget", "top_k", "max_tokens"}));
    auto [vocab, model] = ModelOf(c);
    ToxicityConfig cfg;
    cfg.corpus = ParseWordList(ReadText(c.Path("corpus")));
    cfg.target_pattern = c.Get<std::string>("target_pattern", "");
    cfg.prompted = c.Get<bool>("prompted", true);
    cfg.edits = c.Get<bool>("edits", false);
    cfg.edit_alphabet = Alphabet(c.Get<std::string>("edit_alphabet", ""));
    cfg.encoding = Encoding(c);
    cfg.budget = Count(c, "budget", cfg.budget);
    cfg.rule = c.Has("top_k") ? Rule(c) : cfg.rule;
    cfg.max_tokens = Count(c, "max_tokens", cfg.max_tokens);
    ToxicityReport r = HarnessToxicity(cfg, *model);
    report = ReportJson(r);
    table = ReportTable(r);
  } else {
    Config c(j, config_path,
             With({"dataset", "variant", "stop_words", "max_items", "top_k", "encoding",
                   "max_tokens"}));
    auto [vocab, model] = ModelOf(c);
    ClozeConfig cfg;
    std::string variant = c.Get<std::string>("variant", "baseline");
    auto v = ParseClozeVariant(variant);
    if (!v) throw Error(Stage::kIo, config_path + ": unknown cloze variant '" + variant + "'");
    cfg.variant = *v;
    cfg.stop_words = c.Has("stop_words") ? ParseWordList(ReadText(c.Path("stop_words")))
                                         : DefaultStopWords();
    cfg.max_items = Count(c, "max_items", cfg.max_items);
    cfg.rule = Rule(c);
    cfg.encoding = Encoding(c);
    cfg.max_tokens = Count(c, "max_tokens", cfg.max_tokens);
    ClozeReport r = HarnessCloze(ParseClozeDataset(ReadText(c.Path("dataset"))), cfg, *model);
    report = ReportJson(r);
    table = ReportTable(r);
  }
  std::ofstream file;
  Output(out_path, file, out) << report;
  err << table;
  return kExitOk;
}

}  // namespace

int ExitCodeFor(Stage stage) {
  switch (stage) {
    case Stage::kParse:
      return kExitParse;
    case Stage::kCompile:
      return kExitCompile;
    case Stage::kModel:
      return kExitModel;
    case Stage::kExec:
      return kExitExec;
    case Stage::kIo:
      return kExitIo;
  }
  return kExitExec;
}

std::shared_ptr<const Vocabulary> LoadVocabulary(const std::string& dir) {
  if (dir.empty()) return std::make_shared<const Vocabulary>();
  return std::make_shared<const Vocabulary>(Vocabulary::Load(
      (fs::path(dir) / "tokens.txt").string(), (fs::path(dir) / "merges.txt").string()));
}

std::shared_ptr<const LanguageModel> LoadModel(const std::string& spec,
                                               std::shared_ptr<const Vocabulary> vocab) {
  if (spec.rfind("hash:", 0) == 0) {
    std::uint64_t seed = 0;
    try {
      seed = std::stoull(spec.substr(5));
    } catch (const std::exception&) {
      throw Error(Stage::kModel, "bad hash model seed in '" + spec + "'");
    }
    return std::make_shared<const HashLM>(std::move(vocab), seed);
  }
  return std::make_shared<const NGramLM>(NGramLM::Parse(std::move(vocab), ReadText(spec)));
}

LoadedSpec LoadQuerySpec(const std::string& path) {
  Config c(ReadJson(path), path,
           {"pattern", "prefix", "encoding", "canonical_strategy", "top_k", "traversal", "seed",
            "max_results", "max_tokens", "preprocessors", "model", "vocab", "require_eos",
            "exempt_eos", "zero_cost_prefix", "prefix_weighting", "suffix_sampling",
            "frontier_cap", "retry_budget", "enumerate_budget"});
  if (!c.Has("pattern")) throw Error(Stage::kIo, path + ": missing 'pattern'");
  LoadedSpec out;
  QuerySpec& q = out.query;
  q.pattern = c.Get<std::string>("pattern", "");
  q.prefix = c.Get<std::string>("prefix", "");
  q.encoding = Encoding(c);
  q.canonical_strategy = Choice(c, "canonical_strategy", CanonicalStrategy::kAuto,
                                {{"auto", CanonicalStrategy::kAuto},
                                 {"enumerate", CanonicalStrategy::kEnumerate},
                                 {"runtime_filter", CanonicalStrategy::kRuntimeFilter}});
  q.rule = Rule(c);
  q.traversal = Choice(c, "traversal", Traversal::kShortest,
                       {{"shortest", Traversal::kShortest}, {"random", Traversal::kRandom}});
  q.seed = Seed(c);
  q.max_results = Count(c, "max_results", q.max_results);
  q.max_tokens = Count(c, "max_tokens", q.max_tokens);
  q.require_eos = c.Get<bool>("require_eos", false);
  q.exempt_eos = c.Get<bool>("exempt_eos", false);
  q.zero_cost_prefix = c.Get<bool>("zero_cost_prefix", false);
  q.prefix_weighting = Choice(c, "prefix_weighting", PrefixWeighting::kWalkCount,
                              {{"walk", PrefixWeighting::kWalkCount},
                               {"naive", PrefixWeighting::kNaive}});
  q.suffix_sampling = Choice(c, "suffix_sampling", SuffixSampling::kAuto,
                             {{"auto", SuffixSampling::kAuto},
                              {"exact", SuffixSampling::kExact},
                              {"local", SuffixSampling::kLocal}});
  q.frontier_cap = Count(c, "frontier_cap", q.frontier_cap);
  q.retry_budget = Count(c, "retry_budget", q.retry_budget);
  q.enumerate_budget = Count(c, "enumerate_budget", q.enumerate_budget);
  q.preprocessors = Preprocessors(c);
  std::tie(out.vocab, out.model) = ModelOf(c);
  return out;
}

std::string ResultJson(const MatchResult& r) {
  json j;
  j["tokens"] = r.tokens;
  j["text"] = r.text;
  j["logprob"] = r.logprob;
  j["canonical"] = r.canonical;
  j["n_edits"] = r.n_edits;
  j["edit_positions"] = r.edit_positions;
  j["prefix_len"] = r.prefix_len;
  j["eos"] = r.eos;
  j["step_probs"] = r.step_probs;
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"lmre: regular-expression queries over language models"};
  app.require_subcommand(1);

  std::string spec_path, out_path, dot_prefix;
  double limit_seconds = 0;
  auto* run = app.add_subcommand("run", "Execute a query spec; results as JSONL");
  run->add_option("spec", spec_path, "Query spec (JSON)")->required();
  run->add_option("-o,--output", out_path, "Output file (default stdout)");
  run->add_option("--limit-seconds", limit_seconds, "Wall-clock budget; 0 = none");

  auto* compile = app.add_subcommand("compile", "Write byte and token automata as DOT");
  compile->add_option("spec", spec_path, "Query spec (JSON)")->required();
  compile->add_option("--dot", dot_prefix, "Writes <prefix>.bytes.dot and <prefix>.tokens.dot")
      ->required();

  std::string corpus_path, model_dir;
  std::size_t order = 3, vocab_size = 256, max_length = kDefaultMaxSequenceLength;
  double alpha = 0.1;
  auto* train = app.add_subcommand("train-lm", "Train a BPE vocabulary and an n-gram model");
  train->add_option("corpus", corpus_path, "Training text, one document per line")->required();
  train->add_option("--order", order, "n-gram order")->check(CLI::PositiveNumber);
  train->add_option("--vocab-size", vocab_size, "Regular tokens (>= 256), EOS excluded");
  train->add_option("--alpha", alpha, "Add-alpha smoothing constant");
  train->add_option("--max-length", max_length, "Model maximum sequence length");
  train->add_option("-o,--out", model_dir, "Output directory")->required();

  auto* harness = app.add_subcommand("harness", "Run a validation harness");
  harness->require_subcommand(1);
  std::string task, config_path;
  for (const char* name : {"extract", "bias", "toxicity", "cloze"}) {
    auto* sub = harness->add_subcommand(name, std::string("The ") + name + " harness");
    sub->add_option("config", config_path, "Harness config (JSON)")->required();
    sub->add_option("-o,--output", out_path, "Report file (default stdout)");
    sub->callback([&task, name] { task = name; });
  }

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return CmdRun(spec_path, out_path, limit_seconds, out, err);
    if (*compile) return CmdCompile(spec_path, dot_prefix, out, err);
    if (*train) {
      return CmdTrainLm(corpus_path, order, vocab_size, alpha, max_length, model_dir, out);
    }
    return CmdHarness(task, config_path, out_path, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e.stage());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitExec;
  }
}

}  // namespace lmre
