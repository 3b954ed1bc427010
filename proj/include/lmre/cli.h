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

// Command-line front end, callable in-process for tests.

#ifndef LMRE_CLI_H_
#define LMRE_CLI_H_

#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "lmre/error.h"
#include "lmre/language_model.h"
#include "lmre/query.h"
#include "lmre/vocabulary.h"

namespace lmre {

// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitParse = 2,
  kExitCompile = 3,
  kExitModel = 4,
  kExitExec = 5,
  kExitIo = 6,
};

int ExitCodeFor(Stage stage);

// Environment variable naming the compiled-automaton cache directory.
inline constexpr const char* kCacheDirEnv = "LMRE_CACHE_DIR";

// A query spec file resolved into its parts.
struct LoadedSpec {
  QuerySpec query;
  std::shared_ptr<const Vocabulary> vocab;
  std::shared_ptr<const LanguageModel> model;
};

// Reads a JSON query spec; relative paths resolve against its directory.
// Unknown keys are rejected (Error(kIo)).
LoadedSpec LoadQuerySpec(const std::string& path);

// Loads "tokens.txt"/"merges.txt" from a directory; empty path gives the
// byte-level vocabulary.
std::shared_ptr<const Vocabulary> LoadVocabulary(const std::string& dir);

// "hash:<seed>" or the path of an n-gram model file.
std::shared_ptr<const LanguageModel> LoadModel(const std::string& spec,
                                               std::shared_ptr<const Vocabulary> vocab);

// One JSONL record.
std::string ResultJson(const MatchResult& r);

// Runs the CLI on argv (argv[0] is the program name).
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lmre

#endif  // LMRE_CLI_H_
