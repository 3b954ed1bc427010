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

#include "lmre/error.h"

namespace lmre {

std::string_view StageName(Stage stage) {
  switch (stage) {
    case Stage::kParse:
      return "parse";
    case Stage::kCompile:
      return "compile";
    case Stage::kModel:
      return "model";
    case Stage::kExec:
      return "exec";
    case Stage::kIo:
      return "io";
  }
  return "unknown";
}

namespace {

std::string Decorate(Stage stage, const std::string& message,
                     std::optional<std::size_t> offset) {
  std::string out(StageName(stage));
  out += " error";
  if (offset) out += " at offset " + std::to_string(*offset);
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(Stage stage, const std::string& message,
             std::optional<std::size_t> offset)
    : std::runtime_error(Decorate(stage, message, offset)),
      stage_(stage),
      offset_(offset) {}

}  // namespace lmre
