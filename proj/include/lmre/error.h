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

#ifndef LMRE_ERROR_H_
#define LMRE_ERROR_H_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lmre {

// Pipeline stage an error originated from. The CLI maps these to exit codes.
enum class Stage {
  kParse,
  kCompile,
  kModel,
  kExec,
  kIo,
};

std::string_view StageName(Stage stage);

class Error : public std::runtime_error {
 public:
  Error(Stage stage, const std::string& message,
        std::optional<std::size_t> offset = std::nullopt);

  Stage stage() const { return stage_; }
  // Byte offset into the offending input, when known (regex syntax errors).
  std::optional<std::size_t> offset() const { return offset_; }

 private:
  Stage stage_;
  std::optional<std::size_t> offset_;
};

}  // namespace lmre

#endif  // LMRE_ERROR_H_
