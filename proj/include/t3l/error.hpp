// Copyright 2026 The T3L Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace t3l {

// Machine-readable failure categories. The CLI maps each one to a distinct
// nonzero exit code.
enum class ErrorCategory {
  kInvalidArgument = 2,
  kShapeMismatch = 3,
  kOutOfRange = 4,
  kIo = 5,
  kFormat = 6,
  kMissingComponent = 7,
  kConfig = 8,
  kState = 9,
};

std::string_view category_name(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] inline void fail(ErrorCategory category, const std::string& message) {
  throw Error(category, message);
}

inline void require(bool condition, ErrorCategory category, const std::string& message) {
  if (!condition) throw Error(category, message);
}

}  // namespace t3l
