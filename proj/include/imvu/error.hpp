// Copyright 2026 The imvu Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
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

namespace imvu {

enum class ErrorKind {
  kInput,       // malformed or out-of-domain argument
  kState,       // required precomputed state is missing
  kDesign,      // the mechanism LP has no feasible point
  kSize,        // problem exceeds the supported size
  kSymmetry,    // anadromic precondition violated
  kUniqueness,  // argmax/argmin of the interpolation direction is tied
  kValidation,  // a table invariant failed
  kFormat,      // a file could not be parsed
};

inline std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInput:
      return "input";
    case ErrorKind::kState:
      return "state";
    case ErrorKind::kDesign:
      return "design";
    case ErrorKind::kSize:
      return "size";
    case ErrorKind::kSymmetry:
      return "symmetry";
    case ErrorKind::kUniqueness:
      return "uniqueness";
    case ErrorKind::kValidation:
      return "validation";
    case ErrorKind::kFormat:
      return "format";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(ErrorKindName(kind)) + " error: " +
                           message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace imvu
