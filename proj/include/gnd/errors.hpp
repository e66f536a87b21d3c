// Copyright 2026 The gndnet Authors
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

namespace gnd {

/// Every failure raised by the library carries one of these kinds so callers
/// (the CLI in particular) can map them to exit codes without string matching.
enum class ErrorKind {
  kDimensionMismatch,
  kNonFiniteValue,
  kZeroDegreeRow,
  kInvalidParameter,
  kNonScalarLoss,
  kEmptyMask,
  kInsufficientVertices,
  kParseError,
  kInconsistentVertexCount,
  kUnknownLabel,
  kIoError,
  kConfigError,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace gnd
