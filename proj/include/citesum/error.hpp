// Copyright 2026 The Citesum Authors.
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

namespace citesum {

enum class ErrorCode {
  kMalformedInput,
  kMissingField,
  kDanglingRef,
  kDuplicatePaper,
  kEmbeddingUnavailable,
  kDimensionMismatch,
  kZeroVector,
  kDuplicateUnitId,
  kUnknownUnit,
  kLengthMismatch,
  kTargetUnavailable,
  kEmptyInput,
  kUnknownTemplate,
  kProviderTimeout,
  kProviderRejected,
  kUnknownCriterion,
  kMalformedResponse,
  kScoreOutOfRange,
  kMissingCriterion,
  kDegenerateMarginals,
  kNotFound,
  kConflict,
  kStorageFailure,
  kInvalidArgument,
};

/// Stable snake_case name used in JSON error bodies and diagnostics.
std::string_view error_code_name(ErrorCode code);

/// Whether a caller may reasonably retry the failed operation unchanged.
bool is_retriable(ErrorCode code);

/// The single exception type thrown by the library. Callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  bool retriable() const noexcept { return is_retriable(code_); }

 private:
  ErrorCode code_;
};

}  // namespace citesum
