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

#include "citesum/error.hpp"

namespace citesum {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedInput: return "malformed_input";
    case ErrorCode::kMissingField: return "missing_field";
    case ErrorCode::kDanglingRef: return "dangling_ref";
    case ErrorCode::kDuplicatePaper: return "duplicate_paper";
    case ErrorCode::kEmbeddingUnavailable: return "embedding_unavailable";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kZeroVector: return "zero_vector";
    case ErrorCode::kDuplicateUnitId: return "duplicate_unit_id";
    case ErrorCode::kUnknownUnit: return "unknown_unit";
    case ErrorCode::kLengthMismatch: return "length_mismatch";
    case ErrorCode::kTargetUnavailable: return "target_unavailable";
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kUnknownTemplate: return "unknown_template";
    case ErrorCode::kProviderTimeout: return "provider_timeout";
    case ErrorCode::kProviderRejected: return "provider_rejected";
    case ErrorCode::kUnknownCriterion: return "unknown_criterion";
    case ErrorCode::kMalformedResponse: return "malformed_response";
    case ErrorCode::kScoreOutOfRange: return "score_out_of_range";
    case ErrorCode::kMissingCriterion: return "missing_criterion";
    case ErrorCode::kDegenerateMarginals: return "degenerate_marginals";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kStorageFailure: return "storage_failure";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
  }
  return "unknown";
}

bool is_retriable(ErrorCode code) {
  return code == ErrorCode::kProviderTimeout ||
         code == ErrorCode::kEmbeddingUnavailable ||
         code == ErrorCode::kStorageFailure;
}

}  // namespace citesum
