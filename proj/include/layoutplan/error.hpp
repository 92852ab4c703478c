/* Copyright 2026 The layoutplan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace layoutplan {

// Closed set of domain errors raised across the library. Parse failures of
// model output are not errors; they travel as ParseOutcome values.
enum class ErrorCode {
  kInvalidArgument,
  kDegenerateSource,
  kEmptyLayout,
  kOutOfDomain,
  kSchemaError,
  kNoFeasibleMove,
  kTooManyWords,
  kInsufficientSamples,
  kDimensionMismatch,
  kEmptyInput,
  kAlignmentError,
  kProviderError,
  kBackendTimeout,
  kBackendProtocolError,
  kNoBackend,
  kAmbiguousSelector,
  kSelectorNotFound,
  kSessionNotFound,
  kPlanFailed,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDegenerateSource: return "DegenerateSource";
    case ErrorCode::kEmptyLayout: return "EmptyLayout";
    case ErrorCode::kOutOfDomain: return "OutOfDomain";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kNoFeasibleMove: return "NoFeasibleMove";
    case ErrorCode::kTooManyWords: return "TooManyWords";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kAlignmentError: return "AlignmentError";
    case ErrorCode::kProviderError: return "ProviderError";
    case ErrorCode::kBackendTimeout: return "BackendTimeout";
    case ErrorCode::kBackendProtocolError: return "BackendProtocolError";
    case ErrorCode::kNoBackend: return "NoBackend";
    case ErrorCode::kAmbiguousSelector: return "AmbiguousSelector";
    case ErrorCode::kSelectorNotFound: return "SelectorNotFound";
    case ErrorCode::kSessionNotFound: return "SessionNotFound";
    case ErrorCode::kPlanFailed: return "PlanFailed";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace layoutplan
