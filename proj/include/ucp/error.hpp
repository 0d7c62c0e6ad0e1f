/* Copyright 2026 The ucp Authors. All Rights Reserved.

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

namespace ucp {

enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kCorruptHeader,
  kTruncatedPayload,
  kTrailingBytes,
  kBounds,
  kShapeMismatch,
  kUnsupportedCast,
  kIncompatibleConfig,
  kPatternCoverage,
  kManifest,
  kMissingFragment,
  kOverlappingRange,
  kReplicaMismatch,
  kNonzeroPadding,
  kNonemptyOutput,
};

std::string_view error_code_name(ErrorCode code);

// Every failure raised by the library carries a code so callers and tests
// can tell corrupt input apart from misuse.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code),
        message_(what) {}

  ErrorCode code() const noexcept { return code_; }
  // what() without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kIo: return "io-failure";
    case ErrorCode::kCorruptHeader: return "corrupt-header";
    case ErrorCode::kTruncatedPayload: return "truncated-payload";
    case ErrorCode::kTrailingBytes: return "trailing-bytes";
    case ErrorCode::kBounds: return "bounds";
    case ErrorCode::kShapeMismatch: return "shape-mismatch";
    case ErrorCode::kUnsupportedCast: return "unsupported-cast";
    case ErrorCode::kIncompatibleConfig: return "incompatible-config";
    case ErrorCode::kPatternCoverage: return "pattern-coverage";
    case ErrorCode::kManifest: return "manifest";
    case ErrorCode::kMissingFragment: return "missing-fragment";
    case ErrorCode::kOverlappingRange: return "overlapping-range";
    case ErrorCode::kReplicaMismatch: return "replica-mismatch";
    case ErrorCode::kNonzeroPadding: return "nonzero-padding";
    case ErrorCode::kNonemptyOutput: return "nonempty-output";
  }
  return "unknown";
}

}  // namespace ucp
