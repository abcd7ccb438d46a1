// Copyright 2026 The histmut Authors.
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

#ifndef HISTMUT_ERROR_H_
#define HISTMUT_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace histmut {

// Error codes surfaced by the library. Each maps onto one CLI exit category.
enum class ErrorCode {
  kInvalidArgument,
  kInvalidPattern,
  kReplacementGroupOutOfRange,
  kPluginTimeout,
  kPluginNonZeroExit,
  kParseError,
  kDuplicateId,
  kTrackerUnavailable,
  kRateLimited,
  kMalformedResponse,
  kDegeneratePair,
  kRefinementBudgetExhausted,
  kTranscriptMiss,
  kLlmUnavailable,
  kLaunchFailure,
  kEmptyCorpus,
  kEmptySelection,
  kCorruptState,
  kReplayDivergence,
  kIo,
};

enum class ErrorCategory { kUsage, kInfrastructure, kData };

std::string_view ErrorCodeName(ErrorCode code);
ErrorCategory CategoryOf(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace histmut

#endif  // HISTMUT_ERROR_H_
