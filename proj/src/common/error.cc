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

#include "histmut/error.h"

namespace histmut {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidPattern: return "InvalidPattern";
    case ErrorCode::kReplacementGroupOutOfRange:
      return "ReplacementGroupOutOfRange";
    case ErrorCode::kPluginTimeout: return "PluginTimeout";
    case ErrorCode::kPluginNonZeroExit: return "PluginNonZeroExit";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kTrackerUnavailable: return "TrackerUnavailable";
    case ErrorCode::kRateLimited: return "RateLimited";
    case ErrorCode::kMalformedResponse: return "MalformedResponse";
    case ErrorCode::kDegeneratePair: return "DegeneratePair";
    case ErrorCode::kRefinementBudgetExhausted:
      return "RefinementBudgetExhausted";
    case ErrorCode::kTranscriptMiss: return "TranscriptMiss";
    case ErrorCode::kLlmUnavailable: return "LlmUnavailable";
    case ErrorCode::kLaunchFailure: return "LaunchFailure";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kEmptySelection: return "EmptySelection";
    case ErrorCode::kCorruptState: return "CorruptState";
    case ErrorCode::kReplayDivergence: return "ReplayDivergence";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

ErrorCategory CategoryOf(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kEmptySelection:
      return ErrorCategory::kUsage;
    case ErrorCode::kPluginTimeout:
    case ErrorCode::kPluginNonZeroExit:
    case ErrorCode::kTrackerUnavailable:
    case ErrorCode::kRateLimited:
    case ErrorCode::kLlmUnavailable:
    case ErrorCode::kLaunchFailure:
    case ErrorCode::kIo:
      return ErrorCategory::kInfrastructure;
    default:
      return ErrorCategory::kData;
  }
}

}  // namespace histmut
