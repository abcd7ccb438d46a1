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

#ifndef HISTMUT_RUNNER_H_
#define HISTMUT_RUNNER_H_

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace histmut {

enum class CrashKind {
  kSegmentationFault,
  kAssertionFailure,
  kHang,
  kInternalCompilerError,
};

enum class OutcomeKind { kSuccess, kCompileError, kCrash };

std::string_view CrashKindName(CrashKind k);
std::optional<CrashKind> ParseCrashKind(std::string_view s);
std::string_view OutcomeKindName(OutcomeKind k);

struct OutcomeClass {
  OutcomeKind kind = OutcomeKind::kSuccess;
  std::optional<CrashKind> crash;

  bool operator==(const OutcomeClass&) const = default;
};

struct ExitStatus {
  bool signaled = false;
  int code = 0;
  int signal = 0;
};

struct StackFrame {
  std::string function;
  std::string location;  // source location or module+offset; may be empty
  std::string pc;        // program counter text; may be empty
  std::string raw;

  bool operator==(const StackFrame&) const = default;
};

// Frames innermost-first.
struct StackTrace {
  std::vector<StackFrame> frames;

  bool operator==(const StackTrace&) const = default;
};

enum class TraceDialect { kGccIce, kClangCrash, kGeneric };

struct RunOutcome {
  OutcomeKind kind = OutcomeKind::kSuccess;
  std::optional<CrashKind> crash;
  ExitStatus exit;
  std::chrono::milliseconds duration{0};
  std::string stderr_text;
  std::optional<StackTrace> stacktrace;
  // Files collected from the run directory (see TargetConfig::collect).
  std::map<std::string, std::string> artifacts;
};

struct TargetConfig {
  // One {input} placeholder, replaced by the path of the written source.
  std::string command = "cc -O2 -c {input} -o /dev/null";
  std::chrono::milliseconds timeout{10000};
  std::filesystem::path workdir;  // parent of per-run scratch dirs
  std::vector<std::string> env_allow = {"PATH", "HOME", "LANG", "LC_ALL",
                                        "TMPDIR"};
  std::string input_name = "input.c";
  // Run-directory-relative files read back after each run.
  std::vector<std::string> collect;
};

// Throws kInvalidArgument when the template or timeout is unusable.
void ValidateTargetConfig(const TargetConfig& config);

// Precedence: Hang > SegmentationFault > AssertionFailure >
// InternalCompilerError > CompileError > Success.
OutcomeClass ClassifyOutcome(const ExitStatus& exit, std::string_view stderr_text,
                             bool timed_out);

TraceDialect DetectDialect(std::string_view stderr_text);
StackTrace ParseStackTrace(std::string_view stderr_text, TraceDialect dialect);

// Writes `source` to a private run directory and invokes the target.
// Throws kLaunchFailure when the compiler cannot be started.
RunOutcome Compile(const TargetConfig& config, std::string_view source);

}  // namespace histmut

#endif  // HISTMUT_RUNNER_H_
