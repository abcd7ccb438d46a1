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

#ifndef HISTMUT_UTIL_H_
#define HISTMUT_UTIL_H_

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace histmut {

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view contents);

// Lowercase hex SHA-256 of `data`.
std::string Sha256Hex(std::string_view data);

// Incremental SHA-256.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void Update(std::string_view data);
  std::string FinishHex();

 private:
  void* ctx_;
};

std::string Trim(std::string_view s);
std::string TrimRight(std::string_view s);
std::vector<std::string> SplitLines(std::string_view s);
std::vector<std::string> Split(std::string_view s, char sep);
std::string Join(const std::vector<std::string>& parts, std::string_view sep);
std::string ToLower(std::string_view s);
bool StartsWith(std::string_view s, std::string_view prefix);

// Splits a command line into arguments. Supports single and double quotes
// and backslash escapes outside single quotes.
std::vector<std::string> SplitCommandLine(std::string_view command);

// Replaces every occurrence of `from` in `s` with `to`.
std::string ReplaceAll(std::string s, std::string_view from,
                       std::string_view to);

size_t CountOccurrences(std::string_view s, std::string_view needle);

// A uniquely-named directory removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::filesystem::path& parent = {},
                      std::string_view prefix = "histmut");
  ~ScratchDir();
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Result of a child process run by RunProcess.
struct ProcessResult {
  bool timed_out = false;
  bool signaled = false;
  int exit_code = 0;  // valid when !signaled
  int signal = 0;     // valid when signaled
  std::chrono::milliseconds duration{0};
  std::string stdout_text;
  std::string stderr_text;
};

struct ProcessSpec {
  std::vector<std::string> argv;
  std::filesystem::path cwd;
  // Environment as NAME=VALUE entries; nullopt inherits nothing but PATH.
  std::vector<std::string> env;
  std::chrono::milliseconds timeout{10000};
  std::optional<std::string> stdin_text;
};

// Runs argv[0] (PATH lookup when it has no slash) in its own process group.
// On timeout the whole group is killed. Throws Error(kLaunchFailure) when the
// program cannot be started.
ProcessResult RunProcess(const ProcessSpec& spec);

// Builds an environment from the named variables of the current process.
std::vector<std::string> EnvFromAllowList(
    const std::vector<std::string>& names);

}  // namespace histmut

#endif  // HISTMUT_UTIL_H_
