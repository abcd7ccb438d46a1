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

#ifndef HISTMUT_TRACKER_H_
#define HISTMUT_TRACKER_H_

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace histmut {

enum class CompilerKind { kGcc, kLlvm, kOther };

struct CompilerId {
  CompilerKind kind = CompilerKind::kOther;
  std::string name;  // "gcc", "llvm" or the other compiler's name

  static CompilerId Parse(std::string_view s);
  bool operator==(const CompilerId&) const = default;
};

enum class IssueStatus { kFixedClosed, kOther };

using Date = std::chrono::year_month_day;

// Parses YYYY-MM-DD (a longer ISO timestamp is truncated to its date).
std::optional<Date> ParseDate(std::string_view s);
std::string FormatDate(const Date& d);

struct DateWindow {
  Date begin;  // inclusive
  Date end;    // inclusive

  bool Contains(const Date& d) const { return begin <= d && d <= end; }
};

struct Attachment {
  std::string name;
  std::string body;
};

struct IssueRecord {
  std::string id;
  CompilerId compiler;
  IssueStatus status = IssueStatus::kOther;
  Date created_at{};
  std::string title;
  std::string discussion;
  std::vector<std::string> code_blocks;
  std::map<std::string, std::string> metadata;  // component, keywords, ...
};

// Code blocks in priority order: attachments, then fenced blocks, then runs of
// lines tagged `### FILE ###` (tags stripped, consecutive lines joined).
std::vector<std::string> ExtractCodeBlocks(const std::vector<Attachment>& attachments,
                                           std::string_view body);

class TrackerClient {
 public:
  virtual ~TrackerClient() = default;
  // All issues the tracker reports for the window; filtering happens in
  // ScrapeIssues.
  virtual std::vector<IssueRecord> Fetch(const DateWindow& window) = 0;
};

// Reads `*.issue` files: `key: value` header lines, then sections introduced by
// `--- attachment NAME` or `--- body`.
class FixtureTracker : public TrackerClient {
 public:
  explicit FixtureTracker(std::filesystem::path dir) : dir_(std::move(dir)) {}
  std::vector<IssueRecord> Fetch(const DateWindow& window) override;

  static IssueRecord ParseIssueFile(std::string_view text, std::string_view origin);

 private:
  std::filesystem::path dir_;
};

struct HttpRetryPolicy {
  int max_retries = 4;
  std::chrono::milliseconds initial_backoff{1000};
};

// GitHub-style REST issues API.
class GitHubTracker : public TrackerClient {
 public:
  GitHubTracker(std::string base_url, std::string owner_repo,
                CompilerId compiler, std::string token_env = "GITHUB_TOKEN",
                HttpRetryPolicy retry = {});
  std::vector<IssueRecord> Fetch(const DateWindow& window) override;

 private:
  std::string base_url_;
  std::string owner_repo_;
  CompilerId compiler_;
  std::string token_env_;
  HttpRetryPolicy retry_;
};

// Bugzilla REST API (/rest/bug, /rest/bug/ID/comment, /rest/bug/ID/attachment).
class BugzillaTracker : public TrackerClient {
 public:
  BugzillaTracker(std::string base_url, std::string product, CompilerId compiler,
                  HttpRetryPolicy retry = {});
  std::vector<IssueRecord> Fetch(const DateWindow& window) override;

 private:
  std::string base_url_;
  std::string product_;
  CompilerId compiler_;
  HttpRetryPolicy retry_;
};

// Fixed-and-closed issues created inside `window`, in creation order.
std::vector<IssueRecord> ScrapeIssues(TrackerClient& tracker, const DateWindow& window);

}  // namespace histmut

#endif  // HISTMUT_TRACKER_H_
