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

#include "histmut/tracker.h"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdlib>
#include <thread>

#include <nlohmann/json.hpp>

#include "histmut/error.h"
#include "histmut/util.h"
#include "http.h"

namespace histmut {

using nlohmann::json;

CompilerId CompilerId::Parse(std::string_view s) {
  std::string lower = ToLower(Trim(s));
  if (lower == "gcc") return {CompilerKind::kGcc, "gcc"};
  if (lower == "llvm" || lower == "clang") return {CompilerKind::kLlvm, "llvm"};
  if (lower.empty()) throw Error(ErrorCode::kParseError, "empty compiler name");
  return {CompilerKind::kOther, lower};
}

std::optional<Date> ParseDate(std::string_view s) {
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto num = [&](size_t pos, size_t len) -> std::optional<int> {
    int v = 0;
    for (size_t i = pos; i < pos + len; ++i) {
      if (s[i] < '0' || s[i] > '9') return std::nullopt;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  auto y = num(0, 4), m = num(5, 2), d = num(8, 2);
  if (!y || !m || !d) return std::nullopt;
  Date date{std::chrono::year(*y), std::chrono::month(*m), std::chrono::day(*d)};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string FormatDate(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

namespace {

constexpr std::string_view kFileTag = "### FILE ###";

std::vector<std::string> FencedBlocks(std::string_view body) {
  std::vector<std::string> blocks;
  std::vector<std::string> lines = SplitLines(body);
  bool inside = false;
  std::vector<std::string> current;
  for (const std::string& line : lines) {
    std::string t = Trim(line);
    if (StartsWith(t, "```")) {
      if (inside) {
        std::string block = TrimRight(Join(current, "\n"));
        if (!Trim(block).empty()) blocks.push_back(block);
        current.clear();
      }
      inside = !inside;
      continue;
    }
    if (inside) current.push_back(line);
  }
  return blocks;
}

std::vector<std::string> TaggedBlocks(std::string_view body) {
  std::vector<std::string> blocks;
  std::vector<std::string> current;
  auto flush = [&] {
    if (!current.empty()) blocks.push_back(Join(current, "\n"));
    current.clear();
  };
  for (const std::string& line : SplitLines(body)) {
    size_t pos = line.find(kFileTag);
    if (pos == std::string::npos) {
      flush();
      continue;
    }
    current.push_back(TrimRight(line.substr(0, pos)));
  }
  flush();
  return blocks;
}

}  // namespace

std::vector<std::string> ExtractCodeBlocks(const std::vector<Attachment>& attachments,
                                           std::string_view body) {
  std::vector<std::string> blocks;
  for (const Attachment& a : attachments) {
    std::string text = TrimRight(a.body);
    if (!Trim(text).empty()) blocks.push_back(text);
  }
  if (!blocks.empty()) return blocks;
  blocks = FencedBlocks(body);
  if (!blocks.empty()) return blocks;
  return TaggedBlocks(body);
}

IssueRecord FixtureTracker::ParseIssueFile(std::string_view text, std::string_view origin) {
  IssueRecord issue;
  std::vector<Attachment> attachments;
  std::string body;
  std::vector<std::string> lines = SplitLines(text);
  size_t i = 0;
  bool have_date = false;
  auto fail = [&](size_t line, const std::string& msg) {
    throw Error(ErrorCode::kParseError,
                std::string(origin) + ":" + std::to_string(line + 1) + ": " + msg);
  };
  for (; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (StartsWith(line, "---")) break;
    if (Trim(line).empty() || StartsWith(Trim(line), "#")) continue;
    size_t colon = line.find(':');
    if (colon == std::string::npos) fail(i, "expected 'key: value'");
    std::string key = ToLower(Trim(line.substr(0, colon)));
    std::string value = Trim(line.substr(colon + 1));
    if (key == "id") {
      issue.id = value;
    } else if (key == "compiler") {
      issue.compiler = CompilerId::Parse(value);
    } else if (key == "status") {
      issue.status = value == "fixed-closed" ? IssueStatus::kFixedClosed : IssueStatus::kOther;
    } else if (key == "created_at") {
      auto date = ParseDate(value);
      if (!date) fail(i, "bad date '" + value + "'");
      issue.created_at = *date;
      have_date = true;
    } else if (key == "title") {
      issue.title = value;
    } else {
      issue.metadata[key] = value;
    }
  }
  // Sections.
  while (i < lines.size()) {
    std::string header = Trim(lines[i].substr(3));
    std::vector<std::string> content;
    for (++i; i < lines.size() && !StartsWith(lines[i], "--- "); ++i) {
      content.push_back(lines[i]);
    }
    std::string joined = Join(content, "\n");
    if (header == "body") {
      body = joined;
    } else if (StartsWith(header, "attachment")) {
      std::string name = Trim(header.substr(10));
      attachments.push_back({name.empty() ? "attachment" : name, joined});
    } else {
      fail(i - content.size() - 1, "unknown section '" + header + "'");
    }
  }
  if (issue.id.empty()) fail(0, "missing id");
  if (!have_date) fail(0, "missing created_at");
  issue.discussion = TrimRight(body);
  issue.code_blocks = ExtractCodeBlocks(attachments, body);
  return issue;
}

std::vector<IssueRecord> FixtureTracker::Fetch(const DateWindow&) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir_, ec)) {
    throw Error(ErrorCode::kTrackerUnavailable,
                "issue directory not found: " + dir_.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".issue") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<IssueRecord> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(ParseIssueFile(ReadFile(f), f.string()));
  return out;
}

namespace {

json GetJson(const std::string& base_url, const std::string& path_and_query,
             const internal::Headers& headers, const HttpRetryPolicy& retry) {
  internal::Url url = internal::SplitUrl(base_url);
  std::chrono::milliseconds backoff = retry.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    internal::HttpResponse res =
        internal::HttpGet(url.origin, url.path + path_and_query, headers, 60);
    if (res.status == 0) {
      throw Error(ErrorCode::kTrackerUnavailable, "cannot reach " + url.origin);
    }
    if (res.status == 429) {
      if (attempt >= retry.max_retries) {
        throw Error(ErrorCode::kRateLimited, "rate limited by " + url.origin + " after " +
                                                 std::to_string(attempt + 1) + " attempts");
      }
      std::chrono::milliseconds wait = backoff;
      if (!res.retry_after.empty()) {
        char* end = nullptr;
        long secs = std::strtol(res.retry_after.c_str(), &end, 10);
        if (end && *end == '\0' && secs >= 0) {
          wait = std::min(std::chrono::milliseconds(secs * 1000), backoff * 8);
        }
      }
      std::this_thread::sleep_for(wait);
      backoff *= 2;
      continue;
    }
    if (res.status != 200) {
      throw Error(ErrorCode::kTrackerUnavailable,
                  url.origin + path_and_query + " answered HTTP " + std::to_string(res.status));
    }
    try {
      return json::parse(res.body);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedResponse,
                  url.origin + path_and_query + ": invalid JSON: " + e.what());
    }
  }
}

std::string Base64Decode(const std::string& in) {
  std::string clean;
  for (char c : in) {
    if (!std::isspace(static_cast<unsigned char>(c))) clean.push_back(c);
  }
  if (clean.size() % 4 != 0) throw Error(ErrorCode::kMalformedResponse, "bad base64 length");
  std::string out(clean.size() / 4 * 3, '\0');
  int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                          reinterpret_cast<const unsigned char*>(clean.data()),
                          static_cast<int>(clean.size()));
  if (n < 0) throw Error(ErrorCode::kMalformedResponse, "bad base64 data");
  size_t pad = 0;
  if (!clean.empty() && clean.back() == '=') ++pad;
  if (clean.size() > 1 && clean[clean.size() - 2] == '=') ++pad;
  out.resize(static_cast<size_t>(n) - pad);
  return out;
}

std::string StrOr(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) return {};
  return it->get<std::string>();
}

}  // namespace

GitHubTracker::GitHubTracker(std::string base_url, std::string owner_repo,
                             CompilerId compiler, std::string token_env, HttpRetryPolicy retry)
    : base_url_(std::move(base_url)),
      owner_repo_(std::move(owner_repo)),
      compiler_(std::move(compiler)),
      token_env_(std::move(token_env)),
      retry_(retry) {}

std::vector<IssueRecord> GitHubTracker::Fetch(const DateWindow& window) {
  internal::Headers headers{{"Accept", "application/vnd.github+json"},
                            {"User-Agent", "histmut"}};
  if (const char* token = std::getenv(token_env_.c_str())) {
    headers.emplace_back("Authorization", std::string("Bearer ") + token);
  }
  const std::string prefix = "/repos/" + owner_repo_;
  constexpr int kPerPage = 100;
  std::vector<IssueRecord> out;
  try {
    for (int page = 1;; ++page) {
      json items = GetJson(base_url_,
                           prefix + "/issues?state=closed&per_page=" +
                               std::to_string(kPerPage) + "&page=" + std::to_string(page) +
                               "&since=" + FormatDate(window.begin) + "T00:00:00Z",
                           headers, retry_);
      if (!items.is_array()) {
        throw Error(ErrorCode::kMalformedResponse, "issues listing is not an array");
      }
      for (const json& item : items) {
        if (item.contains("pull_request")) continue;
        IssueRecord issue;
        issue.id = std::to_string(item.at("number").get<long long>());
        issue.compiler = compiler_;
        issue.status = StrOr(item, "state") == "closed" &&
                               StrOr(item, "state_reason") == "completed"
                           ? IssueStatus::kFixedClosed
                           : IssueStatus::kOther;
        auto date = ParseDate(StrOr(item, "created_at"));
        if (!date) throw Error(ErrorCode::kMalformedResponse, "issue without created_at");
        issue.created_at = *date;
        issue.title = StrOr(item, "title");
        std::vector<std::string> labels;
        if (auto it = item.find("labels"); it != item.end() && it->is_array()) {
          for (const json& l : *it) {
            labels.push_back(l.is_string() ? l.get<std::string>() : StrOr(l, "name"));
          }
        }
        if (!labels.empty()) issue.metadata["keywords"] = Join(labels, ", ");
        std::string discussion = StrOr(item, "body");
        if (issue.status == IssueStatus::kFixedClosed && window.Contains(issue.created_at) &&
            item.value("comments", 0) > 0) {
          json comments = GetJson(base_url_, prefix + "/issues/" + issue.id + "/comments",
                                  headers, retry_);
          for (const json& c : comments) discussion += "\n\n" + StrOr(c, "body");
        }
        issue.discussion = TrimRight(discussion);
        issue.code_blocks = ExtractCodeBlocks({}, discussion);
        out.push_back(std::move(issue));
      }
      if (items.size() < static_cast<size_t>(kPerPage)) break;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedResponse, std::string("GitHub payload: ") + e.what());
  }
  return out;
}

BugzillaTracker::BugzillaTracker(std::string base_url, std::string product,
                                 CompilerId compiler, HttpRetryPolicy retry)
    : base_url_(std::move(base_url)),
      product_(std::move(product)),
      compiler_(std::move(compiler)),
      retry_(retry) {}

std::vector<IssueRecord> BugzillaTracker::Fetch(const DateWindow& window) {
  constexpr int kLimit = 500;
  std::vector<IssueRecord> out;
  try {
    for (int offset = 0;; offset += kLimit) {
      json page = GetJson(
          base_url_,
          "/rest/bug?product=" + internal::UrlEncode(product_) +
              "&resolution=FIXED&creation_time=" + FormatDate(window.begin) +
              "&include_fields=id,summary,status,resolution,creation_time,component,keywords"
              "&limit=" + std::to_string(kLimit) + "&offset=" + std::to_string(offset),
          {}, retry_);
      const json& bugs = page.at("bugs");
      for (const json& bug : bugs) {
        IssueRecord issue;
        issue.id = std::to_string(bug.at("id").get<long long>());
        issue.compiler = compiler_;
        std::string status = StrOr(bug, "status");
        issue.status = StrOr(bug, "resolution") == "FIXED" &&
                               (status == "RESOLVED" || status == "VERIFIED" ||
                                status == "CLOSED")
                           ? IssueStatus::kFixedClosed
                           : IssueStatus::kOther;
        auto date = ParseDate(StrOr(bug, "creation_time"));
        if (!date) throw Error(ErrorCode::kMalformedResponse, "bug without creation_time");
        issue.created_at = *date;
        issue.title = StrOr(bug, "summary");
        if (std::string c = StrOr(bug, "component"); !c.empty()) issue.metadata["component"] = c;
        if (auto it = bug.find("keywords"); it != bug.end() && it->is_array()) {
          issue.metadata["keywords"] = Join(it->get<std::vector<std::string>>(), ", ");
        }
        if (issue.status == IssueStatus::kFixedClosed && window.Contains(issue.created_at)) {
          json comments = GetJson(base_url_, "/rest/bug/" + issue.id + "/comment", {}, retry_);
          std::vector<std::string> texts;
          for (const json& c : comments.at("bugs").at(issue.id).at("comments")) {
            texts.push_back(StrOr(c, "text"));
          }
          issue.discussion = TrimRight(Join(texts, "\n\n"));
          json atts = GetJson(base_url_, "/rest/bug/" + issue.id + "/attachment", {}, retry_);
          std::vector<Attachment> attachments;
          for (const json& a : atts.at("bugs").at(issue.id)) {
            if (a.value("is_patch", 0) != 0 || a.value("is_obsolete", 0) != 0) continue;
            attachments.push_back({StrOr(a, "file_name"), Base64Decode(StrOr(a, "data"))});
          }
          issue.code_blocks = ExtractCodeBlocks(attachments, issue.discussion);
        }
        out.push_back(std::move(issue));
      }
      if (bugs.size() < static_cast<size_t>(kLimit)) break;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedResponse, std::string("Bugzilla payload: ") + e.what());
  }
  return out;
}

std::vector<IssueRecord> ScrapeIssues(TrackerClient& tracker, const DateWindow& window) {
  std::vector<IssueRecord> all = tracker.Fetch(window);
  std::vector<IssueRecord> out;
  for (IssueRecord& issue : all) {
    if (issue.status == IssueStatus::kFixedClosed && window.Contains(issue.created_at)) {
      out.push_back(std::move(issue));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const IssueRecord& a, const IssueRecord& b) {
    return a.created_at < b.created_at;
  });
  return out;
}

}  // namespace histmut
