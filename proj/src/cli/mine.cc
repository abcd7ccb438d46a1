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

#include <atomic>
#include <sstream>
#include <thread>

#include "histmut/cli.h"
#include "histmut/error.h"
#include "histmut/util.h"

namespace histmut {

namespace fs = std::filesystem;

namespace {

MinerLlms LlmsFor(const IssueRecord& issue, const ToolConfig& config,
                  const MinerLlms& live) {
  if (config.llm_transport == "http") return live;
  fs::path file = config.transcripts / (issue.id + ".json");
  if (!config.transcripts.empty() && fs::exists(file)) return LoadReplayLlms(file);
  MinerLlms empty;
  empty.derive.push_back(std::make_shared<ReplayTransport>(
      config.derive_models.empty() ? "replay" : config.derive_models.front(),
      std::map<std::string, std::string>{}, std::vector<std::string>{}));
  empty.agent = std::make_shared<ReplayTransport>(
      config.agent_model, std::map<std::string, std::string>{}, std::vector<std::string>{});
  return empty;
}

}  // namespace

std::unique_ptr<TrackerClient> MakeTracker(const ToolConfig& config) {
  CompilerId compiler = CompilerId::Parse(config.tracker_compiler);
  if (config.tracker == "fixture") {
    if (config.issues.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "fixture tracker needs an issues directory");
    }
    return std::make_unique<FixtureTracker>(config.issues);
  }
  if (config.tracker_url.empty() || config.tracker_project.empty()) {
    throw Error(ErrorCode::kInvalidArgument, config.tracker + " tracker needs url and project");
  }
  if (config.tracker == "github") {
    return std::make_unique<GitHubTracker>(config.tracker_url, config.tracker_project, compiler);
  }
  return std::make_unique<BugzillaTracker>(config.tracker_url, config.tracker_project, compiler);
}

DateWindow ConfigWindow(const ToolConfig& config) {
  auto begin = ParseDate(config.since);
  auto end = ParseDate(config.until);
  if (!begin || !end) {
    throw Error(ErrorCode::kInvalidArgument, "tracker window needs YYYY-MM-DD dates");
  }
  if (*end < *begin) throw Error(ErrorCode::kInvalidArgument, "tracker window ends before it begins");
  return {*begin, *end};
}

MineSummary MineIssues(const std::vector<IssueRecord>& issues, const ToolConfig& config,
                       const Reviewer& reviewer, size_t jobs) {
  PromptTemplates prompts = PromptTemplates::Load(config.data_dir / "prompts");
  MinerOptions options;
  options.target = config.target;
  options.reviewer = reviewer;
  options.prompts = &prompts;

  MinerLlms live;
  if (config.llm_transport == "http") {
    for (const auto& model : config.derive_models) {
      live.derive.push_back(std::make_shared<HttpChatTransport>(
          HttpChatConfig{config.llm_endpoint, model, config.api_key_env}));
    }
    live.agent = std::make_shared<HttpChatTransport>(
        HttpChatConfig{config.llm_endpoint, config.agent_model, config.api_key_env});
  }

  std::vector<std::optional<MineResult>> slots(issues.size());
  std::vector<std::string> failures(issues.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < issues.size(); i = next++) {
      try {
        slots[i] = MineIssue(issues[i], options, LlmsFor(issues[i], config, live), nullptr);
      } catch (const Error& e) {
        failures[i] = issues[i].id + ": " + std::string(ErrorCodeName(e.code())) + ": " + e.what();
      }
    }
  };
  std::vector<std::thread> threads;
  for (size_t t = 1; t < std::max<size_t>(jobs, 1); ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  MineSummary summary;
  for (size_t i = 0; i < issues.size(); ++i) {
    if (!failures[i].empty()) {
      summary.errors.push_back(failures[i]);
      continue;
    }
    MineResult& r = *slots[i];
    if (r.mined) {
      try {
        summary.pack.Add(*r.mutator);
        ++summary.mined;
      } catch (const Error& e) {
        summary.errors.push_back(issues[i].id + ": " + e.what());
      }
    } else {
      ++summary.rejected_by_stage[std::string(MineStageName(*r.stage))];
    }
    summary.results.push_back(std::move(r));
  }
  return summary;
}

std::string FormatMineSummary(const MineSummary& s) {
  std::ostringstream o;
  o << "issue\tresult\tstage\tdetail\n";
  for (const auto& r : s.results) {
    o << r.issue_id << "\t" << (r.mined ? "mined" : "rejected") << "\t"
      << (r.stage ? std::to_string(static_cast<int>(*r.stage)) + "-" +
                        std::string(MineStageName(*r.stage))
                  : "-")
      << "\t" << r.reason;
    if (r.mined) o << " (" << MutatorId(*r.mutator) << ", refinements " << r.refinements << ")";
    o << "\n";
  }
  for (const auto& e : s.errors) o << "error\t" << e << "\n";
  o << "mined: " << s.mined << "\n";
  for (auto stage : {MineStage::kExtract, MineStage::kDerive, MineStage::kReview,
                     MineStage::kGenerate}) {
    std::string name(MineStageName(stage));
    auto it = s.rejected_by_stage.find(name);
    o << "rejected at " << static_cast<int>(stage) << "-" << name << ": "
      << (it == s.rejected_by_stage.end() ? 0 : it->second) << "\n";
  }
  o << "errors: " << s.errors.size() << "\n";
  return o.str();
}

}  // namespace histmut
