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

#ifndef HISTMUT_CLI_H_
#define HISTMUT_CLI_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "histmut/fuzz.h"
#include "histmut/miner.h"
#include "histmut/mutator.h"
#include "histmut/triage.h"

namespace histmut {

// Effective tool configuration. Loaded from an INI file whose sections mirror
// the modules; command-line flags override individual keys.
struct ToolConfig {
  // [paths]
  std::filesystem::path data_dir;
  std::filesystem::path seeds;
  std::filesystem::path pack;
  std::filesystem::path classifier;

  // [target]
  TargetConfig target;

  // [llm]
  std::string llm_transport = "replay";  // replay | http
  std::filesystem::path transcripts;
  std::string llm_endpoint = HttpChatConfig{}.endpoint;
  std::vector<std::string> derive_models = {"gpt-4o", "o1-mini"};
  std::string agent_model = "gemini-2.5-pro";
  std::string api_key_env = "OPENAI_API_KEY";

  // [tracker]
  std::string tracker = "fixture";  // fixture | github | bugzilla
  std::string tracker_url;
  std::string tracker_project;  // owner/repo or Bugzilla product
  std::string tracker_compiler = "gcc";
  std::filesystem::path issues;
  std::string since = "2023-01-01";
  std::string until = "2024-10-31";

  // [fuzz]
  size_t jobs = 1;
  double budget_s = 60;
  std::optional<uint64_t> max_files;
  std::optional<uint64_t> max_steps;
  std::optional<size_t> stop_after_unique;
  uint64_t seed = 0;
  std::string coverage = "fixture-tokens";
  bool successful_only = false;

  // [triage]
  std::vector<std::string> helpers = DefaultHelpers();
  bool minimize = true;
};

// Defaults resolved against `data_dir` (the bundled data directory when empty).
ToolConfig DefaultToolConfig();
ToolConfig ParseToolConfig(const std::string& text, const std::string& origin = "<config>");
ToolConfig LoadToolConfig(const std::filesystem::path& path);
// Overlays one `section.key=value` assignment.
void SetConfigValue(ToolConfig& config, const std::string& dotted_key, const std::string& value);
std::string FormatToolConfig(const ToolConfig& config);

CampaignConfig ToCampaignConfig(const ToolConfig& config);

// Bundled data and fixture directories baked in at build time.
std::filesystem::path BundledDataDir();
std::filesystem::path BundledFixturesDir();

// --- mine ---------------------------------------------------------------

struct MineSummary {
  std::vector<MineResult> results;   // issue order
  std::vector<std::string> errors;   // "id: message" for infrastructure failures
  size_t mined = 0;
  std::map<std::string, size_t> rejected_by_stage;  // stage name -> count
  MutatorRegistry pack;
};

// Issues with no transcript file get clients that fail with kTranscriptMiss.
MineSummary MineIssues(const std::vector<IssueRecord>& issues, const ToolConfig& config,
                       const Reviewer& reviewer, size_t jobs);
std::string FormatMineSummary(const MineSummary& summary);
std::unique_ptr<TrackerClient> MakeTracker(const ToolConfig& config);
DateWindow ConfigWindow(const ToolConfig& config);

// --- triage -------------------------------------------------------------

struct TriageResult {
  std::vector<CrashEvent> events;
  std::vector<CrashGroup> groups;
  std::vector<MinimizedChain> minimized;  // parallel to groups
  MutatorStats stats;
};

TriageResult TriageCampaign(const std::filesystem::path& campaign_dir, const ToolConfig& config);
// Writes triage/groups.csv, triage/group-NNN.txt, triage/keys.txt and the
// histogram CSVs under `campaign_dir`.
void WriteTriage(const std::filesystem::path& campaign_dir, const TriageResult& result);

// --- report -------------------------------------------------------------

struct CampaignSummary {
  std::string name;
  std::vector<StatsRow> series;
  std::set<std::string> keys;
  CampaignCounters counters;
  std::map<size_t, size_t> chain_length_histogram;
  std::map<size_t, size_t> bugs_histogram;
};

CampaignSummary SummarizeCampaign(const std::filesystem::path& dir);
// Writes CSVs and SVG plots for one or more campaigns into `out`.
void WriteReport(const std::vector<CampaignSummary>& campaigns, const std::filesystem::path& out);

std::string VennCsv(const std::vector<VennRegion>& regions);
std::string HistogramCsv(const std::map<size_t, size_t>& histogram, const std::string& key_name,
                         const std::string& value_name);
// Line plot of (x, y) series; each named series gets its own polyline.
std::string SvgLinePlot(const std::string& title, const std::string& x_label,
                        const std::string& y_label,
                        const std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>& series);
std::string SvgBarPlot(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::map<size_t, size_t>& bars);

// --- fixture utilities ----------------------------------------------------

struct ReachabilityWitness {
  std::string seed;
  std::string mutator_id;
  std::optional<size_t> site;
  CrashKind kind = CrashKind::kSegmentationFault;
};

// Exhaustive single-mutation oracle: every seed x mutator x match site is
// compiled once. Returns the first witness per dedup key. Seeds that crash on
// their own are reported under `crashing_seeds`.
struct ReachabilityReport {
  std::map<std::string, ReachabilityWitness> keys;
  std::vector<std::string> crashing_seeds;
  size_t compiles = 0;
};
ReachabilityReport SingleMutationReachability(const std::vector<SampleInput>& seeds,
                                              const MutatorRegistry& registry,
                                              const TargetConfig& target,
                                              const std::vector<std::string>& helpers);

// Writes `count` synthetic issue files spread over [begin, end] (all
// fixed-closed, one code block each), plus `distractors` issues that fall
// outside the window or are not fixed.
void WriteSyntheticIssues(const std::filesystem::path& dir, const std::string& compiler,
                          size_t count, const DateWindow& window, size_t distractors,
                          uint64_t seed);

}  // namespace histmut

#endif  // HISTMUT_CLI_H_
