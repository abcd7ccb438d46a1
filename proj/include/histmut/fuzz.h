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

#ifndef HISTMUT_FUZZ_H_
#define HISTMUT_FUZZ_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "histmut/chain.h"
#include "histmut/mutator.h"
#include "histmut/rng.h"
#include "histmut/runner.h"
#include "histmut/triage.h"
#include "histmut/util.h"

namespace histmut {

// Turns a run into a coverage signature (a set of branch ids).
class CoverageProvider {
 public:
  virtual ~CoverageProvider() = default;
  virtual std::vector<std::string> Observe(const RunOutcome& outcome) const = 0;
  // Files the target must leave in its run directory.
  virtual std::vector<std::string> Artifacts() const { return {}; }
  // Stable description, persisted so a resumed campaign rebuilds it.
  virtual std::string Spec() const = 0;
};

// Reads the `fixture-cov: <id>` lines the fixture compiler prints on stderr.
class FixtureTokenCoverage : public CoverageProvider {
 public:
  std::vector<std::string> Observe(const RunOutcome& outcome) const override;
  std::string Spec() const override { return "fixture-tokens"; }
};

// Reads a per-run edge-count dump (`<edge-id> <count>` per line) left by the
// target at a run-directory-relative path. Counts are bucketed AFL-style.
class CoverageFileReader : public CoverageProvider {
 public:
  explicit CoverageFileReader(std::string relative_path)
      : path_(std::move(relative_path)) {}
  std::vector<std::string> Observe(const RunOutcome& outcome) const override;
  std::vector<std::string> Artifacts() const override { return {path_}; }
  std::string Spec() const override { return "file:" + path_; }

 private:
  std::string path_;
};

// Builds a provider from its Spec() string.
std::unique_ptr<CoverageProvider> MakeCoverageProvider(const std::string& spec);

// Global set of observed branch ids. Thread-safe.
class CoverageMap {
 public:
  // Inserts the signature; true when at least one id was unseen.
  bool IsNew(const std::vector<std::string>& signature);
  size_t size() const;
  std::vector<std::string> Snapshot() const;

 private:
  mutable std::mutex mu_;
  std::set<std::string> seen_;
};

struct CampaignConfig {
  TargetConfig target;
  size_t workers = 1;
  std::chrono::milliseconds budget{60000};
  std::optional<uint64_t> max_files;          // cap on compile invocations
  std::optional<uint64_t> max_steps;          // cap on fuzz steps (all kinds)
  std::optional<size_t> stop_after_unique;    // stop once this many groups exist
  uint64_t seed = 0;
  bool warm_coverage = false;
  std::vector<std::string> helpers = DefaultHelpers();
};

struct CampaignCounters {
  uint64_t steps = 0;
  uint64_t executions = 0;
  uint64_t files_generated = 0;
  uint64_t crashes_raw = 0;
  uint64_t crashes_unique = 0;
  uint64_t infra_errors = 0;

  bool operator==(const CampaignCounters&) const = default;
};

struct StatsRow {
  double timestamp_s = 0;
  uint64_t executions = 0;
  uint64_t unique_crashes = 0;
  uint64_t coverage_size = 0;
};

enum class StepKind { kNoChange, kMutant, kNewCoverage, kCrash, kInfraError, kStopped };

std::string_view StepKindName(StepKind k);

struct StepResult {
  StepKind kind = StepKind::kNoChange;
  uint64_t entry_id = 0;
  ChainStep step;
  std::optional<CrashEvent> crash;
};

struct CampaignReport {
  CampaignCounters counters;
  std::vector<StatsRow> series;
  size_t queue_size = 0;
  size_t coverage_size = 0;
  std::map<std::string, uint64_t> unique_keys;  // dedup key -> raw hits
  double elapsed_s = 0;
};

// Picks a mutator index among `active`. The default is uniform.
using MutatorPicker = std::function<size_t(const std::vector<size_t>& active, Rng& rng)>;

class Campaign {
 public:
  // Seeds the queue from every file under `seed_dir`. Throws kEmptyCorpus.
  static std::unique_ptr<Campaign> Init(const std::filesystem::path& seed_dir,
                                        MutatorRegistry registry,
                                        std::unique_ptr<CoverageProvider> coverage,
                                        CampaignConfig config);
  static std::unique_ptr<Campaign> Init(std::vector<SampleInput> seeds,
                                        MutatorRegistry registry,
                                        std::unique_ptr<CoverageProvider> coverage,
                                        CampaignConfig config);
  // Restores a persisted campaign. Throws kCorruptState.
  static std::unique_ptr<Campaign> Resume(const std::filesystem::path& dir);

  ~Campaign();

  // One fuzzing iteration on behalf of `worker`.
  StepResult Step(size_t worker);
  // Runs config().workers threads until a limit is reached.
  CampaignReport Run();

  void RestrictRegistry(const std::set<std::string>& ids);
  void SetMutatorPicker(MutatorPicker picker) { picker_ = std::move(picker); }

  void Persist(const std::filesystem::path& dir) const;

  CampaignConfig& config() { return config_; }
  const CampaignConfig& config() const { return config_; }
  const MutatorRegistry& registry() const { return registry_; }
  CampaignCounters counters() const;
  std::vector<QueueEntry> queue() const;
  std::vector<CrashEvent> crashes() const;
  std::vector<std::string> run_log() const;
  std::vector<StatsRow> series() const;
  size_t coverage_size() const { return coverage_map_.size(); }
  const std::vector<SampleInput>& seeds() const { return seeds_; }
  const std::string& SeedSource(const std::string& name) const;
  CampaignReport Report() const;

 private:
  Campaign() = default;
  bool LimitReached() const;  // requires mu_
  void RecordRow();           // requires mu_
  double Elapsed() const;

  CampaignConfig config_;
  MutatorRegistry registry_;
  std::unique_ptr<CoverageProvider> coverage_;
  CoverageMap coverage_map_;
  std::vector<SampleInput> seeds_;
  std::unique_ptr<ScratchDir> scratch_;
  MutatorPicker picker_;

  mutable std::mutex mu_;
  std::vector<QueueEntry> queue_;
  uint64_t cursor_ = 0;
  uint64_t next_entry_id_ = 0;
  uint64_t next_crash_id_ = 0;
  std::vector<Rng> worker_rngs_;
  CampaignCounters counters_;
  std::vector<CrashEvent> crashes_;
  std::map<std::string, uint64_t> unique_keys_;
  std::vector<StatsRow> series_;
  std::vector<std::string> log_;
  double elapsed_before_ = 0;
  std::chrono::steady_clock::time_point started_ = std::chrono::steady_clock::now();
  std::chrono::steady_clock::time_point run_deadline_ =
      std::chrono::steady_clock::time_point::max();
};

// Writes `stats.csv` rows (timestamp, executions, unique_crashes,
// coverage_size).
std::string FormatStatsCsv(const std::vector<StatsRow>& rows);
std::vector<StatsRow> ParseStatsCsv(std::string_view text);

}  // namespace histmut

#endif  // HISTMUT_FUZZ_H_
