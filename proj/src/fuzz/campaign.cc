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

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "histmut/error.h"
#include "histmut/fuzz.h"
#include "histmut/pack.h"

namespace histmut {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kStateFormat = "histmut-campaign-1";

std::string Numbered(uint64_t id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06llu", static_cast<unsigned long long>(id));
  return buf;
}

std::string Bucket(uint64_t count) {
  if (count <= 3) return std::to_string(count);
  if (count <= 7) return "4-7";
  if (count <= 15) return "8-15";
  if (count <= 31) return "16-31";
  if (count <= 127) return "32-127";
  return "128+";
}

json TargetToJson(const TargetConfig& t) {
  return json{{"command", t.command},
              {"timeout_ms", t.timeout.count()},
              {"env_allow", t.env_allow},
              {"input_name", t.input_name},
              {"collect", t.collect}};
}

TargetConfig TargetFromJson(const json& j) {
  TargetConfig t;
  t.command = j.at("command").get<std::string>();
  t.timeout = std::chrono::milliseconds(j.at("timeout_ms").get<int64_t>());
  t.env_allow = j.at("env_allow").get<std::vector<std::string>>();
  t.input_name = j.at("input_name").get<std::string>();
  t.collect = j.at("collect").get<std::vector<std::string>>();
  return t;
}

template <typename T>
json OptToJson(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> OptFromJson(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

json QueueMeta(const QueueEntry& e) {
  return json{{"id", e.id},
              {"chain", e.chain},
              {"origin_seed", e.origin_seed},
              {"added_at", e.added_at}};
}

void WriteAtomically(const fs::path& path, std::string_view contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  WriteFile(tmp, contents);
  fs::rename(tmp, path);
}

}  // namespace

std::vector<std::string> FixtureTokenCoverage::Observe(const RunOutcome& outcome) const {
  static constexpr std::string_view kPrefix = "fixture-cov: ";
  std::vector<std::string> ids;
  for (const auto& line : SplitLines(outcome.stderr_text)) {
    if (StartsWith(line, kPrefix)) ids.push_back(Trim(line.substr(kPrefix.size())));
  }
  return ids;
}

std::vector<std::string> CoverageFileReader::Observe(const RunOutcome& outcome) const {
  std::vector<std::string> ids;
  auto it = outcome.artifacts.find(path_);
  if (it == outcome.artifacts.end()) return ids;
  for (const auto& line : SplitLines(it->second)) {
    std::istringstream in(line);
    std::string edge;
    uint64_t count = 0;
    if (!(in >> edge >> count) || count == 0) continue;
    ids.push_back(edge + "#" + Bucket(count));
  }
  return ids;
}

std::unique_ptr<CoverageProvider> MakeCoverageProvider(const std::string& spec) {
  if (spec == "fixture-tokens") return std::make_unique<FixtureTokenCoverage>();
  if (StartsWith(spec, "file:") && spec.size() > 5) {
    return std::make_unique<CoverageFileReader>(spec.substr(5));
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown coverage provider '" + spec + "'");
}

bool CoverageMap::IsNew(const std::vector<std::string>& signature) {
  std::lock_guard lock(mu_);
  bool fresh = false;
  for (const auto& id : signature) fresh |= seen_.insert(id).second;
  return fresh;
}

size_t CoverageMap::size() const {
  std::lock_guard lock(mu_);
  return seen_.size();
}

std::vector<std::string> CoverageMap::Snapshot() const {
  std::lock_guard lock(mu_);
  return {seen_.begin(), seen_.end()};
}

std::string_view StepKindName(StepKind k) {
  switch (k) {
    case StepKind::kNoChange: return "NoChange";
    case StepKind::kMutant: return "Mutant";
    case StepKind::kNewCoverage: return "NewCoverage";
    case StepKind::kCrash: return "Crash";
    case StepKind::kInfraError: return "InfraError";
    case StepKind::kStopped: return "Stopped";
  }
  return "?";
}

Campaign::~Campaign() = default;

std::unique_ptr<Campaign> Campaign::Init(const fs::path& seed_dir,
                                         MutatorRegistry registry,
                                         std::unique_ptr<CoverageProvider> coverage,
                                         CampaignConfig config) {
  if (!fs::is_directory(seed_dir)) {
    throw Error(ErrorCode::kEmptyCorpus, "seed directory " + seed_dir.string() +
                                             " does not exist");
  }
  return Init(LoadSample(seed_dir), std::move(registry), std::move(coverage),
              std::move(config));
}

std::unique_ptr<Campaign> Campaign::Init(std::vector<SampleInput> seeds,
                                         MutatorRegistry registry,
                                         std::unique_ptr<CoverageProvider> coverage,
                                         CampaignConfig config) {
  if (seeds.empty()) throw Error(ErrorCode::kEmptyCorpus, "seed corpus is empty");
  if (registry.empty()) {
    throw Error(ErrorCode::kEmptySelection, "mutator registry is empty");
  }
  if (config.workers == 0) {
    throw Error(ErrorCode::kInvalidArgument, "at least one worker is required");
  }
  ValidateTargetConfig(config.target);
  std::unique_ptr<Campaign> c(new Campaign());
  c->config_ = std::move(config);
  c->registry_ = std::move(registry);
  c->coverage_ = coverage ? std::move(coverage) : std::make_unique<FixtureTokenCoverage>();
  for (const auto& a : c->coverage_->Artifacts()) {
    if (std::find(c->config_.target.collect.begin(), c->config_.target.collect.end(),
                  a) == c->config_.target.collect.end()) {
      c->config_.target.collect.push_back(a);
    }
  }
  c->seeds_ = std::move(seeds);
  c->scratch_ = std::make_unique<ScratchDir>(c->config_.target.workdir, "campaign");
  for (const auto& s : c->seeds_) {
    c->queue_.push_back({c->next_entry_id_++, s.text, {}, s.name, 0});
  }
  for (size_t w = 0; w < c->config_.workers; ++w) {
    c->worker_rngs_.emplace_back(SplitSeed(c->config_.seed, w));
  }
  if (c->config_.warm_coverage) {
    for (const auto& s : c->seeds_) {
      RunOutcome o = Compile(c->config_.target, s.text);
      if (o.kind == OutcomeKind::kSuccess) c->coverage_map_.IsNew(c->coverage_->Observe(o));
    }
  }
  std::lock_guard lock(c->mu_);
  c->RecordRow();
  return c;
}

const std::string& Campaign::SeedSource(const std::string& name) const {
  for (const auto& s : seeds_) {
    if (s.name == name) return s.text;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown seed " + name);
}

double Campaign::Elapsed() const {
  return elapsed_before_ +
         std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
}

void Campaign::RecordRow() {
  StatsRow row{Elapsed(), counters_.executions, counters_.crashes_unique,
               coverage_map_.size()};
  if (!series_.empty()) row.timestamp_s = std::max(row.timestamp_s, series_.back().timestamp_s);
  series_.push_back(row);
}

bool Campaign::LimitReached() const {
  if (std::chrono::steady_clock::now() >= run_deadline_) return true;
  if (config_.max_steps && counters_.steps >= *config_.max_steps) return true;
  if (config_.max_files && counters_.executions >= *config_.max_files) return true;
  if (config_.stop_after_unique && counters_.crashes_unique >= *config_.stop_after_unique) {
    return true;
  }
  return false;
}

StepResult Campaign::Step(size_t worker) {
  StepResult result;
  QueueEntry entry;
  std::vector<size_t> active = registry_.ActiveIndices();
  {
    std::lock_guard lock(mu_);
    if (LimitReached()) {
      result.kind = StepKind::kStopped;
      return result;
    }
    ++counters_.steps;
    entry = queue_[cursor_ % queue_.size()];
    ++cursor_;
  }
  Rng& rng = worker_rngs_.at(worker);
  size_t index = picker_ ? picker_(active, rng) : active[rng.Below(active.size())];
  result.entry_id = entry.id;
  result.step.mutator_id = MutatorId(registry_.at(index));
  result.step.seed = rng.Next();

  auto log = [&](const std::string& extra = "") {
    std::string line = "entry=" + std::to_string(entry.id) +
                       " mutator=" + result.step.mutator_id +
                       " seed=" + std::to_string(result.step.seed) + " site=" +
                       (result.step.site ? std::to_string(*result.step.site) : "-") +
                       " result=" + std::string(StepKindName(result.kind)) + extra;
    std::lock_guard lock(mu_);
    log_.push_back("step=" + std::to_string(log_.size()) + " worker=" +
                   std::to_string(worker) + " " + line);
  };

  MutationResult mutation;
  try {
    Rng mutation_rng(result.step.seed);
    mutation = registry_.Apply(index, entry.source, mutation_rng, scratch_->path());
  } catch (const Error& e) {
    result.kind = StepKind::kInfraError;
    {
      std::lock_guard lock(mu_);
      ++counters_.infra_errors;
    }
    log(std::string(" error=") + std::string(ErrorCodeName(e.code())));
    return result;
  }
  result.step.site = mutation.site_chosen;
  if (!mutation.changed) {
    result.kind = StepKind::kNoChange;
    log();
    return result;
  }

  RunOutcome outcome;
  try {
    outcome = Compile(config_.target, mutation.output);
  } catch (const Error& e) {
    result.kind = StepKind::kInfraError;
    {
      std::lock_guard lock(mu_);
      ++counters_.infra_errors;
    }
    log(std::string(" error=") + std::string(ErrorCodeName(e.code())));
    return result;
  }

  if (outcome.kind == OutcomeKind::kCrash) {
    result.kind = StepKind::kCrash;
    DedupKey key = KeyOf(outcome, config_.helpers);
    std::string key_text = key.ToString();
    {
      std::lock_guard lock(mu_);
      ++counters_.executions;
      ++counters_.files_generated;
      ++counters_.crashes_raw;
      CrashEvent event;
      event.id = next_crash_id_++;
      event.parent_id = entry.id;
      event.parent_chain = entry.chain;
      event.origin_seed = entry.origin_seed;
      event.final_step = result.step;
      event.input = mutation.output;
      event.outcome = std::move(outcome);
      event.wall_offset_s = Elapsed();
      event.execution = counters_.executions;
      if (unique_keys_[key_text]++ == 0) {
        ++counters_.crashes_unique;
        RecordRow();
      }
      crashes_.push_back(event);
      result.crash = std::move(event);
    }
    log(" kind=" + std::string(CrashKindName(*result.crash->outcome.crash)) +
        " key=" + key_text);
    return result;
  }

  bool fresh = false;
  if (outcome.kind == OutcomeKind::kSuccess) {
    fresh = coverage_map_.IsNew(coverage_->Observe(outcome));
  }
  {
    std::lock_guard lock(mu_);
    ++counters_.executions;
    ++counters_.files_generated;
    if (fresh) {
      QueueEntry child;
      child.id = next_entry_id_++;
      child.source = std::move(mutation.output);
      child.chain = entry.chain;
      child.chain.push_back(result.step);
      child.origin_seed = entry.origin_seed;
      child.added_at = counters_.executions;
      queue_.push_back(std::move(child));
      RecordRow();
    }
  }
  result.kind = fresh ? StepKind::kNewCoverage : StepKind::kMutant;
  log(outcome.kind == OutcomeKind::kCompileError ? " outcome=CompileError" : "");
  return result;
}

CampaignReport Campaign::Run() {
  {
    std::lock_guard lock(mu_);
    started_ = std::chrono::steady_clock::now();
    run_deadline_ = started_ + config_.budget;
  }
  auto work = [this](size_t w) {
    while (Step(w).kind != StepKind::kStopped) {
    }
  };
  if (config_.workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (size_t w = 0; w < config_.workers; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }
  std::lock_guard lock(mu_);
  RecordRow();
  elapsed_before_ = Elapsed();
  started_ = std::chrono::steady_clock::now();
  run_deadline_ = std::chrono::steady_clock::time_point::max();
  CampaignReport report;
  report.counters = counters_;
  report.series = series_;
  report.queue_size = queue_.size();
  report.coverage_size = coverage_map_.size();
  report.unique_keys = unique_keys_;
  report.elapsed_s = elapsed_before_;
  return report;
}

CampaignReport Campaign::Report() const {
  std::lock_guard lock(mu_);
  CampaignReport report;
  report.counters = counters_;
  report.series = series_;
  report.queue_size = queue_.size();
  report.coverage_size = coverage_map_.size();
  report.unique_keys = unique_keys_;
  report.elapsed_s = elapsed_before_;
  return report;
}

void Campaign::RestrictRegistry(const std::set<std::string>& ids) {
  std::lock_guard lock(mu_);
  registry_.RestrictTo(ids);
}

CampaignCounters Campaign::counters() const {
  std::lock_guard lock(mu_);
  return counters_;
}

std::vector<QueueEntry> Campaign::queue() const {
  std::lock_guard lock(mu_);
  return queue_;
}

std::vector<CrashEvent> Campaign::crashes() const {
  std::lock_guard lock(mu_);
  return crashes_;
}

std::vector<std::string> Campaign::run_log() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::vector<StatsRow> Campaign::series() const {
  std::lock_guard lock(mu_);
  return series_;
}

void Campaign::Persist(const fs::path& dir) const {
  std::lock_guard lock(mu_);
  fs::create_directories(dir / "seeds");
  fs::create_directories(dir / "queue");
  fs::create_directories(dir / "crashes" / "raw");
  for (const auto& s : seeds_) {
    fs::path p = dir / "seeds" / s.name;
    if (!fs::exists(p)) WriteFile(p, s.text);
  }
  json queue_ids = json::array();
  for (const auto& e : queue_) {
    std::string stem = Numbered(e.id);
    fs::path src = dir / "queue" / (stem + ".c");
    if (!fs::exists(src)) {
      WriteFile(src, e.source);
      WriteFile(dir / "queue" / (stem + ".meta"), QueueMeta(e).dump(1) + "\n");
    }
    queue_ids.push_back(e.id);
  }
  json crash_ids = json::array();
  for (const auto& c : crashes_) {
    std::string stem = Numbered(c.id);
    fs::path src = dir / "crashes" / "raw" / (stem + ".c");
    if (!fs::exists(src)) {
      WriteFile(src, c.input);
      WriteFile(dir / "crashes" / "raw" / (stem + ".meta"),
                CrashMetaToJson(c).dump(1) + "\n");
    }
    crash_ids.push_back(c.id);
  }
  SaveMutatorPack(registry_, dir / "pack.txt");

  json rows = json::array();
  for (const auto& r : series_) {
    rows.push_back({r.timestamp_s, r.executions, r.unique_crashes, r.coverage_size});
  }
  json rngs = json::array();
  for (const auto& r : worker_rngs_) rngs.push_back(r.SaveState());
  json state{
      {"format", kStateFormat},
      {"config",
       {{"target", TargetToJson(config_.target)},
        {"workers", config_.workers},
        {"budget_ms", config_.budget.count()},
        {"max_files", OptToJson(config_.max_files)},
        {"max_steps", OptToJson(config_.max_steps)},
        {"stop_after_unique", OptToJson(config_.stop_after_unique)},
        {"seed", config_.seed},
        {"warm_coverage", config_.warm_coverage},
        {"helpers", config_.helpers}}},
      {"coverage_provider", coverage_->Spec()},
      {"coverage", coverage_map_.Snapshot()},
      {"counters",
       {{"steps", counters_.steps},
        {"executions", counters_.executions},
        {"files_generated", counters_.files_generated},
        {"crashes_raw", counters_.crashes_raw},
        {"crashes_unique", counters_.crashes_unique},
        {"infra_errors", counters_.infra_errors}}},
      {"cursor", cursor_},
      {"next_entry_id", next_entry_id_},
      {"next_crash_id", next_crash_id_},
      {"rngs", rngs},
      {"queue", queue_ids},
      {"crashes", crash_ids},
      {"unique_keys", unique_keys_},
      {"series", rows},
      {"elapsed_s", elapsed_before_},
      {"seeds", [&] {
         json names = json::array();
         for (const auto& s : seeds_) names.push_back(s.name);
         return names;
       }()},
  };
  WriteFile(dir / "run.log", Join(log_, "\n") + (log_.empty() ? "" : "\n"));
  WriteFile(dir / "stats.csv", FormatStatsCsv(series_));
  WriteAtomically(dir / "campaign.state", state.dump(1) + "\n");
}

std::unique_ptr<Campaign> Campaign::Resume(const fs::path& dir) {
  auto corrupt = [&](const std::string& why) {
    return Error(ErrorCode::kCorruptState, dir.string() + ": " + why);
  };
  fs::path state_path = dir / "campaign.state";
  if (!fs::exists(state_path)) throw corrupt("missing campaign.state");
  json state;
  try {
    state = json::parse(ReadFile(state_path));
  } catch (const json::exception& e) {
    throw corrupt(std::string("unreadable campaign.state: ") + e.what());
  }
  try {
    if (state.at("format") != kStateFormat) throw corrupt("unknown state format");
    std::unique_ptr<Campaign> c(new Campaign());
    const json& cfg = state.at("config");
    c->config_.target = TargetFromJson(cfg.at("target"));
    c->config_.workers = cfg.at("workers").get<size_t>();
    c->config_.budget = std::chrono::milliseconds(cfg.at("budget_ms").get<int64_t>());
    c->config_.max_files = OptFromJson<uint64_t>(cfg.at("max_files"));
    c->config_.max_steps = OptFromJson<uint64_t>(cfg.at("max_steps"));
    c->config_.stop_after_unique = OptFromJson<size_t>(cfg.at("stop_after_unique"));
    c->config_.seed = cfg.at("seed").get<uint64_t>();
    c->config_.warm_coverage = cfg.at("warm_coverage").get<bool>();
    c->config_.helpers = cfg.at("helpers").get<std::vector<std::string>>();

    try {
      c->registry_ = LoadMutatorPack(dir / "pack.txt");
    } catch (const Error& e) {
      throw corrupt(std::string("pack.txt: ") + e.what());
    }
    c->coverage_ = MakeCoverageProvider(state.at("coverage_provider").get<std::string>());
    c->coverage_map_.IsNew(state.at("coverage").get<std::vector<std::string>>());

    for (const auto& name : state.at("seeds")) {
      fs::path p = dir / "seeds" / name.get<std::string>();
      if (!fs::exists(p)) throw corrupt("missing seed " + p.string());
      c->seeds_.push_back({name.get<std::string>(), ReadFile(p)});
    }
    for (const auto& id : state.at("queue")) {
      std::string stem = Numbered(id.get<uint64_t>());
      fs::path src = dir / "queue" / (stem + ".c");
      fs::path meta = dir / "queue" / (stem + ".meta");
      if (!fs::exists(src) || !fs::exists(meta)) throw corrupt("missing queue entry " + stem);
      json m = json::parse(ReadFile(meta));
      QueueEntry e;
      e.id = m.at("id").get<uint64_t>();
      e.chain = m.at("chain").get<Chain>();
      e.origin_seed = m.at("origin_seed").get<std::string>();
      e.added_at = m.at("added_at").get<uint64_t>();
      e.source = ReadFile(src);
      c->queue_.push_back(std::move(e));
    }
    if (c->queue_.empty()) throw corrupt("empty queue");
    for (const auto& id : state.at("crashes")) {
      std::string stem = Numbered(id.get<uint64_t>());
      fs::path src = dir / "crashes" / "raw" / (stem + ".c");
      fs::path meta = dir / "crashes" / "raw" / (stem + ".meta");
      if (!fs::exists(src) || !fs::exists(meta)) throw corrupt("missing crash " + stem);
      c->crashes_.push_back(CrashMetaFromJson(json::parse(ReadFile(meta)), ReadFile(src)));
    }
    const json& counters = state.at("counters");
    c->counters_.steps = counters.at("steps").get<uint64_t>();
    c->counters_.executions = counters.at("executions").get<uint64_t>();
    c->counters_.files_generated = counters.at("files_generated").get<uint64_t>();
    c->counters_.crashes_raw = counters.at("crashes_raw").get<uint64_t>();
    c->counters_.crashes_unique = counters.at("crashes_unique").get<uint64_t>();
    c->counters_.infra_errors = counters.at("infra_errors").get<uint64_t>();
    c->cursor_ = state.at("cursor").get<uint64_t>();
    c->next_entry_id_ = state.at("next_entry_id").get<uint64_t>();
    c->next_crash_id_ = state.at("next_crash_id").get<uint64_t>();
    for (const auto& r : state.at("rngs")) {
      Rng rng;
      rng.RestoreState(r.get<std::string>());
      c->worker_rngs_.push_back(rng);
    }
    if (c->worker_rngs_.size() != c->config_.workers) throw corrupt("worker RNG count mismatch");
    c->unique_keys_ = state.at("unique_keys").get<std::map<std::string, uint64_t>>();
    for (const auto& r : state.at("series")) {
      c->series_.push_back({r.at(0).get<double>(), r.at(1).get<uint64_t>(),
                            r.at(2).get<uint64_t>(), r.at(3).get<uint64_t>()});
    }
    c->elapsed_before_ = state.at("elapsed_s").get<double>();
    if (fs::exists(dir / "run.log")) {
      for (auto& line : SplitLines(ReadFile(dir / "run.log"))) {
        if (!line.empty()) c->log_.push_back(std::move(line));
      }
    }
    c->scratch_ = std::make_unique<ScratchDir>(c->config_.target.workdir, "campaign");
    c->started_ = std::chrono::steady_clock::now();
    return c;
  } catch (const json::exception& e) {
    throw corrupt(std::string("malformed state: ") + e.what());
  }
}

std::string FormatStatsCsv(const std::vector<StatsRow>& rows) {
  std::string out = "timestamp,executions,unique_crashes,coverage_size\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.3f,%llu,%llu,%llu\n", r.timestamp_s,
                  static_cast<unsigned long long>(r.executions),
                  static_cast<unsigned long long>(r.unique_crashes),
                  static_cast<unsigned long long>(r.coverage_size));
    out += buf;
  }
  return out;
}

std::vector<StatsRow> ParseStatsCsv(std::string_view text) {
  std::vector<StatsRow> rows;
  auto lines = SplitLines(text);
  for (size_t i = 1; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    auto f = Split(lines[i], ',');
    if (f.size() != 4) {
      throw Error(ErrorCode::kParseError, "stats.csv line " + std::to_string(i + 1));
    }
    try {
      rows.push_back({std::stod(f[0]), std::stoull(f[1]), std::stoull(f[2]),
                      std::stoull(f[3])});
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParseError, "stats.csv line " + std::to_string(i + 1));
    }
  }
  return rows;
}

}  // namespace histmut
