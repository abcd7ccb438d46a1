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

#include <sstream>

#include "histmut/cli.h"
#include "histmut/error.h"
#include "histmut/util.h"

namespace histmut {

namespace fs = std::filesystem;

ReachabilityReport SingleMutationReachability(const std::vector<SampleInput>& seeds,
                                              const MutatorRegistry& registry,
                                              const TargetConfig& target,
                                              const std::vector<std::string>& helpers) {
  ReachabilityReport report;
  ScratchDir scratch;
  auto record = [&](const std::string& seed, const std::string& id, std::optional<size_t> site,
                    const std::string& text) {
    RunOutcome outcome = Compile(target, text);
    ++report.compiles;
    if (outcome.kind != OutcomeKind::kCrash) return;
    std::string key = KeyOf(outcome, helpers).ToString();
    report.keys.try_emplace(key, ReachabilityWitness{seed, id, site, *outcome.crash});
  };
  for (const auto& seed : seeds) {
    RunOutcome base = Compile(target, seed.text);
    ++report.compiles;
    if (base.kind == OutcomeKind::kCrash) report.crashing_seeds.push_back(seed.name);
    for (size_t i = 0; i < registry.size(); ++i) {
      const Mutator& m = registry.at(i);
      if (const auto* rule = std::get_if<RewriteRule>(&m)) {
        auto compiled = CompiledRewrite::Compile(*rule);
        if (rule->scope == Scope::kRandomMatchSite) {
          size_t sites = compiled->CountSites(seed.text);
          for (size_t s = 0; s < sites; ++s) {
            MutationResult r = compiled->ApplyAtSite(seed.text, s);
            if (r.changed) record(seed.name, rule->id, s, r.output);
          }
        } else {
          Rng rng(0);
          MutationResult r = compiled->Apply(seed.text, rng);
          if (r.changed) record(seed.name, rule->id, std::nullopt, r.output);
        }
      } else {
        try {
          MutationResult r = ApplyExternal(std::get<ExternalMutator>(m), seed.text, scratch.path());
          if (r.changed) record(seed.name, MutatorId(m), std::nullopt, r.output);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kPluginTimeout && e.code() != ErrorCode::kPluginNonZeroExit) {
            throw;
          }
        }
      }
    }
  }
  return report;
}

void WriteSyntheticIssues(const fs::path& dir, const std::string& compiler, size_t count,
                          const DateWindow& window, size_t distractors, uint64_t seed) {
  fs::create_directories(dir);
  using std::chrono::sys_days;
  const auto first = sys_days(window.begin);
  const auto span = (sys_days(window.end) - first).count() + 1;
  Rng rng(seed);
  auto write = [&](const std::string& id, const std::string& status, const Date& date,
                   size_t n) {
    std::ostringstream o;
    o << "id: " << id << "\ncompiler: " << compiler << "\nstatus: " << status
      << "\ncreated_at: " << FormatDate(date) << "\ntitle: synthetic report " << n
      << "\ncomponent: synthetic\n--- body\nReduced input:\n\n```c\nint f" << n
      << "(int x) { return x + " << n << "; }\n```\n";
    WriteFile(dir / (id + ".issue"), o.str());
  };
  for (size_t i = 0; i < count; ++i) {
    auto day = first + std::chrono::days(static_cast<int64_t>(rng.Below(static_cast<uint64_t>(span))));
    write(compiler + "-" + std::to_string(i), "fixed-closed", Date(day), i);
  }
  for (size_t i = 0; i < distractors; ++i) {
    std::string id = compiler + "-x" + std::to_string(i);
    if (i % 2 == 0) {
      auto day = first + std::chrono::days(static_cast<int64_t>(rng.Below(static_cast<uint64_t>(span))));
      write(id, "open", Date(day), count + i);
    } else {
      write(id, "fixed-closed", Date(first - std::chrono::days(1 + static_cast<int64_t>(i))), count + i);
    }
  }
}

}  // namespace histmut
