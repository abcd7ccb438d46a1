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
#include <cstdio>
#include <sstream>
#include <thread>

#include "histmut/cli.h"
#include "histmut/error.h"
#include "histmut/util.h"

namespace histmut {

namespace fs = std::filesystem;

namespace {

std::string Numbered(uint64_t id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06llu", static_cast<unsigned long long>(id));
  return buf;
}

std::string ChainText(const Chain& chain) {
  std::vector<std::string> parts;
  for (const auto& s : chain) parts.push_back(s.mutator_id);
  return parts.empty() ? "-" : Join(parts, " > ");
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  return "\"" + ReplaceAll(s, "\"", "\"\"") + "\"";
}

}  // namespace

TriageResult TriageCampaign(const fs::path& campaign_dir, const ToolConfig& config) {
  std::unique_ptr<Campaign> campaign = Campaign::Resume(campaign_dir);
  TriageResult result;
  result.events = campaign->crashes();
  std::optional<ModuleClassifier> classifier;
  if (!config.classifier.empty() && fs::exists(config.classifier)) {
    classifier = ModuleClassifier::Load(config.classifier);
  }
  result.groups = GroupCrashes(result.events, config.helpers,
                               classifier ? &*classifier : nullptr);
  ReplayContext ctx;
  ctx.registry = &campaign->registry();
  ctx.target = campaign->config().target;
  ctx.helpers = config.helpers;

  result.minimized.resize(result.groups.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < result.groups.size(); i = next++) {
      const CrashEvent& rep = result.events[result.groups[i].representative];
      MinimizedChain& m = result.minimized[i];
      if (config.minimize) {
        m = MinimizeChain(rep, campaign->SeedSource(rep.origin_seed), ctx);
      } else {
        m.original = m.minimal = rep.FullChain();
        m.diagnostic = "minimization disabled";
      }
    }
  };
  std::vector<std::thread> threads;
  for (size_t t = 1; t < std::max<size_t>(config.jobs, 1); ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  result.stats = ComputeMutatorStats(result.groups, result.minimized, &campaign->registry());
  return result;
}

void WriteTriage(const fs::path& campaign_dir, const TriageResult& r) {
  fs::path out = campaign_dir / "triage";
  fs::create_directories(out);
  std::ostringstream groups;
  groups << "group,key,kind,module,members,representative,minimal_chain,verified,"
            "single_step_reproducers\n";
  std::vector<std::string> keys;
  for (size_t i = 0; i < r.groups.size(); ++i) {
    const CrashGroup& g = r.groups[i];
    const MinimizedChain& m = r.minimized[i];
    const CrashEvent& rep = r.events[g.representative];
    std::string rep_path = "crashes/raw/" + Numbered(rep.id) + ".c";
    groups << i + 1 << "," << CsvField(g.key.ToString()) << "," << CrashKindName(g.kind) << ","
           << ModuleName(g.module) << "," << g.members.size() << "," << rep_path << ","
           << CsvField(ChainText(m.minimal)) << "," << (m.verified ? "true" : "false") << ","
           << CsvField(ChainText(m.single_step_reproducers)) << "\n";
    keys.push_back(g.key.ToString());

    std::ostringstream t;
    t << "key: " << g.key.ToString() << "\n"
      << "kind: " << CrashKindName(g.kind) << "\n"
      << "module: " << ModuleName(g.module) << "\n"
      << "representative: " << rep_path << "\n"
      << "members: " << g.members.size() << "\n"
      << "original_chain: " << ChainText(m.original) << "\n"
      << "minimal_chain: " << ChainText(m.minimal) << "\n"
      << "verified: " << (m.verified ? "true" : "false") << "\n"
      << "single_step_reproducers: " << ChainText(m.single_step_reproducers) << "\n";
    if (!m.diagnostic.empty()) t << "diagnostic: " << m.diagnostic << "\n";
    char name[32];
    std::snprintf(name, sizeof(name), "group-%03zu.txt", i + 1);
    WriteFile(out / name, t.str());
  }
  WriteFile(out / "groups.csv", groups.str());
  std::sort(keys.begin(), keys.end());
  WriteFile(out / "keys.txt", Join(keys, "\n") + (keys.empty() ? "" : "\n"));

  std::ostringstream per;
  per << "mutator,bugs,action,elements\n";
  for (const auto& [id, e] : r.stats.per_mutator) {
    std::vector<std::string> els;
    for (Element x : e.elements) els.emplace_back(ElementName(x));
    per << CsvField(id) << "," << e.bugs << "," << (e.action ? ActionName(*e.action) : "")
        << "," << CsvField(Join(els, ";")) << "\n";
  }
  WriteFile(out / "mutator_bugs.csv", per.str());
  WriteFile(out / "bugs_histogram.csv", HistogramCsv(r.stats.bugs_histogram, "bugs", "mutators"));
  WriteFile(out / "chain_length_histogram.csv",
            HistogramCsv(r.stats.chain_length_histogram, "chain_length", "crashes"));
  std::ostringstream dist;
  dist << "dimension,tag,count\n";
  for (const auto& [k, v] : r.stats.action_distribution) dist << "action," << k << "," << v << "\n";
  for (const auto& [k, v] : r.stats.element_distribution) dist << "element," << k << "," << v << "\n";
  WriteFile(out / "characterization.csv", dist.str());
  std::map<std::string, std::map<std::string, size_t>> kind_module;
  for (const auto& g : r.groups) {
    ++kind_module[std::string(CrashKindName(g.kind))][std::string(ModuleName(g.module))];
  }
  std::ostringstream km;
  km << "kind,module,groups\n";
  for (const auto& [k, mods] : kind_module) {
    for (const auto& [m, n] : mods) km << k << "," << m << "," << n << "\n";
  }
  WriteFile(out / "kind_module.csv", km.str());
}

}  // namespace histmut
