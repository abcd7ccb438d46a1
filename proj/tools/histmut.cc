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

// histmut: mutator mining, fuzzing campaigns, triage and reporting.

#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>

#include <CLI11.hpp>

#include "histmut/cli.h"
#include "histmut/error.h"
#include "histmut/pack.h"
#include "histmut/util.h"

namespace fs = std::filesystem;
using namespace histmut;

namespace {

int ExitCodeFor(ErrorCode code) {
  switch (CategoryOf(code)) {
    case ErrorCategory::kUsage: return 1;
    case ErrorCategory::kInfrastructure: return 2;
    case ErrorCategory::kData: return 3;
  }
  return 2;
}

struct Globals {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<uint64_t> seed;
  std::optional<size_t> jobs;
  std::string target;
};

ToolConfig ResolveConfig(const Globals& g) {
  ToolConfig c = g.config_path.empty() ? DefaultToolConfig() : LoadToolConfig(g.config_path);
  for (const auto& s : g.sets) {
    size_t eq = s.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "--set expects section.key=value, got '" + s + "'");
    }
    SetConfigValue(c, s.substr(0, eq), s.substr(eq + 1));
  }
  if (g.seed) c.seed = *g.seed;
  if (g.jobs) {
    if (*g.jobs == 0) throw Error(ErrorCode::kInvalidArgument, "--jobs must be >= 1");
    c.jobs = *g.jobs;
  }
  if (!g.target.empty()) c.target.command = g.target;
  return c;
}

std::set<std::string> SuccessfulFrom(const std::vector<std::string>& dirs) {
  std::set<std::string> ids;
  for (const auto& d : dirs) {
    fs::path f = fs::path(d) / "triage" / "mutator_bugs.csv";
    if (!fs::exists(f)) throw Error(ErrorCode::kIo, f.string() + " not found; run triage first");
    auto lines = SplitLines(ReadFile(f));
    for (size_t i = 1; i < lines.size(); ++i) {
      auto parts = Split(lines[i], ',');
      if (parts.size() >= 2 && parts[1] != "0") ids.insert(parts[0]);
    }
  }
  return ids;
}

Reviewer InteractiveReviewer() {
  static std::mutex mu;
  return [](const IssueRecord& issue, const TestCasePair& pair) {
    std::lock_guard lock(mu);
    std::cerr << "\n=== issue " << issue.id << ": " << issue.title << "\n--- positive\n"
              << pair.positive << "\n--- negative\n" << pair.negative << "\n--- mutation\n"
              << pair.mutation_description << "\nAccept negative input? [y/N] " << std::flush;
    std::string answer;
    if (!std::getline(std::cin, answer)) return false;
    answer = ToLower(Trim(answer));
    return answer == "y" || answer == "yes";
  };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mine compiler-fuzzing mutators from bug reports and run fuzzing campaigns."};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--set", g.sets, "Override a configuration key (section.key=value)");
  app.add_option("--seed", g.seed, "Master RNG seed");
  app.add_option("-j,--jobs", g.jobs, "Parallel workers");
  app.add_option("--target", g.target, "Target command template with {input}");

  // mine
  auto* mine = app.add_subcommand("mine", "Mine mutators from fixed issues");
  std::string issues_dir, transcripts, tracker, url, project, compiler, since, until, llm,
      mine_out, summary_out;
  bool assume_yes = false;
  mine->add_option("--issues", issues_dir, "Directory of .issue files (fixture tracker)");
  mine->add_option("--transcripts", transcripts, "Directory of <issue>.json LLM transcripts");
  mine->add_option("--tracker", tracker, "fixture, github or bugzilla");
  mine->add_option("--url", url, "Tracker base URL");
  mine->add_option("--project", project, "owner/repo or Bugzilla product");
  mine->add_option("--compiler", compiler, "Compiler the tracker belongs to");
  mine->add_option("--since", since, "Window start (YYYY-MM-DD)");
  mine->add_option("--until", until, "Window end (YYYY-MM-DD)");
  mine->add_option("--llm", llm, "replay or http");
  mine->add_option("-o,--out", mine_out, "Output mutator pack")->required();
  mine->add_option("--summary", summary_out, "Write the per-issue summary here");
  mine->add_flag("-y,--assume-yes", assume_yes, "Accept every reviewed negative input");

  // fuzz
  auto* fuzz = app.add_subcommand("fuzz", "Run or resume a fuzzing campaign");
  std::string seeds, pack, fuzz_out, resume, coverage;
  std::optional<double> budget;
  std::optional<uint64_t> max_files, max_steps;
  std::optional<size_t> stop_after;
  std::vector<std::string> successful_from;
  fuzz->add_option("--seeds", seeds, "Seed corpus directory");
  fuzz->add_option("--pack", pack, "Mutator pack");
  fuzz->add_option("-o,--out", fuzz_out, "Campaign directory to write");
  fuzz->add_option("--resume", resume, "Resume the campaign stored in this directory");
  fuzz->add_option("--budget", budget, "Time budget in seconds");
  fuzz->add_option("--max-files", max_files, "Stop after this many compiles");
  fuzz->add_option("--max-steps", max_steps, "Stop after this many steps");
  fuzz->add_option("--stop-after-unique", stop_after, "Stop once this many crash groups exist");
  fuzz->add_option("--coverage", coverage, "Coverage provider (fixture-tokens or file:PATH)");
  fuzz->add_option("--successful-from", successful_from,
                   "Restrict to mutators credited in these triaged campaigns");

  // triage
  auto* triage = app.add_subcommand("triage", "Group, minimize and characterize crashes");
  std::string triage_dir, classifier;
  bool no_minimize = false;
  triage->add_option("campaign", triage_dir, "Campaign directory")->required();
  triage->add_option("--classifier", classifier, "Module classifier table");
  triage->add_flag("--no-minimize", no_minimize, "Skip chain minimization");

  // report
  auto* report = app.add_subcommand("report", "Cross-campaign CSVs and plots");
  std::vector<std::string> report_dirs;
  std::string report_out;
  report->add_option("campaigns", report_dirs, "Campaign directories")->required();
  report->add_option("-o,--out", report_out, "Report directory")->required();

  // pack
  auto* packcmd = app.add_subcommand("pack", "Mutator pack management");
  packcmd->require_subcommand(1);
  std::string pack_in, pack_out, sample_dir;
  std::vector<std::string> merge_in;
  bool draw = false;
  auto* plist = packcmd->add_subcommand("list", "List mutators");
  plist->add_option("pack", pack_in)->required();
  auto* pdedup = packcmd->add_subcommand("dedup", "Drop behavioral duplicates");
  pdedup->add_option("pack", pack_in)->required();
  pdedup->add_option("--sample", sample_dir, "Sample or corpus directory")->required();
  pdedup->add_flag("--draw", draw, "Draw a Cochran-sized sample from the corpus");
  pdedup->add_option("-o,--out", pack_out, "Deduplicated pack")->required();
  auto* pfp = packcmd->add_subcommand("fingerprint", "Print behavioral fingerprints");
  pfp->add_option("pack", pack_in)->required();
  pfp->add_option("--sample", sample_dir, "Sample directory")->required();
  pfp->add_flag("--draw", draw, "Draw a Cochran-sized sample from the corpus");
  auto* pmerge = packcmd->add_subcommand("merge", "Concatenate packs");
  pmerge->add_option("packs", merge_in)->required()->expected(2, -1);
  pmerge->add_option("-o,--out", pack_out)->required();

  // fixture
  auto* fixture = app.add_subcommand("fixture", "Fixture utilities");
  fixture->require_subcommand(1);
  auto* reach = fixture->add_subcommand("reachability",
                                        "Compile every single mutation of every seed");
  reach->add_option("--seeds", seeds, "Seed directory");
  reach->add_option("--pack", pack, "Mutator pack");
  auto* synth = fixture->add_subcommand("synth-issues", "Write synthetic issue files");
  std::string synth_out, synth_compiler = "gcc";
  size_t synth_count = 0, synth_distractors = 0;
  synth->add_option("-o,--out", synth_out)->required();
  synth->add_option("--compiler", synth_compiler);
  synth->add_option("--count", synth_count)->required();
  synth->add_option("--distractors", synth_distractors);
  synth->add_option("--since", since);
  synth->add_option("--until", until);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "histmut: error: Usage: " << e.what() << "\n";
    return 1;
  }

  try {
    ToolConfig config = ResolveConfig(g);

    if (*mine) {
      if (!issues_dir.empty()) config.issues = issues_dir;
      if (!transcripts.empty()) config.transcripts = transcripts;
      if (!tracker.empty()) SetConfigValue(config, "tracker.kind", tracker);
      if (!url.empty()) config.tracker_url = url;
      if (!project.empty()) config.tracker_project = project;
      if (!compiler.empty()) config.tracker_compiler = compiler;
      if (!since.empty()) config.since = since;
      if (!until.empty()) config.until = until;
      if (!llm.empty()) SetConfigValue(config, "llm.transport", llm);
      auto client = MakeTracker(config);
      auto issues = ScrapeIssues(*client, ConfigWindow(config));
      MineSummary s = MineIssues(issues, config, assume_yes ? Reviewer{} : InteractiveReviewer(),
                                 config.jobs);
      SaveMutatorPack(s.pack, mine_out);
      std::string text = FormatMineSummary(s);
      if (!summary_out.empty()) WriteFile(summary_out, text);
      std::cout << text;
      return s.errors.empty() ? 0 : 2;
    }

    if (*fuzz) {
      std::unique_ptr<Campaign> campaign;
      fs::path out = fuzz_out.empty() ? fs::path(resume) : fs::path(fuzz_out);
      if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "fuzz needs --out or --resume");
      if (budget) config.budget_s = *budget;
      if (max_files) config.max_files = max_files;
      if (max_steps) config.max_steps = max_steps;
      if (stop_after) config.stop_after_unique = stop_after;
      if (!resume.empty()) {
        campaign = Campaign::Resume(resume);
        CampaignConfig& cc = campaign->config();
        if (budget) cc.budget = std::chrono::milliseconds(static_cast<int64_t>(*budget * 1000));
        if (g.jobs) cc.workers = config.jobs;
        if (max_files) cc.max_files = max_files;
        if (max_steps) cc.max_steps = max_steps;
        if (stop_after) cc.stop_after_unique = stop_after;
      } else {
        if (!seeds.empty()) config.seeds = seeds;
        if (!pack.empty()) config.pack = pack;
        if (!coverage.empty()) config.coverage = coverage;
        if (config.seeds.empty()) throw Error(ErrorCode::kInvalidArgument, "fuzz needs --seeds");
        campaign = Campaign::Init(config.seeds, LoadMutatorPack(config.pack),
                                  MakeCoverageProvider(config.coverage), ToCampaignConfig(config));
      }
      if (!successful_from.empty()) campaign->RestrictRegistry(SuccessfulFrom(successful_from));
      CampaignReport r = campaign->Run();
      campaign->Persist(out);
      WriteFile(out / "config.ini", FormatToolConfig(config));
      std::cout << "steps " << r.counters.steps << "\nexecutions " << r.counters.executions
                << "\nqueue " << r.queue_size << "\ncoverage " << r.coverage_size
                << "\ncrashes " << r.counters.crashes_raw << "\nunique " << r.counters.crashes_unique
                << "\ninfra_errors " << r.counters.infra_errors << "\nelapsed_s " << r.elapsed_s
                << "\n";
      for (const auto& [key, hits] : r.unique_keys) std::cout << "key " << key << " x" << hits << "\n";
      return 0;
    }

    if (*triage) {
      if (!classifier.empty()) config.classifier = classifier;
      if (no_minimize) config.minimize = false;
      TriageResult r = TriageCampaign(triage_dir, config);
      WriteTriage(triage_dir, r);
      std::cout << "events " << r.events.size() << "\ngroups " << r.groups.size() << "\n";
      for (size_t i = 0; i < r.groups.size(); ++i) {
        std::vector<std::string> ids;
        for (const auto& s : r.minimized[i].minimal) ids.push_back(s.mutator_id);
        std::cout << "group " << i + 1 << " " << CrashKindName(r.groups[i].kind) << " "
                  << ModuleName(r.groups[i].module) << " members=" << r.groups[i].members.size()
                  << " chain=" << (ids.empty() ? "-" : Join(ids, ">"))
                  << (r.minimized[i].verified ? " verified" : "") << "\n  "
                  << r.groups[i].key.ToString() << "\n";
      }
      return 0;
    }

    if (*report) {
      std::vector<CampaignSummary> summaries;
      for (const auto& d : report_dirs) summaries.push_back(SummarizeCampaign(d));
      WriteReport(summaries, report_out);
      std::cout << "wrote report for " << summaries.size() << " campaign(s) to " << report_out
                << "\n";
      return 0;
    }

    if (*packcmd) {
      auto load_sample = [&]() {
        std::vector<SampleInput> corpus = LoadSample(sample_dir);
        if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, sample_dir + " has no files");
        if (!draw) return corpus;
        return DrawSample(corpus, SampleSize(corpus.size()), config.seed);
      };
      if (*plist) {
        MutatorRegistry reg = LoadMutatorPack(pack_in);
        for (size_t i = 0; i < reg.size(); ++i) {
          const Mutator& m = reg.at(i);
          std::vector<std::string> els;
          for (Element e : MutatorElements(m)) els.emplace_back(ElementName(e));
          std::cout << MutatorId(m) << "\t"
                    << (std::holds_alternative<RewriteRule>(m) ? "rewrite" : "external") << "\t"
                    << ActionName(MutatorAction(m)) << "\t" << Join(els, ",") << "\t"
                    << std::visit([](const auto& x) { return x.provenance; }, m) << "\n";
        }
        if (reg.restricted()) {
          std::cout << "# successful-only: "
                    << Join(std::vector<std::string>(reg.successful_ids().begin(),
                                                     reg.successful_ids().end()),
                            ",")
                    << "\n";
        }
        return 0;
      }
      if (*pdedup) {
        auto sample = load_sample();
        DedupResult r = DedupMutators(LoadMutatorPack(pack_in), sample, config.seed);
        SaveMutatorPack(r.registry, pack_out);
        for (const auto& [kept, dropped] : r.dropped) {
          std::cout << "dropped " << dropped << " (duplicate of " << kept << ")\n";
        }
        std::cout << "kept " << r.registry.size() << " dropped " << r.dropped.size()
                  << " sample " << sample.size() << "\n";
        return 0;
      }
      if (*pfp) {
        auto sample = load_sample();
        MutatorRegistry reg = LoadMutatorPack(pack_in);
        for (size_t i = 0; i < reg.size(); ++i) {
          MutatorFingerprint f = FingerprintMutator(reg, i, sample, config.seed);
          std::cout << MutatorId(reg.at(i)) << "\t" << f.digest << "\t" << f.sample_size << "\t"
                    << f.sample_manifest_digest << "\n";
        }
        return 0;
      }
      if (*pmerge) {
        MutatorRegistry merged = LoadMutatorPack(merge_in[0]);
        for (size_t i = 1; i < merge_in.size(); ++i) {
          merged = MergePacks(merged, LoadMutatorPack(merge_in[i]));
        }
        SaveMutatorPack(merged, pack_out);
        std::cout << "merged " << merged.size() << " mutators\n";
        return 0;
      }
    }

    if (*fixture) {
      if (*reach) {
        if (!seeds.empty()) config.seeds = seeds;
        if (!pack.empty()) config.pack = pack;
        auto seed_files = LoadSample(config.seeds);
        if (seed_files.empty()) throw Error(ErrorCode::kEmptyCorpus, "no seeds");
        ReachabilityReport r = SingleMutationReachability(
            seed_files, LoadMutatorPack(config.pack), config.target, config.helpers);
        std::cout << "compiles " << r.compiles << "\ncrashing_seeds " << r.crashing_seeds.size()
                  << "\nreachable_keys " << r.keys.size() << "\n";
        for (const auto& s : r.crashing_seeds) std::cout << "crashing-seed " << s << "\n";
        for (const auto& [key, w] : r.keys) {
          std::cout << "key " << key << "\n  " << CrashKindName(w.kind) << " via " << w.mutator_id
                    << (w.site ? "@" + std::to_string(*w.site) : "") << " on " << w.seed << "\n";
        }
        return 0;
      }
      if (*synth) {
        if (!since.empty()) config.since = since;
        if (!until.empty()) config.until = until;
        WriteSyntheticIssues(synth_out, synth_compiler, synth_count, ConfigWindow(config),
                             synth_distractors, config.seed);
        return 0;
      }
    }
  } catch (const Error& e) {
    std::cerr << "histmut: error: " << ErrorCodeName(e.code()) << ": " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "histmut: error: Infrastructure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
