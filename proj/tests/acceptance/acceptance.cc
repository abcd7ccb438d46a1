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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "histmut/chain.h"
#include "histmut/cli.h"
#include "histmut/error.h"
#include "histmut/fuzz.h"
#include "histmut/llm.h"
#include "histmut/miner.h"
#include "histmut/mutator.h"
#include "histmut/pack.h"
#include "histmut/runner.h"
#include "histmut/tracker.h"
#include "histmut/triage.h"
#include "histmut/util.h"
#include "testing/testing.h"

namespace histmut {
namespace {

namespace fs = std::filesystem;
namespace ht = histmut::testing;

// Collects failure notes for one criterion.
class Check {
 public:
  void Expect(bool ok, const std::string& what) {
    if (!ok) notes_.push_back(what);
  }
  bool ok() const { return notes_.empty(); }
  std::string Summary() const {
    std::vector<std::string> shown(notes_.begin(),
                                   notes_.begin() + std::min<size_t>(notes_.size(), 5));
    return Join(shown, "; ") + (notes_.size() > 5 ? "; ..." : "");
  }

 private:
  std::vector<std::string> notes_;
};

const std::vector<std::string>& Helpers() { return DefaultHelpers(); }

// 1. Planted crash groups are found by every parallel run.
std::string PlantedBugs(Check& c) {
  const auto seeds = ht::FixtureSeeds();
  const auto pack = ht::StarterPack();
  const auto target = ht::FixtureTarget();
  ReachabilityReport reach = SingleMutationReachability(seeds, pack, target, Helpers());
  c.Expect(reach.crashing_seeds.empty(), "a seed crashes on its own");
  c.Expect(reach.keys.size() == 3, "oracle reaches " + std::to_string(reach.keys.size()) +
                                       " keys");
  std::set<std::string> oracle_keys;
  for (const auto& [k, w] : reach.keys) oracle_keys.insert(k);

  std::ostringstream detail;
  detail << "oracle keys " << reach.keys.size() << " (" << reach.compiles << " compiles); runs:";
  for (uint64_t run = 0; run < 5; ++run) {
    CampaignConfig cfg;
    cfg.target = ht::FixtureTarget(std::chrono::milliseconds(10000));
    cfg.workers = 4;
    cfg.budget = std::chrono::seconds(60);
    cfg.stop_after_unique = 3;
    cfg.seed = 1000 + run;
    auto campaign =
        Campaign::Init(seeds, pack, std::make_unique<FixtureTokenCoverage>(), cfg);
    auto start = std::chrono::steady_clock::now();
    CampaignReport r = campaign->Run();
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::set<std::string> found;
    for (const auto& [k, hits] : r.unique_keys) found.insert(k);
    c.Expect(found == oracle_keys,
             "run " + std::to_string(run) + " found " + std::to_string(found.size()) + " groups");
    c.Expect(secs < 60.0, "run " + std::to_string(run) + " took " + std::to_string(secs) + "s");
    char buf[64];
    std::snprintf(buf, sizeof buf, " %zu/3 in %.1fs", found.size(), secs);
    detail << buf;
  }
  return detail.str();
}

std::shared_ptr<ReplayTransport> Replies(std::vector<std::string> replies) {
  return std::make_shared<ReplayTransport>("replay", std::map<std::string, std::string>{},
                                           std::move(replies));
}

// 2. Validation taxonomy and the refinement budget.
std::string Taxonomy(Check& c) {
  for (int passed = 0; passed <= 4; ++passed) {
    ValidationTag want = passed == 4   ? ValidationTag::kCorrect
                         : passed == 3 ? ValidationTag::kPartiallyCorrect
                                       : ValidationTag::kWrong;
    c.Expect(TagFor(passed, true) == want, "passed=" + std::to_string(passed));
    c.Expect(TagFor(passed, false) == ValidationTag::kError,
             "harness fail passed=" + std::to_string(passed));
  }
  CandidateMutator cand;
  cand.script = ht::Rule("c", "never-matches", "x");
  for (int i = 0; i < 4; ++i) {
    cand.tests.push_back({"extern int v" + std::to_string(i) + ";",
                          "static int v" + std::to_string(i) + ";"});
  }
  auto llm = Replies(std::vector<std::string>(10, "<code>sed -i -E 's/nope/x/g' \"$1\"</code>"));
  bool exhausted = false;
  while (!exhausted) {
    ValidationOutcome out = ValidateCandidate(cand);
    try {
      cand = RefineMutator(cand, out, *llm);
    } catch (const Error& e) {
      exhausted = e.code() == ErrorCode::kRefinementBudgetExhausted;
      if (!exhausted) throw;
    }
    if (llm->calls() > 10) break;
  }
  c.Expect(exhausted, "budget never exhausted");
  c.Expect(llm->calls() <= static_cast<size_t>(kMaxRefinements),
           "refiner called " + std::to_string(llm->calls()) + " times");
  return "10 table rows; refiner calls " + std::to_string(llm->calls());
}

// 3. Mining 108449 from recorded transcripts.
std::string MiningDeterminism(Check& c) {
  const fs::path fixtures = ht::FixturesDir();
  const fs::path issue_path = fixtures / "issues" / "108449.issue";
  IssueRecord issue = FixtureTracker::ParseIssueFile(ReadFile(issue_path), issue_path.string());
  MinerOptions options;
  options.target = ht::FixtureTarget();
  options.target.command = ht::FixtureCompiler() + " --fixed -O2 -c {input}";
  std::string packs[2];
  std::string mapped;
  for (auto& text : packs) {
    MutatorRegistry pack;
    SharedRegistry shared(&pack);
    MineResult r = MineIssue(issue, options,
                             LoadReplayLlms(fixtures / "transcripts" / "108449.json"), &shared);
    c.Expect(r.mined, "not mined: " + r.reason);
    if (!r.mined) return "";
    Rng rng(0);
    mapped = pack.Apply(0, "extern int vfork(); void f() { vfork(); }", rng, {}).output;
    text = FormatPack(pack);
  }
  c.Expect(mapped == "static int vfork(); void f() { vfork(); }", "maps to '" + mapped + "'");
  c.Expect(packs[0] == packs[1], "packs differ");
  return "rule output '" + mapped + "'; packs " + (packs[0] == packs[1] ? "identical" : "differ");
}

// 4. Behavioral dedup of a synthetic registry and the sample size formula.
std::string DedupFidelity(Check& c) {
  for (uint64_t pop : {1ull, 100ull, 1000ull, 35472ull}) {
    c.Expect(SampleSize(pop) == ht::CochranOracle(pop, 0.99, 0.01),
             "SampleSize(" + std::to_string(pop) + ")");
  }
  ht::SyntheticPack synth = ht::MakeSyntheticPack(603, 16, 400, 42);
  auto sample = DrawSample(synth.corpus, SampleSize(synth.corpus.size()), 5);
  DedupResult r = DedupMutators(synth.registry, sample, 5);
  std::set<std::string> dropped;
  for (const auto& [kept, d] : r.dropped) dropped.insert(d);
  c.Expect(r.registry.size() == 587, "kept " + std::to_string(r.registry.size()));
  c.Expect(dropped == synth.clone_ids, "dropped ids differ from the planted clones");
  return "603 -> " + std::to_string(r.registry.size()) + " on a sample of " +
         std::to_string(sample.size()) + "; SampleSize(35472) = " +
         std::to_string(SampleSize(35472));
}

StackFrame Frame(const std::string& fn, const std::string& loc) { return {fn, loc, "", fn}; }

// 5. Dedup key semantics.
std::string DedupKeys(Check& c) {
  const char* text =
      "z1.c:2:1: internal compiler error: in eliminate_unnecessary_stmts, at "
      "tree-ssa-dce.cc:1512\n"
      "0xe0f0dc eliminate_unnecessary_stmts\n"
      "    ../../gcc/tree-ssa-dce.cc:1512\n"
      "0xe11e55 execute\n"
      "    ../../gcc/tree-ssa-dce.cc:2069\n";
  DedupKey ref = MakeDedupKey(ParseStackTrace(text, TraceDialect::kGccIce), Helpers());
  c.Expect(ref.first.rfind("eliminate_unnecessary_stmts@", 0) == 0, "first " + ref.first);
  c.Expect(ref.second.rfind("execute@", 0) == 0, "second " + ref.second);

  Rng rng(31337);
  const auto& helpers = Helpers();
  size_t trials = 0;
  for (int t = 0; t < 1000; ++t) {
    auto frames = [&](size_t n) {
      std::vector<StackFrame> out;
      for (size_t i = 0; i < n; ++i) {
        if (rng.Below(3) == 0) {
          out.push_back(Frame(helpers[rng.Below(helpers.size())], "h.c:1"));
        } else {
          out.push_back(Frame("fn" + std::to_string(rng.Below(5)),
                              "f.c:" + std::to_string(rng.Below(3))));
        }
      }
      return out;
    };
    auto prefix = frames(2 + rng.Below(4));
    size_t real = 0;
    for (const auto& f : prefix) real += f.function.rfind("fn", 0) == 0;
    if (real < 2) continue;
    ++trials;
    auto a = prefix, b = prefix;
    auto ta = frames(rng.Below(6)), tb = frames(rng.Below(6));
    a.insert(a.end(), ta.begin(), ta.end());
    b.insert(b.end(), tb.begin(), tb.end());
    DedupKey ka = MakeDedupKey({a}, helpers), kb = MakeDedupKey({b}, helpers);
    c.Expect(ka == kb, "deeper frames changed the key");
    for (const auto& h : helpers) {
      c.Expect(ka.ToString().find(h) == std::string::npos, "helper in key " + ka.ToString());
    }
    std::vector<CrashEvent> events(2);
    events[0].outcome = RunOutcome{};
    events[0].outcome.kind = OutcomeKind::kCrash;
    events[0].outcome.crash = CrashKind::kSegmentationFault;
    events[1].outcome = events[0].outcome;
    events[0].outcome.stacktrace = StackTrace{a};
    events[1].outcome.stacktrace = StackTrace{b};
    c.Expect(GroupCrashes(events, helpers).size() == 1, "events split into two groups");
  }
  return "reference key " + ref.ToString() + "; " + std::to_string(trials) + " property trials";
}

// 6. Three-step chains minimize to their necessary step.
std::string ChainMinimization(Check& c) {
  auto registry = ht::StarterPack();
  auto target = ht::FixtureTarget();
  ReplayContext ctx{&registry, target, Helpers()};
  std::vector<std::string> got;
  for (const auto& sc : ht::ThreeStepScenarios()) {
    CrashEvent e = ht::MakeCrashEvent(registry, sc.origin, sc.chain, target);
    DedupKey key = KeyOf(e.outcome, Helpers());
    MinimizedChain mc = MinimizeChain(e, sc.origin, ctx);
    c.Expect(mc.verified, sc.name + " not verified: " + mc.diagnostic);
    c.Expect(mc.minimal.size() == 1 && mc.minimal[0].mutator_id == sc.necessary,
             sc.name + " minimal chain has " + std::to_string(mc.minimal.size()) + " steps");
    got.push_back(sc.name + "=" + (mc.minimal.empty() ? "-" : mc.minimal[0].mutator_id));
    // Removing any single step from the minimal chain loses the crash.
    for (size_t i = 0; i < mc.minimal.size(); ++i) {
      Chain smaller = mc.minimal;
      smaller.erase(smaller.begin() + static_cast<std::ptrdiff_t>(i));
      ScratchDir scratch;
      std::string src = ReplayChain(registry, sc.origin, smaller, scratch.path());
      RunOutcome out = Compile(target, src);
      bool same = out.kind == OutcomeKind::kCrash && KeyOf(out, Helpers()) == key;
      c.Expect(!same, sc.name + " is not 1-minimal");
    }
  }
  return Join(got, " ");
}

// 7. Histogram recovery and Venn regions.
std::string Statistics(Check& c) {
  auto hist = ht::ReferenceBugsHistogram();
  auto log = ht::FabricateCrashLog(hist, 99);
  auto groups = GroupCrashes(log.events, Helpers());
  auto stats = ComputeMutatorStats(groups, ht::SingleStepMinimized(log.events, groups));
  c.Expect(stats.bugs_histogram == hist, "histogram differs");
  std::vector<std::string> bars;
  for (const auto& [b, m] : stats.bugs_histogram) {
    bars.push_back(std::to_string(b) + "->" + std::to_string(m));
  }

  Rng rng(4242);
  for (int trial = 0; trial < 100; ++trial) {
    std::map<std::string, std::set<std::string>> sets;
    for (const char* name : {"bhis", "starter", "union"}) {
      auto& s = sets[name];
      size_t universe = 5 + rng.Below(60);
      for (size_t k = 0; k < universe; ++k) {
        if (rng.Below(2)) s.insert("k" + std::to_string(k));
      }
    }
    auto oracle = ht::VennOracle(sets);
    auto regions = DiffCampaigns(sets);
    c.Expect(regions.size() == 7, "region count");
    for (const auto& r : regions) {
      auto it = oracle.find(Join(r.members, "+"));
      c.Expect(r.count == (it == oracle.end() ? 0u : it->second),
               "trial " + std::to_string(trial) + " region " + Join(r.members, "+"));
    }
  }
  return Join(bars, " ") + "; 100 Venn trials";
}

// 8. Loop invariants, replay equality and persist/resume.
std::string LoopInvariants(Check& c) {
  constexpr uint64_t kSteps = 10000;
  constexpr uint64_t kSeed = 2024;
  auto a = ht::FixtureCampaign(kSeed, kSteps);
  auto violations = ht::StepWithInvariants(*a, kSteps);
  c.Expect(violations.empty(), "invariant: " + Join(violations, "; "));
  c.Expect(a->counters().steps == kSteps, "steps " + std::to_string(a->counters().steps));

  auto b = ht::FixtureCampaign(kSeed, kSteps);
  b->Run();
  c.Expect(a->run_log() == b->run_log(), "run logs differ");

  ScratchDir dir;
  auto first = ht::FixtureCampaign(kSeed, kSteps / 2);
  first->Run();
  first->Persist(dir.path());
  auto resumed = Campaign::Resume(dir.path());
  resumed->config().max_steps = kSteps;
  resumed->Run();
  c.Expect(ht::CampaignFingerprint(*resumed) == ht::CampaignFingerprint(*a),
           "resumed run differs");
  return std::to_string(kSteps) + " steps, queue " + std::to_string(a->queue().size()) +
         ", crashes " + std::to_string(a->crashes().size()) + ", run log " +
         std::to_string(a->run_log().size()) + " lines";
}

// 9. Outcome classification precedence.
std::string Classification(Check& c) {
  const std::string assert_text = "cc1: x.c:5: f: Assertion `a' failed.\n";
  const std::string ice_text = "x.c:1:1: internal compiler error: in f, at g.cc:1\n";
  const OutcomeClass hang{OutcomeKind::kCrash, CrashKind::kHang};
  const OutcomeClass segv{OutcomeKind::kCrash, CrashKind::kSegmentationFault};
  const OutcomeClass assertion{OutcomeKind::kCrash, CrashKind::kAssertionFailure};
  const OutcomeClass ice{OutcomeKind::kCrash, CrashKind::kInternalCompilerError};
  const OutcomeClass error{OutcomeKind::kCompileError, std::nullopt};
  const OutcomeClass success{OutcomeKind::kSuccess, std::nullopt};
  struct Row {
    bool timed_out;
    ExitStatus exit;
    std::string err;
    OutcomeClass want;
  };
  const std::vector<Row> rows = {
      {true, {}, "", hang},
      {true, {true, 0, SIGSEGV}, assert_text + ice_text, hang},
      {false, {true, 0, SIGSEGV}, "", segv},
      {false, {true, 0, SIGBUS}, ice_text, segv},
      {false, {true, 0, SIGSEGV}, assert_text, segv},
      {false, {true, 0, SIGABRT}, assert_text, assertion},
      {false, {false, 1, 0}, assert_text + ice_text, assertion},
      {false, {false, 4, 0}, ice_text, ice},
      {false, {true, 0, SIGABRT}, "PLEASE submit a bug report\n", ice},
      {false, {false, 0, 0}, ice_text, ice},
      {false, {true, 0, SIGABRT}, "", error},
      {false, {true, 0, SIGKILL}, "", error},
      {false, {false, 1, 0}, "x.c:1: error: expected ';'\n", error},
      {false, {false, 0, 0}, "x.c:1: warning: unused\n", success},
      {false, {false, 0, 0}, "", success},
  };
  size_t deviations = 0;
  for (size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    bool ok = ClassifyOutcome(r.exit, r.err, r.timed_out) == r.want;
    deviations += !ok;
    c.Expect(ok, "row " + std::to_string(i));
  }
  return std::to_string(rows.size()) + " rows, " + std::to_string(deviations) + " deviations";
}

struct Criterion {
  int number;
  const char* name;
  std::function<std::string(Check&)> run;
};

int Main() {
  const std::vector<Criterion> criteria = {
      {1, "planted bug discovery", PlantedBugs},
      {2, "validator taxonomy", Taxonomy},
      {3, "mining determinism", MiningDeterminism},
      {4, "dedup fidelity", DedupFidelity},
      {5, "crash dedup semantics", DedupKeys},
      {6, "chain minimization", ChainMinimization},
      {7, "statistics fidelity", Statistics},
      {8, "loop invariants", LoopInvariants},
      {9, "outcome classification", Classification},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Check check;
    std::string detail;
    auto start = std::chrono::steady_clock::now();
    try {
      detail = cr.run(check);
    } catch (const std::exception& e) {
      check.Expect(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.1fs", secs);
    std::cout << (check.ok() ? "PASS" : "FAIL") << " " << cr.number << " " << cr.name << " ("
              << timing << "): " << (check.ok() ? detail : check.Summary()) << std::endl;
    failed += !check.ok();
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace
}  // namespace histmut

int main() { return histmut::Main(); }
