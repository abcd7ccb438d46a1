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

#include <gtest/gtest.h>

#include "histmut/error.h"
#include "histmut/triage.h"
#include "testing/testing.h"

namespace histmut {
namespace {

StackFrame Frame(const std::string& fn, const std::string& loc = "") {
  return {fn, loc, "", fn};
}

StackTrace Trace(std::vector<StackFrame> frames) { return {std::move(frames)}; }

TEST(DedupKeyTest, ReferenceIceTrace) {
  const char* text =
      "z1.c:2:1: internal compiler error: in eliminate_unnecessary_stmts, at "
      "tree-ssa-dce.cc:1512\n"
      "0xe0f0dc eliminate_unnecessary_stmts\n"
      "    ../../gcc/tree-ssa-dce.cc:1512...\n"
      "0xe11e55 execute\n"
      "    ../../gcc/tree-ssa-dce.cc:2069\n";
  auto key = MakeDedupKey(ParseStackTrace(text, TraceDialect::kGccIce), DefaultHelpers());
  EXPECT_EQ(key.first, "eliminate_unnecessary_stmts@../../gcc/tree-ssa-dce.cc:1512");
  EXPECT_EQ(key.second, "execute@../../gcc/tree-ssa-dce.cc:2069");
}

TEST(DedupKeyTest, HelpersAreSkipped) {
  auto key = MakeDedupKey(Trace({Frame("fancy_abort(char const*)", "diagnostic.cc:1"),
                                 Frame("internal_error"), Frame("a", "a.c:1"),
                                 Frame("b", "b.c:2"), Frame("c", "c.c:3")}),
                          DefaultHelpers());
  EXPECT_EQ(key.ToString(), "a@a.c:1 | b@b.c:2");
}

TEST(DedupKeyTest, DegenerateTraces) {
  EXPECT_EQ(MakeDedupKey(Trace({Frame("only", "o.c:1")}), {}).second, DedupKey::kNoFrame);
  EXPECT_EQ(MakeDedupKey(Trace({}), {}, CrashKind::kHang).first, "<Hang>");
  StackFrame pc_only{"f", "", "0x10", ""};
  EXPECT_EQ(MakeDedupKey(Trace({pc_only}), {}).first, "f@0x10");
  EXPECT_EQ(DedupKey::FromString("a@x | b@y"), (DedupKey{"a@x", "b@y"}));
}

TEST(DedupKeyTest, PropertyTopTwoFramesDecide) {
  Rng rng(2024);
  const auto& helpers = DefaultHelpers();
  for (int trial = 0; trial < 500; ++trial) {
    auto random_frames = [&](size_t n) {
      std::vector<StackFrame> out;
      for (size_t i = 0; i < n; ++i) {
        if (rng.Below(3) == 0) {
          out.push_back(Frame(helpers[rng.Below(helpers.size())] + "_x", "h.c:1"));
        } else {
          out.push_back(Frame("fn" + std::to_string(rng.Below(6)),
                              "f.c:" + std::to_string(rng.Below(3))));
        }
      }
      return out;
    };
    auto prefix = random_frames(rng.Below(6));
    auto a = prefix, b = prefix;
    auto tail_a = random_frames(rng.Below(5)), tail_b = random_frames(rng.Below(5));
    size_t non_helper = 0;
    for (const auto& f : prefix) non_helper += f.function.rfind("fn", 0) == 0;
    if (non_helper < 2) continue;
    a.insert(a.end(), tail_a.begin(), tail_a.end());
    b.insert(b.end(), tail_b.begin(), tail_b.end());
    auto ka = MakeDedupKey(Trace(a), helpers);
    EXPECT_EQ(ka, MakeDedupKey(Trace(b), helpers));
    for (const std::string& part : {ka.first, ka.second}) {
      for (const auto& h : helpers) EXPECT_EQ(part.find(h), std::string::npos) << part;
    }
  }
}

TEST(DedupKeyTest, HelperInsertionDoesNotChangeKey) {
  Rng rng(7);
  const auto& helpers = DefaultHelpers();
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<StackFrame> frames;
    for (size_t i = 0, n = 1 + rng.Below(5); i < n; ++i) {
      frames.push_back(Frame("g" + std::to_string(rng.Below(9))));
    }
    auto key = MakeDedupKey(Trace(frames), helpers);
    auto noisy = frames;
    size_t pos = rng.Below(noisy.size() + 1);
    noisy.insert(noisy.begin() + static_cast<std::ptrdiff_t>(pos),
                 Frame(helpers[rng.Below(helpers.size())]));
    EXPECT_EQ(MakeDedupKey(Trace(noisy), helpers), key);
  }
}

TEST(ModuleClassifierTest, FixtureRules) {
  auto c = ModuleClassifier::Load(testing::DataDir() / "classifiers" / "fixture.txt");
  EXPECT_EQ(c.Classify(Trace({Frame("print_stack_trace", "diag/signals.cc:1"),
                              Frame("layout_array_type", "be/layout.cc:51")}),
                       DefaultHelpers()),
            CompilerModule::kBackEnd);
  EXPECT_EQ(c.Classify(Trace({Frame("x", "driver/main.cc:1"), Frame("y", "opt/dce.cc:3")})),
            CompilerModule::kOptimization);
  EXPECT_EQ(c.Classify(Trace({Frame("x", "elsewhere.cc:1")})), CompilerModule::kUnknown);
}

TEST(ModuleClassifierTest, GccAndClangTables) {
  auto gcc = ModuleClassifier::Load(testing::DataDir() / "classifiers" / "gcc.txt");
  auto clang = ModuleClassifier::Load(testing::DataDir() / "classifiers" / "clang.txt");
  EXPECT_EQ(gcc.Classify(Trace({Frame("eliminate_unnecessary_stmts",
                                      "../../gcc/tree-ssa-dce.cc:1512")})),
            CompilerModule::kOptimization);
  EXPECT_EQ(gcc.Classify(Trace({Frame("cp_parser_declaration", "../../gcc/cp/parser.cc:1")})),
            CompilerModule::kFrontEnd);
  EXPECT_EQ(clang.Classify(Trace({Frame("(anonymous namespace)::X86DAGToDAGISel::Select",
                                        "/src/llvm/lib/Target/X86/X86ISelDAGToDAG.cpp:1")})),
            CompilerModule::kBackEnd);
  EXPECT_EQ(clang.Classify(Trace({Frame("clang::Sema::CheckFunctionCall",
                                        "/src/clang/lib/Sema/SemaChecking.cpp:1")})),
            CompilerModule::kFrontEnd);
}

TEST(ModuleClassifierTest, ParseErrors) {
  EXPECT_THROW(ModuleClassifier::Parse("Nowhere location x\n"), Error);
  EXPECT_THROW(ModuleClassifier::Parse("BackEnd where x\n"), Error);
  EXPECT_THROW(ModuleClassifier::Parse("BackEnd location (\n"), Error);
}

TEST(GroupCrashesTest, GroupsByKeyInFirstSeenOrder) {
  std::vector<CrashEvent> events(4);
  events[0].outcome = testing::IceOutcome({"a", "b", "z"});
  events[0].input = "long input";
  events[1].outcome = testing::IceOutcome({"c", "d"});
  events[2].outcome = testing::IceOutcome({"fancy_abort", "a", "b", "q"});
  events[2].input = "short";
  events[3].outcome = testing::IceOutcome({"c", "d", "e"});
  auto groups = GroupCrashes(events, DefaultHelpers());
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].members, (std::vector<size_t>{0, 2}));
  EXPECT_EQ(groups[0].representative, 2u);
  EXPECT_EQ(groups[1].members, (std::vector<size_t>{1, 3}));
  EXPECT_EQ(groups[0].kind, CrashKind::kInternalCompilerError);
}

// Exhaustive oracle: the smallest subsets that reproduce.
std::vector<std::vector<size_t>> MinimalSubsets(
    size_t n, const std::function<bool(const std::vector<size_t>&)>& pred) {
  std::vector<std::vector<size_t>> out;
  size_t best = n + 1;
  for (size_t mask = 0; mask < (size_t{1} << n); ++mask) {
    std::vector<size_t> s;
    for (size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) s.push_back(i);
    }
    if (!pred(s)) continue;
    if (s.size() < best) {
      best = s.size();
      out.clear();
    }
    if (s.size() == best) out.push_back(s);
  }
  return out;
}

TEST(DeltaDebugTest, FindsUniqueMinimalSetLikeExhaustiveSearch) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    size_t n = 1 + rng.Below(10);
    std::vector<size_t> needed;
    for (size_t i = 0; i < n; ++i) {
      if (rng.Below(4) == 0) needed.push_back(i);
    }
    if (needed.empty()) needed.push_back(rng.Below(n));
    auto pred = [&](const std::vector<size_t>& s) {
      return std::includes(s.begin(), s.end(), needed.begin(), needed.end());
    };
    auto oracle = MinimalSubsets(n, pred);
    ASSERT_EQ(oracle.size(), 1u);
    EXPECT_EQ(DeltaDebug(n, pred), oracle[0]);
  }
}

TEST(DeltaDebugTest, ResultIsOneMinimalForArbitraryMonotonePredicates) {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    size_t n = 2 + rng.Below(8);
    // Reproduces when the subset covers any one of a few random clauses.
    std::vector<std::vector<size_t>> clauses(1 + rng.Below(3));
    for (auto& c : clauses) {
      for (size_t i = 0; i < n; ++i) {
        if (rng.Below(3) == 0) c.push_back(i);
      }
    }
    if (clauses[0].empty() || clauses[0].back() != n - 1) clauses[0].push_back(n - 1);
    auto pred = [&](const std::vector<size_t>& s) {
      for (const auto& c : clauses) {
        if (!c.empty() && std::includes(s.begin(), s.end(), c.begin(), c.end())) return true;
      }
      return false;
    };
    auto result = DeltaDebug(n, pred);
    ASSERT_TRUE(pred(result));
    for (size_t i = 0; i < result.size(); ++i) {
      auto smaller = result;
      smaller.erase(smaller.begin() + static_cast<std::ptrdiff_t>(i));
      EXPECT_FALSE(pred(smaller));
    }
  }
}

TEST(MinimizeChainTest, ThreeStepChainsReduceToTheNecessaryStep) {
  auto registry = testing::StarterPack();
  auto target = testing::FixtureTarget();
  ReplayContext ctx{&registry, target, DefaultHelpers()};
  for (const auto& sc : testing::ThreeStepScenarios()) {
    CrashEvent e = testing::MakeCrashEvent(registry, sc.origin, sc.chain, target);
    ASSERT_EQ(e.outcome.crash, sc.kind) << sc.name;
    MinimizedChain mc = MinimizeChain(e, sc.origin, ctx);
    EXPECT_TRUE(mc.verified) << sc.name << ": " << mc.diagnostic;
    ASSERT_EQ(mc.minimal.size(), 1u) << sc.name;
    EXPECT_EQ(mc.minimal[0].mutator_id, sc.necessary);
    ASSERT_EQ(mc.single_step_reproducers.size(), 1u);
    EXPECT_EQ(mc.single_step_reproducers[0].mutator_id, sc.necessary);
  }
}

TEST(MinimizeChainTest, DivergentReplayIsNotVerified) {
  auto registry = testing::StarterPack();
  auto target = testing::FixtureTarget();
  ReplayContext ctx{&registry, target, DefaultHelpers()};
  const auto sc = testing::ThreeStepScenarios()[0];
  CrashEvent e = testing::MakeCrashEvent(registry, sc.origin, sc.chain, target);
  MinimizedChain mc = MinimizeChain(e, "int unrelated;\n", ctx);
  EXPECT_FALSE(mc.verified);
  EXPECT_NE(mc.diagnostic.find("ReplayDivergence"), std::string::npos);
  EXPECT_EQ(mc.minimal, mc.original);
}

TEST(VennTest, MatchesSetAlgebra) {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    std::map<std::string, std::set<std::string>> sets;
    for (const char* name : {"bhis", "starter", "union"}) {
      auto& s = sets[name];
      for (int k = 0; k < 30; ++k) {
        if (rng.Below(2)) s.insert("key" + std::to_string(k));
      }
    }
    auto oracle = testing::VennOracle(sets);
    auto regions = DiffCampaigns(sets);
    ASSERT_EQ(regions.size(), 7u);
    for (const auto& r : regions) {
      auto it = oracle.find(Join(r.members, "+"));
      EXPECT_EQ(r.count, it == oracle.end() ? 0u : it->second) << Join(r.members, "+");
    }
  }
}

TEST(VennTest, MergeRunsIsUnion) {
  EXPECT_EQ(MergeRuns({{"a", "b"}, {"b", "c"}, {}}), (std::set<std::string>{"a", "b", "c"}));
}

TEST(MutatorStatsTest, RecoversReferenceHistogram) {
  auto hist = testing::ReferenceBugsHistogram();
  auto log = testing::FabricateCrashLog(hist, 3);
  auto groups = GroupCrashes(log.events, DefaultHelpers());
  size_t bugs = 0;
  for (const auto& [b, m] : hist) bugs += b * m;
  EXPECT_EQ(groups.size(), bugs);
  auto stats = ComputeMutatorStats(groups, testing::SingleStepMinimized(log.events, groups));
  EXPECT_EQ(stats.bugs_histogram, hist);
  for (const auto& [id, n] : log.bugs_per_mutator) EXPECT_EQ(stats.per_mutator[id].bugs, n);
  EXPECT_EQ(stats.chain_length_histogram, (std::map<size_t, size_t>{{1, bugs}}));
}

TEST(MutatorStatsTest, CreditsMinimalChainWithoutSingleReproducers) {
  std::vector<CrashGroup> groups(1);
  MinimizedChain mc;
  mc.minimal = {{"a", std::nullopt, 1}, {"b", std::nullopt, 2}};
  MutatorRegistry reg;
  auto a = testing::Rule("a", "x", "y");
  a.action = Action::kRemove;
  a.elements = {Element::kLiteral, Element::kType};
  reg.Add(a);
  auto stats = ComputeMutatorStats(groups, {mc}, &reg);
  EXPECT_EQ(stats.per_mutator["a"].bugs, 1u);
  EXPECT_EQ(stats.per_mutator["b"].bugs, 1u);
  EXPECT_EQ(stats.chain_length_histogram, (std::map<size_t, size_t>{{2, 1}}));
  EXPECT_EQ(stats.action_distribution, (std::map<std::string, size_t>{{"Remove", 1}}));
  EXPECT_EQ(stats.element_distribution.at("Type"), 1u);
  EXPECT_THROW(ComputeMutatorStats(groups, {}), Error);
}

}  // namespace
}  // namespace histmut
