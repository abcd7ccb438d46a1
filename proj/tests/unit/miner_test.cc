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

#include <filesystem>
#include <memory>

#include <gtest/gtest.h>

#include "histmut/error.h"
#include "histmut/llm.h"
#include "histmut/miner.h"
#include "histmut/pack.h"
#include "histmut/tracker.h"
#include "histmut/util.h"
#include "testing/testing.h"

namespace histmut {
namespace {

using testing::FixtureTarget;
using testing::FixturesDir;
using testing::Rule;

TargetConfig FixedTarget() {
  TargetConfig t = FixtureTarget();
  t.command = testing::FixtureCompiler() + " --fixed -O2 -c {input}";
  return t;
}

IssueRecord LoadIssue(const std::string& id) {
  auto path = FixturesDir() / "issues" / (id + ".issue");
  return FixtureTracker::ParseIssueFile(ReadFile(path), path.string());
}

std::shared_ptr<ReplayTransport> Replies(std::vector<std::string> replies) {
  return std::make_shared<ReplayTransport>("test-model", std::map<std::string, std::string>{},
                                           std::move(replies));
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIo;
}

TEST(TagForTest, Table) {
  for (int passed = 0; passed <= 4; ++passed) {
    ValidationTag want = passed == 4   ? ValidationTag::kCorrect
                         : passed == 3 ? ValidationTag::kPartiallyCorrect
                                       : ValidationTag::kWrong;
    EXPECT_EQ(TagFor(passed, true), want) << passed;
    EXPECT_EQ(TagFor(passed, false), ValidationTag::kError) << passed;
  }
}

TEST(FillTemplateTest, KnownAndUnknownPlaceholders) {
  EXPECT_EQ(FillTemplate("{a} and {b c} {unknown} {", {{"a", "X"}, {"b c", "{a}"}}),
            "X and {a} {unknown} {");
}

TEST(ExtractPositiveTest, FirstNonBlankBlock) {
  IssueRecord issue;
  issue.code_blocks = {"  \n", "int a;", "int b;"};
  EXPECT_EQ(ExtractPositive(issue), "int a;");
  issue.code_blocks = {};
  EXPECT_FALSE(ExtractPositive(issue));
}

TEST(ScreenFixedTest, FixedCompilerDecides) {
  IssueRecord issue = LoadIssue("108449");
  std::string positive = *ExtractPositive(issue);
  EXPECT_FALSE(ScreenFixed(issue, positive, FixtureTarget()).keep);
  EXPECT_TRUE(ScreenFixed(issue, positive, FixedTarget()).keep);

  IssueRecord still = LoadIssue("109002");
  ScreenResult r = ScreenFixed(still, *ExtractPositive(still), FixedTarget());
  EXPECT_FALSE(r.keep);
  EXPECT_NE(r.reason.find("still crashes"), std::string::npos);
}

TEST(DeriveNegativeTest, ParsesDescriptionAndFence) {
  IssueRecord issue = LoadIssue("108449");
  auto llm = Replies({"Mutation description: swapped static for extern.\n\n```c\n"
                      "extern int vfork(); void f() { vfork(); }\n```\nThanks."});
  TestCasePair pair = DeriveNegative(issue, "static int vfork(); void f() { vfork(); }", *llm);
  EXPECT_EQ(pair.negative, "extern int vfork(); void f() { vfork(); }");
  EXPECT_EQ(pair.positive, "static int vfork(); void f() { vfork(); }");
  EXPECT_EQ(pair.mutation_description, "swapped static for extern.\n\nThanks.");
}

TEST(DeriveNegativeTest, MalformedReplies) {
  IssueRecord issue = LoadIssue("108449");
  const std::string positive = "static int vfork(); void f() { vfork(); }";
  auto no_fence = Replies({"I changed the declaration."});
  EXPECT_EQ(CodeOf([&] { DeriveNegative(issue, positive, *no_fence); }),
            ErrorCode::kMalformedResponse);
  auto same = Replies({"Nothing.\n```c\nstatic int vfork(); void f() { vfork(); }   \n\n```\n"});
  EXPECT_EQ(CodeOf([&] { DeriveNegative(issue, positive, *same); }),
            ErrorCode::kMalformedResponse);
  auto empty = Replies({"Nothing.\n```c\n\n```\n"});
  EXPECT_EQ(CodeOf([&] { DeriveNegative(issue, positive, *empty); }),
            ErrorCode::kMalformedResponse);
}

TEST(ReviewNegativeTest, Outcomes) {
  IssueRecord issue = LoadIssue("108449");
  TargetConfig target = FixedTarget();
  TestCasePair pair{"static int g();", "extern int g();", "d"};
  EXPECT_TRUE(ReviewNegative(issue, pair, target, nullptr).accepted);

  pair.negative = "int x; /* BOOM_SEGV */";
  ReviewResult crash = ReviewNegative(issue, pair, target, nullptr);
  EXPECT_FALSE(crash.accepted);
  EXPECT_FALSE(crash.manual);
  EXPECT_NE(crash.reason.find("crashes"), std::string::npos);

  pair.negative = "int x = (;";
  ReviewResult bad = ReviewNegative(issue, pair, target, nullptr);
  EXPECT_FALSE(bad.accepted);
  EXPECT_EQ(bad.reason, "negative does not compile");

  pair.negative = "extern int g();";
  ReviewResult manual =
      ReviewNegative(issue, pair, target, [](const IssueRecord&, const TestCasePair&) {
        return false;
      });
  EXPECT_FALSE(manual.accepted);
  EXPECT_TRUE(manual.manual);
}

TEST(GeneralizeDescriptionTest, ReadsDescriptionTag) {
  TestCasePair pair{"static int g();", "extern int g();", "d"};
  auto llm = Replies({"Sure. <description>  Replace extern with static. </description>"});
  EXPECT_EQ(GeneralizeDescription("d", *llm, pair), "Replace extern with static.");
  auto bad = Replies({"Replace extern with static."});
  EXPECT_EQ(CodeOf([&] { GeneralizeDescription("d", *bad, pair); }),
            ErrorCode::kMalformedResponse);
}

const char kGoodTests[] =
    "<input1>extern int a;</input1><output1>static int a;</output1>"
    "<input2>extern int b;</input2><output2>static int b;</output2>"
    "<input3>extern int c;</input3><output3>static int c;</output3>";
const char kDegenerateTests[] =
    "<input1>extern int a;</input1><output1>static int a;</output1>"
    "<input2>int b;</input2><output2>int b;\n</output2>"
    "<input3>extern int c;</input3><output3>static int c;</output3>";

TEST(GenerateTestsTest, ParsesThreePairs) {
  TestCasePair pair{"static int g();", "extern int g();", "d"};
  auto llm = Replies({kGoodTests});
  auto tests = GenerateTests("g", *llm, pair);
  ASSERT_EQ(tests.size(), 3u);
  EXPECT_EQ(tests[1].input, "extern int b;");
  EXPECT_EQ(tests[1].expected_output, "static int b;");
  EXPECT_EQ(llm->calls(), 1u);
}

TEST(GenerateTestsTest, RegeneratesOnceOnDegeneratePair) {
  TestCasePair pair{"static int g();", "extern int g();", "d"};
  auto once = Replies({kDegenerateTests, kGoodTests});
  EXPECT_EQ(GenerateTests("g", *once, pair).size(), 3u);
  EXPECT_EQ(once->calls(), 2u);

  auto twice = Replies({kDegenerateTests, kDegenerateTests, kGoodTests});
  EXPECT_EQ(CodeOf([&] { GenerateTests("g", *twice, pair); }), ErrorCode::kDegeneratePair);
  EXPECT_EQ(twice->calls(), 2u);

  auto missing = Replies({"<input1>a</input1><output1>b</output1>"});
  EXPECT_EQ(CodeOf([&] { GenerateTests("g", *missing, pair); }),
            ErrorCode::kMalformedResponse);
}

TEST(LiftSedScriptTest, GlobalFlag) {
  auto r = LiftSedScript("#!/bin/bash\nsed -i -E 's/\\bextern\\b/static/g' \"$1\"\n");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->pattern, R"(\bextern\b)");
  EXPECT_EQ(r->replacement, "static");
  EXPECT_EQ(r->scope, Scope::kAllMatches);
}

TEST(LiftSedScriptTest, NoFlagIsRandomSite) {
  auto r = LiftSedScript("sed -Ei 's|a/b|c\\|d|' $1");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->pattern, "a/b");
  EXPECT_EQ(r->replacement, "c|d");
  EXPECT_EQ(r->scope, Scope::kRandomMatchSite);
}

TEST(LiftSedScriptTest, CaseInsensitiveFlag) {
  auto r = LiftSedScript("sed -r --in-place 's/foo/bar/Ig' \"$1\"");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->pattern, "(?i)foo");
  EXPECT_EQ(r->scope, Scope::kAllMatches);
}

TEST(LiftSedScriptTest, ExpandsVariables) {
  auto r = LiftSedScript(
      "#!/bin/bash\nset -e\nFILE=$1\nPATTERN='\"\\+x\"(\\s*\\([^)]*\\))'\n"
      "REPLACEMENT='\"\\+f\"\\1'\nsed -i -E \"s/${PATTERN}/$REPLACEMENT/\" $FILE\n");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->pattern, R"("\+x"(\s*\([^)]*\)))");
  EXPECT_EQ(r->replacement, R"("\+f"\1)");
}

TEST(LiftSedScriptTest, NonLiftable) {
  EXPECT_FALSE(LiftSedScript("sed -i 's/a/b/' \"$1\""));          // basic regex
  EXPECT_FALSE(LiftSedScript("sed -E 's/a/b/' \"$1\""));          // not in place
  EXPECT_FALSE(LiftSedScript("sed -i -E 's/a/b/p' \"$1\""));      // unknown flag
  EXPECT_FALSE(LiftSedScript("sed -i -E '/x/d' \"$1\""));         // not a substitution
  EXPECT_FALSE(LiftSedScript("sed -i -E 's/a/b/' \"$2\""));       // other operand
  EXPECT_FALSE(LiftSedScript("cat \"$1\" | sed -E 's/a/b/'"));    // pipeline
  EXPECT_FALSE(LiftSedScript("sed -i -E 's/a/b/' \"$1\"\nsed -i -E 's/c/d/' \"$1\""));
  EXPECT_FALSE(LiftSedScript("echo hi"));
  EXPECT_FALSE(LiftSedScript(""));

  Mutator m = ScriptToMutator("printf 'x' >> \"$1\"", "ext-1");
  ASSERT_TRUE(std::holds_alternative<ExternalMutator>(m));
  EXPECT_EQ(std::get<ExternalMutator>(m).script, "printf 'x' >> \"$1\"\n");
  EXPECT_EQ(MutatorId(m), "ext-1");
  Mutator lifted = ScriptToMutator("sed -i -E 's/a/b/g' \"$1\"", "rw-1");
  ASSERT_TRUE(std::holds_alternative<RewriteRule>(lifted));
  EXPECT_EQ(MutatorId(lifted), "rw-1");
}

CandidateMutator CandidateWithPasses(int passing) {
  CandidateMutator c;
  c.generalized_description = "Replace extern with static.";
  c.script_text = "sed -i -E 's/\\bextern\\b/static/g' \"$1\"";
  c.script = Rule("c", R"(\bextern\b)", "static");
  for (int i = 0; i < 4; ++i) {
    std::string in = "extern int v" + std::to_string(i) + ";";
    std::string out = i < passing ? "static int v" + std::to_string(i) + ";" : "wrong";
    c.tests.push_back({in, out});
  }
  std::swap(c.tests.front(), c.tests.back());  // the original pair is last
  return c;
}

TEST(ValidateCandidateTest, TagsByPassCount) {
  ValidationOutcome all = ValidateCandidate(CandidateWithPasses(4));
  EXPECT_EQ(all.tag, ValidationTag::kCorrect);
  EXPECT_EQ(all.passed, 4);
  EXPECT_TRUE(all.original_passed);

  ValidationOutcome three = ValidateCandidate(CandidateWithPasses(3));
  EXPECT_EQ(three.tag, ValidationTag::kPartiallyCorrect);
  EXPECT_EQ(three.passed, 3);
  EXPECT_TRUE(three.original_passed);
  ASSERT_EQ(three.diagnostics.size(), 1u);
  EXPECT_NE(three.diagnostics[0].find("--- actual\nstatic int v3;"), std::string::npos);

  EXPECT_EQ(ValidateCandidate(CandidateWithPasses(2)).tag, ValidationTag::kWrong);
  EXPECT_EQ(ValidateCandidate(CandidateWithPasses(0)).tag, ValidationTag::kWrong);
}

TEST(ValidateCandidateTest, BrokenPatternIsHarnessError) {
  CandidateMutator c = CandidateWithPasses(4);
  c.script = Rule("c", R"("\+x"(\s*\([^)]*\))", "y");
  ValidationOutcome out = ValidateCandidate(c);
  EXPECT_EQ(out.tag, ValidationTag::kError);
  EXPECT_FALSE(out.harness_ok);
  EXPECT_EQ(out.passed, 0);
}

TEST(ValidateCandidateTest, RandomSiteRulePassesWhenAnySiteMatches) {
  CandidateMutator c;
  c.script = Rule("c", "a", "b", Scope::kRandomMatchSite);
  c.tests = {{"a a a", "a b a"}, {"a a", "b a"}, {"x a", "x b"}, {"a", "b"}};
  ValidationOutcome out = ValidateCandidate(c);
  EXPECT_EQ(out.tag, ValidationTag::kCorrect);
}

TEST(ValidateCandidateTest, ExternalScript) {
  CandidateMutator c;
  c.script = ScriptToMutator("printf '// x\\n' >> \"$1\"", "ext");
  c.tests = {{"int a;\n", "int a;\n// x"}, {"b\n", "b\n// x"}, {"c\n", "c"}, {"d\n", "d\n// x"}};
  ValidationOutcome out = ValidateCandidate(c);
  EXPECT_TRUE(out.harness_ok);
  EXPECT_EQ(out.passed, 3);
  EXPECT_EQ(out.tag, ValidationTag::kPartiallyCorrect);
}

TEST(RefineMutatorTest, BudgetOfFiveRefinements) {
  CandidateMutator c = CandidateWithPasses(4);
  c.script = Rule("c", "nothing", "x");
  std::vector<std::string> replies(6, "<code>\nsed -i -E 's/never/x/g' \"$1\"\n</code>");
  auto llm = Replies(replies);
  int refinements = 0;
  for (;;) {
    ValidationOutcome out = ValidateCandidate(c);
    ASSERT_EQ(out.tag, ValidationTag::kWrong);
    try {
      c = RefineMutator(c, out, *llm);
      ++refinements;
      EXPECT_EQ(c.refinement_count, refinements);
      EXPECT_EQ(MutatorId(c.script), "c");
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kRefinementBudgetExhausted);
      break;
    }
  }
  EXPECT_EQ(refinements, kMaxRefinements);
  EXPECT_EQ(llm->calls(), static_cast<size_t>(kMaxRefinements));
}

TEST(RefineMutatorTest, AcceptedCandidateIsRejected) {
  CandidateMutator c = CandidateWithPasses(3);
  auto llm = Replies({});
  EXPECT_EQ(CodeOf([&] { RefineMutator(c, ValidateCandidate(c), *llm); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(llm->calls(), 0u);
}

TEST(RefineMutatorTest, OriginalPairMustPass) {
  CandidateMutator c = CandidateWithPasses(4);
  c.tests.back().expected_output = "nope";
  ValidationOutcome out = ValidateCandidate(c);
  EXPECT_EQ(out.tag, ValidationTag::kPartiallyCorrect);
  EXPECT_FALSE(out.original_passed);
  auto llm = Replies({"```bash\nsed -i -E 's/x/y/g' \"$1\"\n```"});
  CandidateMutator next = RefineMutator(c, out, *llm);
  EXPECT_EQ(next.refinement_count, 1);
  EXPECT_EQ(std::get<RewriteRule>(next.script).pattern, "x");
}

MinerOptions FixedOptions() {
  MinerOptions o;
  o.target = FixedTarget();
  return o;
}

MineResult Mine(const std::string& id, SharedRegistry* registry = nullptr) {
  MinerLlms llms = LoadReplayLlms(FixturesDir() / "transcripts" / (id + ".json"));
  return MineIssue(LoadIssue(id), FixedOptions(), llms, registry);
}

TEST(MineIssueTest, StaticPrototypeRule) {
  MutatorRegistry pack;
  SharedRegistry shared(&pack);
  MineResult r = Mine("108449", &shared);
  ASSERT_TRUE(r.mined) << r.reason;
  EXPECT_EQ(r.reason, "Correct");
  EXPECT_EQ(r.refinements, 0);
  EXPECT_EQ(r.derive_calls, 1u);
  EXPECT_EQ(r.agent_calls, 3u);
  ASSERT_EQ(pack.size(), 1u);
  const auto& rule = std::get<RewriteRule>(pack.at(0));
  EXPECT_EQ(rule.id, "gcc-108449");
  EXPECT_EQ(rule.provenance, "gcc#108449");
  EXPECT_EQ(rule.action, Action::kModify);
  EXPECT_TRUE(rule.elements.count(Element::kStorageClassSpecifier));
  Rng rng(0);
  EXPECT_EQ(ApplyRewrite(rule, "extern int vfork(); void f() { vfork(); }", rng).output,
            "static int vfork(); void f() { vfork(); }");
}

TEST(MineIssueTest, AsmConstraintNeedsOneRefinementAndSecondModel) {
  MineResult r = Mine("113692");
  ASSERT_TRUE(r.mined) << r.reason;
  EXPECT_EQ(r.refinements, 1);
  EXPECT_EQ(r.derive_calls, 2u);
  EXPECT_EQ(r.agent_calls, 4u);
  ASSERT_TRUE(r.mutator);
  const auto& rule = std::get<RewriteRule>(*r.mutator);
  EXPECT_EQ(rule.id, "llvm-113692");
  EXPECT_EQ(rule.scope, Scope::kRandomMatchSite);
  EXPECT_TRUE(rule.elements.count(Element::kLiteral));
  Rng rng(0);
  EXPECT_EQ(ApplyRewrite(rule, R"(float f(float a) { __asm__("fsqrt" : "+x"(a)); return a; })",
                         rng)
                .output,
            R"(float f(float a) { __asm__("fsqrt" : "+f"(a)); return a; })");
}

TEST(MineIssueTest, HeaderRuleFallsBackToExternalScript) {
  MineResult r = Mine("108777");
  ASSERT_TRUE(r.mined) << r.reason;
  ASSERT_TRUE(r.mutator);
  ASSERT_TRUE(std::holds_alternative<ExternalMutator>(*r.mutator));
  EXPECT_EQ(r.outcome->tag, ValidationTag::kCorrect);
}

TEST(MineIssueTest, Rejections) {
  MinerLlms none;
  MineResult no_input = MineIssue(LoadIssue("109001"), FixedOptions(), none, nullptr);
  EXPECT_FALSE(no_input.mined);
  EXPECT_EQ(no_input.stage, MineStage::kExtract);
  EXPECT_EQ(no_input.reason, "NoInput");

  MineResult still = MineIssue(LoadIssue("109002"), FixedOptions(), none, nullptr);
  EXPECT_FALSE(still.mined);
  EXPECT_EQ(still.stage, MineStage::kExtract);

  IssueRecord open = LoadIssue("109003");
  MineResult not_fixed = MineIssue(open, FixedOptions(), none, nullptr);
  EXPECT_EQ(not_fixed.reason, "NotFixedClosed");

  MinerOptions o = FixedOptions();
  o.reviewer = [](const IssueRecord&, const TestCasePair&) { return false; };
  MineResult reviewed = MineIssue(LoadIssue("108449"), o,
                                  LoadReplayLlms(FixturesDir() / "transcripts" / "108449.json"),
                                  nullptr);
  EXPECT_FALSE(reviewed.mined);
  EXPECT_EQ(reviewed.stage, MineStage::kReview);
  EXPECT_EQ(reviewed.agent_calls, 0u);
}

TEST(MineIssueTest, DeterministicPack) {
  std::string packs[2];
  for (auto& text : packs) {
    MutatorRegistry pack;
    SharedRegistry shared(&pack);
    for (const char* id : {"108449", "113692", "108777"}) ASSERT_TRUE(Mine(id, &shared).mined);
    text = FormatPack(pack);
  }
  EXPECT_EQ(packs[0], packs[1]);
  EXPECT_EQ(ParsePack(packs[0]).size(), 3u);
}

TEST(LoadReplayLlmsTest, BadFile) {
  ScratchDir dir;
  WriteFile(dir.path() / "t.json", R"({"derive": []})");
  EXPECT_EQ(CodeOf([&] { LoadReplayLlms(dir.path() / "t.json"); }), ErrorCode::kParseError);
}

}  // namespace
}  // namespace histmut
