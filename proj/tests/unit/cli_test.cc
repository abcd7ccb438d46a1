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

#include <gtest/gtest.h>

#include "histmut/cli.h"
#include "histmut/error.h"
#include "histmut/pack.h"
#include "histmut/util.h"
#include "testing/testing.h"

namespace histmut {
namespace {

namespace fs = std::filesystem;
using testing::RunCli;

TEST(ToolConfigTest, FormatParseRoundTrip) {
  ToolConfig c = DefaultToolConfig();
  SetConfigValue(c, "fuzz.jobs", "4");
  SetConfigValue(c, "fuzz.max_steps", "250");
  SetConfigValue(c, "fuzz.stop_after_unique", "3");
  SetConfigValue(c, "target.command", "cc -c {input}");
  SetConfigValue(c, "target.timeout_ms", "1500");
  SetConfigValue(c, "llm.derive_models", "a, b ,c");
  SetConfigValue(c, "triage.minimize", "off");
  SetConfigValue(c, "tracker.kind", "github");

  ToolConfig back = ParseToolConfig(FormatToolConfig(c));
  EXPECT_EQ(back.jobs, 4u);
  EXPECT_EQ(back.max_steps, 250u);
  EXPECT_EQ(back.stop_after_unique, 3u);
  EXPECT_FALSE(back.max_files);
  EXPECT_EQ(back.target.command, "cc -c {input}");
  EXPECT_EQ(back.target.timeout.count(), 1500);
  EXPECT_EQ(back.derive_models, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_FALSE(back.minimize);
  EXPECT_EQ(back.tracker, "github");
  EXPECT_EQ(FormatToolConfig(back), FormatToolConfig(c));
}

TEST(ToolConfigTest, BadValues) {
  ToolConfig c;
  auto code = [&](const std::string& k, const std::string& v) {
    try {
      SetConfigValue(c, k, v);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  EXPECT_EQ(code("fuzz.nope", "1"), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code("fuzz.jobs", "0"), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code("fuzz.jobs", "-2"), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code("fuzz.budget_s", "x"), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code("llm.transport", "carrier-pigeon"), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code("triage.minimize", "maybe"), ErrorCode::kInvalidArgument);
}

TEST(CliTest, UsageErrorsExitOne) {
  ProcessResult r = RunCli({"frobnicate"});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.stderr_text.find("histmut: error:"), std::string::npos);

  r = RunCli({"--set", "fuzz.bogus=1", "pack", "list", "x"});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.stderr_text.find("histmut: error: InvalidArgument"), std::string::npos);
}

TEST(CliTest, MissingFileIsInfrastructure) {
  ProcessResult r = RunCli({"pack", "list", "/nonexistent/pack.txt"});
  EXPECT_EQ(r.exit_code, 2) << r.stderr_text;
}

TEST(CliTest, BadPackIsDataError) {
  ScratchDir dir;
  WriteFile(dir.path() / "bad.txt", "[mutator]\nid = x\n");
  ProcessResult r = RunCli({"pack", "list", (dir.path() / "bad.txt").string()});
  EXPECT_EQ(r.exit_code, 3) << r.stderr_text;
  EXPECT_NE(r.stderr_text.find("histmut: error: ParseError"), std::string::npos);
}

TEST(CliTest, ListsStarterPack) {
  ProcessResult r = RunCli({"pack", "list", (testing::DataDir() / "starter_pack.txt").string()});
  ASSERT_EQ(r.exit_code, 0) << r.stderr_text;
  EXPECT_EQ(SplitLines(TrimRight(r.stdout_text)).size(), testing::StarterPack().size());
}

TEST(CliTest, MineFuzzTriageReport) {
  ScratchDir dir;
  const fs::path fixtures = testing::FixturesDir();
  const std::string fixed = testing::FixtureCompiler() + " --fixed -O2 -c {input}";
  const std::string pack = (dir.path() / "mined.txt").string();
  ProcessResult mine = RunCli({"--target", fixed, "mine", "--issues",
                               (fixtures / "issues").string(), "--transcripts",
                               (fixtures / "transcripts").string(), "-o", pack, "-y"});
  ASSERT_EQ(mine.exit_code, 0) << mine.stderr_text;
  MutatorRegistry mined = LoadMutatorPack(pack);
  EXPECT_EQ(mined.size(), 3u);
  EXPECT_TRUE(mined.Find("gcc-108449"));
  EXPECT_TRUE(mined.Find("llvm-113692"));

  const std::string campaign = (dir.path() / "c1").string();
  const std::string target = testing::FixtureCompiler() + " -O2 -c {input}";
  ProcessResult fuzz =
      RunCli({"--seed", "7", "--target", target, "fuzz", "--seeds",
              (fixtures / "seeds").string(), "--max-steps", "200", "-o", campaign});
  ASSERT_EQ(fuzz.exit_code, 0) << fuzz.stderr_text;
  EXPECT_NE(fuzz.stdout_text.find("steps 200"), std::string::npos) << fuzz.stdout_text;

  ProcessResult triage = RunCli({"--target", target, "triage", campaign});
  ASSERT_EQ(triage.exit_code, 0) << triage.stderr_text;
  EXPECT_TRUE(fs::exists(fs::path(campaign) / "triage" / "groups.csv"));

  const std::string report = (dir.path() / "report").string();
  ProcessResult rep = RunCli({"report", campaign, "-o", report});
  ASSERT_EQ(rep.exit_code, 0) << rep.stderr_text;
  EXPECT_FALSE(fs::is_empty(report));
}

TEST(CliTest, ResumeMissingStateIsDataError) {
  ScratchDir dir;
  ProcessResult r = RunCli({"fuzz", "--resume", dir.path().string(), "-o",
                            (dir.path() / "out").string()});
  EXPECT_NE(r.exit_code, 0);
  EXPECT_NE(r.exit_code, 1);
  EXPECT_NE(r.stderr_text.find("histmut: error:"), std::string::npos);
}

}  // namespace
}  // namespace histmut
