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

#include <csignal>
#include <filesystem>
#include <thread>

#include <gtest/gtest.h>

#include "histmut/error.h"
#include "histmut/rng.h"
#include "histmut/util.h"

namespace histmut {
namespace {

TEST(Sha256Test, KnownVectors) {
  EXPECT_EQ(Sha256Hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(Sha256Hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  Sha256 h;
  h.Update("a");
  h.Update("bc");
  EXPECT_EQ(h.FinishHex(), Sha256Hex("abc"));
}

TEST(StringsTest, SplitAndJoin) {
  EXPECT_EQ(Split("a,b,,c", ','), (std::vector<std::string>{"a", "b", "", "c"}));
  EXPECT_EQ(SplitLines("x\ny\r\nz"), (std::vector<std::string>{"x", "y", "z"}));
  EXPECT_EQ(Join({"a", "b"}, ", "), "a, b");
  EXPECT_EQ(Trim("  q \t"), "q");
  EXPECT_EQ(TrimRight("  q \n"), "  q");
  EXPECT_EQ(ReplaceAll("aXbXc", "X", "--"), "a--b--c");
  EXPECT_EQ(CountOccurrences("{f}{f}", "{f}"), 2u);
  EXPECT_TRUE(StartsWith("histmut", "hist"));
}

TEST(StringsTest, CommandLineQuoting) {
  EXPECT_EQ(SplitCommandLine(R"(cc -c "a b.c" 'x y' z\ w)"),
            (std::vector<std::string>{"cc", "-c", "a b.c", "x y", "z w"}));
}

TEST(RngTest, StateRoundTrip) {
  Rng a(42);
  a.Next();
  Rng b;
  b.RestoreState(a.SaveState());
  EXPECT_TRUE(a == b);
  EXPECT_EQ(a.Next(), b.Next());
}

TEST(RngTest, SplitSeedSeparatesStreams) {
  EXPECT_NE(SplitSeed(1, 0), SplitSeed(1, 1));
  EXPECT_NE(SplitSeed(1, 0), SplitSeed(2, 0));
  EXPECT_EQ(SplitSeed(7, 3), SplitSeed(7, 3));
}

TEST(ErrorTest, Categories) {
  EXPECT_EQ(CategoryOf(ErrorCode::kInvalidArgument), ErrorCategory::kUsage);
  EXPECT_EQ(CategoryOf(ErrorCode::kTrackerUnavailable), ErrorCategory::kInfrastructure);
  EXPECT_EQ(CategoryOf(ErrorCode::kLaunchFailure), ErrorCategory::kInfrastructure);
  EXPECT_EQ(CategoryOf(ErrorCode::kParseError), ErrorCategory::kData);
  EXPECT_EQ(CategoryOf(ErrorCode::kCorruptState), ErrorCategory::kData);
  EXPECT_EQ(ErrorCodeName(ErrorCode::kRefinementBudgetExhausted), "RefinementBudgetExhausted");
}

TEST(ProcessTest, CapturesOutputAndExit) {
  ProcessSpec spec;
  spec.argv = {"sh", "-c", "echo out; echo err >&2; exit 3"};
  spec.env = EnvFromAllowList({"PATH"});
  ProcessResult r = RunProcess(spec);
  EXPECT_FALSE(r.timed_out);
  EXPECT_FALSE(r.signaled);
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_EQ(r.stdout_text, "out\n");
  EXPECT_EQ(r.stderr_text, "err\n");
}

TEST(ProcessTest, TimeoutKillsProcessGroup) {
  ScratchDir dir;
  ProcessSpec spec;
  // The grandchild would touch the marker after the deadline if it survived.
  spec.argv = {"sh", "-c", "(sleep 2; touch marker) & sleep 30"};
  spec.cwd = dir.path();
  spec.env = EnvFromAllowList({"PATH"});
  spec.timeout = std::chrono::milliseconds(200);
  ProcessResult r = RunProcess(spec);
  EXPECT_TRUE(r.timed_out);
  std::this_thread::sleep_for(std::chrono::milliseconds(2500));
  EXPECT_FALSE(std::filesystem::exists(dir.path() / "marker"));
}

TEST(ProcessTest, ReportsSignals) {
  ProcessSpec spec;
  spec.argv = {"sh", "-c", "kill -SEGV $$"};
  spec.env = EnvFromAllowList({"PATH"});
  ProcessResult r = RunProcess(spec);
  EXPECT_TRUE(r.signaled);
  EXPECT_EQ(r.signal, SIGSEGV);
}

TEST(ProcessTest, MissingProgramIsLaunchFailure) {
  ProcessSpec spec;
  spec.argv = {"/nonexistent/histmut-no-such-tool"};
  try {
    RunProcess(spec);
    FAIL() << "expected LaunchFailure";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLaunchFailure);
  }
}

TEST(ProcessTest, StdinIsDelivered) {
  ProcessSpec spec;
  spec.argv = {"cat"};
  spec.env = EnvFromAllowList({"PATH"});
  spec.stdin_text = "piped";
  EXPECT_EQ(RunProcess(spec).stdout_text, "piped");
}

TEST(ScratchDirTest, RemovedOnDestruction) {
  std::filesystem::path p;
  {
    ScratchDir d;
    p = d.path();
    WriteFile(p / "sub" / "f.txt", "x");
    EXPECT_EQ(ReadFile(p / "sub" / "f.txt"), "x");
  }
  EXPECT_FALSE(std::filesystem::exists(p));
}

}  // namespace
}  // namespace histmut
