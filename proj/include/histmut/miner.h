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

#ifndef HISTMUT_MINER_H_
#define HISTMUT_MINER_H_

#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "histmut/llm.h"
#include "histmut/mutator.h"
#include "histmut/runner.h"
#include "histmut/tracker.h"

namespace histmut {

struct TestCasePair {
  std::string positive;
  std::string negative;
  std::string mutation_description;
};

struct GeneratedTest {
  std::string input;
  std::string expected_output;
};

struct CandidateMutator {
  std::string generalized_description;
  std::string script_text;  // bash script as returned by the model
  Mutator script;           // lifted rule or external fallback
  std::vector<GeneratedTest> tests;  // generated tests, then the original pair
  int refinement_count = 0;
};

enum class ValidationTag { kCorrect, kPartiallyCorrect, kError, kWrong };
std::string_view ValidationTagName(ValidationTag t);

struct ValidationOutcome {
  ValidationTag tag = ValidationTag::kError;
  int passed = 0;
  bool harness_ok = false;
  bool original_passed = false;
  std::vector<std::string> diagnostics;
};

// The four-way taxonomy over four tests.
ValidationTag TagFor(int passed, bool harness_ok);

inline constexpr int kMaxRefinements = 5;

struct PromptTemplates {
  std::string derive_negative;
  std::string creator;
  std::string refiner;
  std::string example_script;

  // Reads derive_negative.txt, creator.txt, refiner.txt and example_script.sh.
  static PromptTemplates Load(const std::filesystem::path& dir);
  static const PromptTemplates& Default();
};

// Substitutes `{name}` placeholders; unknown placeholders are left intact.
std::string FillTemplate(std::string text,
                         const std::vector<std::pair<std::string, std::string>>& values);

std::optional<std::string> ExtractPositive(const IssueRecord& issue);

struct ScreenResult {
  bool keep = false;
  std::string reason;
};
ScreenResult ScreenFixed(const IssueRecord& issue, const std::string& positive,
                         const TargetConfig& target);

// Throws kMalformedResponse when the reply lacks a code block or the
// negative equals the positive.
TestCasePair DeriveNegative(const IssueRecord& issue, const std::string& positive,
                            LlmClient& llm,
                            const PromptTemplates& prompts = PromptTemplates::Default());

// Answers the manual consistency question; true accepts.
using Reviewer = std::function<bool(const IssueRecord&, const TestCasePair&)>;

struct ReviewResult {
  bool accepted = false;
  bool manual = false;  // rejection came from the reviewer
  std::string reason;
};
ReviewResult ReviewNegative(const IssueRecord& issue, const TestCasePair& pair,
                            const TargetConfig& target, const Reviewer& reviewer);

std::string GeneralizeDescription(const std::string& description, LlmClient& llm,
                                  const TestCasePair& pair,
                                  const PromptTemplates& prompts = PromptTemplates::Default());

std::vector<GeneratedTest> GenerateTests(
    const std::string& generalized, LlmClient& llm, const TestCasePair& pair, size_t n = 3,
    const PromptTemplates& prompts = PromptTemplates::Default());

// Returns the rewrite rule when `script` is variable assignments plus one
// `sed -E 's/R/S/F'` command on the first argument.
std::optional<RewriteRule> LiftSedScript(const std::string& script);

// Lifted rule or external mutator running the script with bash.
Mutator ScriptToMutator(const std::string& script, const std::string& id);

CandidateMutator CreateScript(const std::string& generalized, const TestCasePair& pair,
                              std::vector<GeneratedTest> tests, LlmClient& llm,
                              const std::string& id,
                              const PromptTemplates& prompts = PromptTemplates::Default());

ValidationOutcome ValidateCandidate(const CandidateMutator& candidate);

// Throws kRefinementBudgetExhausted once kMaxRefinements were spent and
// kInvalidArgument for outcomes that need no refinement.
CandidateMutator RefineMutator(const CandidateMutator& candidate,
                               const ValidationOutcome& outcome, LlmClient& llm,
                               const PromptTemplates& prompts = PromptTemplates::Default());

// Heuristic action and element tags from the negative -> positive edit.
void Characterize(const TestCasePair& pair, Mutator& m);

enum class MineStage { kExtract = 1, kDerive = 2, kReview = 3, kGenerate = 4 };
std::string_view MineStageName(MineStage s);

struct MinerLlms {
  // Tried in order when deriving the negative input.
  std::vector<std::shared_ptr<LlmClient>> derive;
  std::shared_ptr<LlmClient> agent;
};

// Replay clients from a per-issue transcript file:
//   {"derive": [<transcript>, ...], "agent": <transcript>}
// where each <transcript> is in the ReplayTransport format.
MinerLlms LoadReplayLlms(const std::filesystem::path& path);

struct MinerOptions {
  TargetConfig target;
  Reviewer reviewer;  // empty means assume yes
  size_t tests = 3;
  const PromptTemplates* prompts = nullptr;
};

struct MineResult {
  std::string issue_id;
  bool mined = false;
  std::optional<MineStage> stage;  // set on rejection
  std::string reason;
  std::optional<Mutator> mutator;
  std::optional<TestCasePair> pair;
  std::optional<ValidationOutcome> outcome;
  int refinements = 0;
  size_t derive_calls = 0;
  size_t agent_calls = 0;
};

// Shared registry with serialized appends.
class SharedRegistry {
 public:
  explicit SharedRegistry(MutatorRegistry* registry) : registry_(registry) {}
  void Add(Mutator m);

 private:
  MutatorRegistry* registry_;
  std::mutex mu_;
};

MineResult MineIssue(const IssueRecord& issue, const MinerOptions& options,
                     const MinerLlms& llms, SharedRegistry* registry);

// Mined rule id for an issue, e.g. "gcc-108449".
std::string MinedId(const IssueRecord& issue);

}  // namespace histmut

#endif  // HISTMUT_MINER_H_
