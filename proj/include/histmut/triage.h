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

#ifndef HISTMUT_TRIAGE_H_
#define HISTMUT_TRIAGE_H_

#include <compare>
#include <functional>
#include <memory>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "histmut/chain.h"
#include "histmut/mutator.h"
#include "histmut/runner.h"

namespace histmut {

// Identity of a crash: the two innermost non-helper frames, each rendered as
// "function@location" (or "function@pc" without a location).
struct DedupKey {
  std::string first;
  std::string second;

  static constexpr std::string_view kNoFrame = "<none>";

  std::string ToString() const { return first + " | " + second; }
  static DedupKey FromString(std::string_view s);
  auto operator<=>(const DedupKey&) const = default;
};

const std::vector<std::string>& DefaultHelpers();

// Frames whose function name contains a helper entry are skipped.
DedupKey MakeDedupKey(const StackTrace& trace,
                      const std::vector<std::string>& helpers,
                      std::optional<CrashKind> kind = std::nullopt);

// Key of a crash outcome (uses the outcome's trace and crash kind).
DedupKey KeyOf(const RunOutcome& outcome, const std::vector<std::string>& helpers);

enum class CompilerModule { kFrontEnd, kIRGeneration, kOptimization, kBackEnd, kUnknown };

std::string_view ModuleName(CompilerModule m);
std::optional<CompilerModule> ParseModule(std::string_view s);

// Ordered rules mapping frame function names or locations to modules.
class ModuleClassifier {
 public:
  enum class Field { kFunction, kLocation, kAny };

  // Text format, one rule per line: `<Module> <function|location|any> <regex>`.
  static ModuleClassifier Parse(std::string_view text, std::string_view origin = "");
  static ModuleClassifier Load(const std::filesystem::path& path);

  void AddRule(CompilerModule module, Field field, const std::string& regex);

  // Innermost non-helper frame matching any rule decides; within a frame the
  // first matching rule wins.
  CompilerModule Classify(const StackTrace& trace,
                          const std::vector<std::string>& helpers = {}) const;

  size_t size() const { return rules_.size(); }

 private:
  struct Rule;
  std::vector<std::shared_ptr<const Rule>> rules_;
};

CompilerModule ClassifyModule(const StackTrace& trace,
                              const ModuleClassifier& rules);

struct CrashGroup {
  DedupKey key;
  std::vector<size_t> members;  // indices into the event list
  size_t representative = 0;    // index into the event list
  CrashKind kind = CrashKind::kSegmentationFault;
  CompilerModule module = CompilerModule::kUnknown;
};

// Partitions `events` by dedup key, ordered by first occurrence.
std::vector<CrashGroup> GroupCrashes(const std::vector<CrashEvent>& events,
                                     const std::vector<std::string>& helpers,
                                     const ModuleClassifier* classifier = nullptr);

struct MinimizedChain {
  Chain original;
  Chain minimal;
  bool verified = false;
  // Single steps of `original` that reproduce the crash on their own.
  Chain single_step_reproducers;
  std::string diagnostic;  // set when verification failed
  size_t replays = 0;
};

struct ReplayContext {
  const MutatorRegistry* registry = nullptr;
  TargetConfig target;
  std::vector<std::string> helpers = DefaultHelpers();
};

// Delta-debugging search for a 1-minimal subsequence of the event's chain that
// still crashes with the same dedup key.
MinimizedChain MinimizeChain(const CrashEvent& event, const std::string& origin_source,
                             const ReplayContext& ctx);

// Generic ddmin over indices [0, n): returns a 1-minimal subset (sorted) for
// which `reproduces` holds, assuming it holds for the full set.
std::vector<size_t> DeltaDebug(size_t n,
                               const std::function<bool(const std::vector<size_t>&)>& reproduces);

// Cardinality of one region of a Venn decomposition: keys present in exactly
// the sets named by `members`.
struct VennRegion {
  std::vector<std::string> members;
  size_t count = 0;
};

// All 2^n - 1 regions, ordered by bitmask over the (sorted) set names.
std::vector<VennRegion> DiffCampaigns(
    const std::map<std::string, std::set<std::string>>& keys_by_campaign);

// Union-merge of repeated runs of one technique.
std::set<std::string> MergeRuns(const std::vector<std::set<std::string>>& runs);

struct MutatorStatsEntry {
  size_t bugs = 0;
  std::optional<Action> action;
  std::set<Element> elements;
};

struct MutatorStats {
  std::map<std::string, MutatorStatsEntry> per_mutator;
  std::map<size_t, size_t> bugs_histogram;          // #bugs -> #mutators
  std::map<size_t, size_t> chain_length_histogram;  // length -> #crashes
  std::map<std::string, size_t> action_distribution;
  std::map<std::string, size_t> element_distribution;
};

// `minimized[i]` belongs to `groups[i]`. A group credits each single-step
// reproducer when any exist, otherwise every mutator of its minimal chain.
MutatorStats ComputeMutatorStats(const std::vector<CrashGroup>& groups,
                                 const std::vector<MinimizedChain>& minimized,
                                 const MutatorRegistry* registry = nullptr);

}  // namespace histmut

#endif  // HISTMUT_TRIAGE_H_
