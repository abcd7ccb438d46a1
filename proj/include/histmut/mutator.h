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

#ifndef HISTMUT_MUTATOR_H_
#define HISTMUT_MUTATOR_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "histmut/rng.h"

namespace histmut {

enum class Action { kAdd, kModify, kRemove, kSwap };

// Program-element tags used to characterize what a mutator touches.
enum class Element {
  kAttribute,
  kBuiltinFunction,
  kUnaryOperator,
  kFunctionDeclaration,
  kLiteral,
  kInitialization,
  kParameter,
  kExpression,
  kStorageClassSpecifier,
  kStatement,
  kType,
  kVariableDeclaration,
  kCharacter,
};

enum class Scope { kAllMatches, kFirstMatch, kRandomMatchSite };

std::string_view ActionName(Action a);
std::string_view ElementName(Element e);
std::string_view ScopeName(Scope s);
std::optional<Action> ParseAction(std::string_view s);
std::optional<Element> ParseElement(std::string_view s);
std::optional<Scope> ParseScope(std::string_view s);
const std::vector<Element>& AllElements();

// A regex rewrite. `pattern` and `guard` use an extended regex dialect with
// \b and \s; `replacement` is sed-style (\0..\9 and & refer to groups).
struct RewriteRule {
  std::string id;
  std::string pattern;
  std::string replacement;
  Scope scope = Scope::kRandomMatchSite;
  std::optional<std::string> guard;
  Action action = Action::kModify;
  std::set<Element> elements;
  std::string provenance;

  bool operator==(const RewriteRule&) const = default;
};

// A mutator run as an external command on a file. The command template holds
// one {file} placeholder; when `script` is set it is materialized and passed
// through a {script} placeholder.
struct ExternalMutator {
  std::string id;
  std::string command;
  std::optional<std::string> script;
  Action action = Action::kModify;
  std::set<Element> elements;
  std::string provenance;
  std::chrono::milliseconds timeout{5000};

  bool operator==(const ExternalMutator&) const = default;
};

using Mutator = std::variant<RewriteRule, ExternalMutator>;

const std::string& MutatorId(const Mutator& m);
Action MutatorAction(const Mutator& m);
const std::set<Element>& MutatorElements(const Mutator& m);

struct MutationResult {
  std::string output;
  bool changed = false;
  size_t sites_matched = 0;
  std::optional<size_t> site_chosen;
};

// A rewrite rule with its regexes compiled. Immutable and shareable across
// threads.
class CompiledRewrite {
 public:
  // Throws kInvalidPattern or kReplacementGroupOutOfRange.
  static std::shared_ptr<const CompiledRewrite> Compile(const RewriteRule& rule);

  MutationResult Apply(std::string_view source, Rng& rng) const;
  // Applies at an explicit match site (0-based), ignoring the rule's scope.
  MutationResult ApplyAtSite(std::string_view source, size_t site) const;
  size_t CountSites(std::string_view source) const;

  const RewriteRule& rule() const { return rule_; }

  struct Impl;
  ~CompiledRewrite();

 private:
  CompiledRewrite(RewriteRule rule, std::unique_ptr<Impl> impl);
  RewriteRule rule_;
  std::unique_ptr<Impl> impl_;
};

// Checks the type invariants; throws on the first violation.
void ValidateMutator(const Mutator& m);

MutationResult ApplyRewrite(const RewriteRule& rule, std::string_view source,
                            Rng& rng);

// Runs an external mutator on a copy of `source` inside `scratch_dir`.
// Throws kPluginTimeout or kPluginNonZeroExit.
MutationResult ApplyExternal(const ExternalMutator& m, std::string_view source,
                             const std::filesystem::path& scratch_dir);

// Cochran sample size (p = 0.5) with finite-population correction.
uint64_t SampleSize(uint64_t population, double confidence = 0.99,
                    double margin = 0.01);

struct SampleInput {
  std::string name;
  std::string text;
};

struct MutatorFingerprint {
  std::string digest;
  size_t sample_size = 0;
  std::string sample_manifest_digest;

  bool operator==(const MutatorFingerprint&) const = default;
};

class MutatorRegistry {
 public:
  MutatorRegistry() = default;

  // Validates and appends. Throws kDuplicateId and validation errors.
  void Add(Mutator m);

  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const Mutator& at(size_t i) const { return entries_.at(i).mutator; }
  std::optional<size_t> Find(std::string_view id) const;
  std::vector<std::string> Ids() const;

  // Restricts scheduling to `ids` (successful-only mode).
  void RestrictTo(const std::set<std::string>& ids);
  void ClearRestriction();
  bool restricted() const { return restricted_; }
  const std::set<std::string>& successful_ids() const { return successful_; }
  // Indices eligible for scheduling.
  std::vector<size_t> ActiveIndices() const;

  // Applies entry `index`. External failures throw (kPluginTimeout,
  // kPluginNonZeroExit).
  MutationResult Apply(size_t index, std::string_view source, Rng& rng,
                       const std::filesystem::path& scratch_dir) const;

  bool operator==(const MutatorRegistry& other) const;

 private:
  struct Entry {
    Mutator mutator;
    std::shared_ptr<const CompiledRewrite> compiled;  // rewrite rules only
  };
  std::vector<Entry> entries_;
  bool restricted_ = false;
  std::set<std::string> successful_;
};

// Digest of the mutator's behavior on `sample`. Per-input outputs are framed
// with index and length before hashing.
MutatorFingerprint FingerprintMutator(const MutatorRegistry& registry,
                                      size_t index,
                                      const std::vector<SampleInput>& sample,
                                      uint64_t rng_seed);
MutatorFingerprint FingerprintMutator(const Mutator& m,
                                      const std::vector<SampleInput>& sample,
                                      uint64_t rng_seed);

struct DedupResult {
  MutatorRegistry registry;
  std::vector<std::pair<std::string, std::string>> dropped;  // (kept, dropped)
};

DedupResult DedupMutators(const MutatorRegistry& registry,
                          const std::vector<SampleInput>& sample,
                          uint64_t rng_seed);

// Loads every regular file under `dir` sorted by relative path.
std::vector<SampleInput> LoadSample(const std::filesystem::path& dir);

// Draws a deterministic random subset of `corpus` of size `n`, then sorts it
// by name.
std::vector<SampleInput> DrawSample(const std::vector<SampleInput>& corpus,
                                    size_t n, uint64_t rng_seed);

}  // namespace histmut

#endif  // HISTMUT_MUTATOR_H_
