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

#ifndef HISTMUT_CHAIN_H_
#define HISTMUT_CHAIN_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "histmut/mutator.h"
#include "histmut/runner.h"

namespace histmut {

// One applied mutation. Replaying uses `seed`; `site` is informational.
struct ChainStep {
  std::string mutator_id;
  std::optional<size_t> site;
  uint64_t seed = 0;

  bool operator==(const ChainStep&) const = default;
};

using Chain = std::vector<ChainStep>;

struct QueueEntry {
  uint64_t id = 0;
  std::string source;
  Chain chain;              // empty for seed-corpus entries
  std::string origin_seed;  // corpus-relative path of the originating seed
  uint64_t added_at = 0;    // execution counter at enqueue time

  bool operator==(const QueueEntry&) const = default;
};

struct CrashEvent {
  uint64_t id = 0;
  uint64_t parent_id = 0;
  Chain parent_chain;
  std::string origin_seed;
  ChainStep final_step;
  std::string input;  // the crashing source
  RunOutcome outcome;
  double wall_offset_s = 0;
  uint64_t execution = 0;

  Chain FullChain() const;
};

// Applies `chain` to `origin_source` in order. Throws kInvalidArgument when a
// step names a mutator that is not in `registry`; plugin failures propagate.
std::string ReplayChain(const MutatorRegistry& registry,
                        const std::string& origin_source, const Chain& chain,
                        const std::filesystem::path& scratch_dir = {});

void to_json(nlohmann::json& j, const ChainStep& s);
void from_json(const nlohmann::json& j, ChainStep& s);
void to_json(nlohmann::json& j, const StackTrace& t);
void from_json(const nlohmann::json& j, StackTrace& t);
void to_json(nlohmann::json& j, const RunOutcome& o);
void from_json(const nlohmann::json& j, RunOutcome& o);
// Crash metadata; the input text itself is stored next to it.
nlohmann::json CrashMetaToJson(const CrashEvent& e);
CrashEvent CrashMetaFromJson(const nlohmann::json& j, std::string input);

}  // namespace histmut

#endif  // HISTMUT_CHAIN_H_
