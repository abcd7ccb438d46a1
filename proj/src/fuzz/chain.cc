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

#include "histmut/chain.h"

#include <nlohmann/json.hpp>

#include "histmut/error.h"
#include "histmut/util.h"

namespace histmut {

using nlohmann::json;

Chain CrashEvent::FullChain() const {
  Chain c = parent_chain;
  c.push_back(final_step);
  return c;
}

std::string ReplayChain(const MutatorRegistry& registry,
                        const std::string& origin_source, const Chain& chain,
                        const std::filesystem::path& scratch_dir) {
  std::string source = origin_source;
  for (const auto& step : chain) {
    auto index = registry.Find(step.mutator_id);
    if (!index) {
      throw Error(ErrorCode::kInvalidArgument,
                  "chain references unknown mutator " + step.mutator_id);
    }
    Rng rng(step.seed);
    source = registry.Apply(*index, source, rng, scratch_dir).output;
  }
  return source;
}

void to_json(json& j, const ChainStep& s) {
  j = json{{"mutator", s.mutator_id}, {"seed", s.seed}};
  j["site"] = s.site ? json(*s.site) : json(nullptr);
}

void from_json(const json& j, ChainStep& s) {
  s.mutator_id = j.at("mutator").get<std::string>();
  s.seed = j.at("seed").get<uint64_t>();
  if (j.contains("site") && !j.at("site").is_null()) {
    s.site = j.at("site").get<size_t>();
  } else {
    s.site.reset();
  }
}

void to_json(json& j, const StackTrace& t) {
  j = json::array();
  for (const auto& f : t.frames) {
    j.push_back({{"function", f.function},
                 {"location", f.location},
                 {"pc", f.pc},
                 {"raw", f.raw}});
  }
}

void from_json(const json& j, StackTrace& t) {
  t.frames.clear();
  for (const auto& f : j) {
    t.frames.push_back({f.at("function").get<std::string>(),
                        f.at("location").get<std::string>(),
                        f.at("pc").get<std::string>(),
                        f.at("raw").get<std::string>()});
  }
}

void to_json(json& j, const RunOutcome& o) {
  j = json{{"kind", OutcomeKindName(o.kind)},
           {"signaled", o.exit.signaled},
           {"exit_code", o.exit.code},
           {"signal", o.exit.signal},
           {"duration_ms", o.duration.count()},
           {"stderr", o.stderr_text}};
  j["crash"] = o.crash ? json(CrashKindName(*o.crash)) : json(nullptr);
  j["stacktrace"] = o.stacktrace ? json(*o.stacktrace) : json(nullptr);
}

void from_json(const json& j, RunOutcome& o) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "Success") {
    o.kind = OutcomeKind::kSuccess;
  } else if (kind == "CompileError") {
    o.kind = OutcomeKind::kCompileError;
  } else if (kind == "Crash") {
    o.kind = OutcomeKind::kCrash;
  } else {
    throw Error(ErrorCode::kCorruptState, "unknown outcome kind " + kind);
  }
  o.exit.signaled = j.at("signaled").get<bool>();
  o.exit.code = j.at("exit_code").get<int>();
  o.exit.signal = j.at("signal").get<int>();
  o.duration = std::chrono::milliseconds(j.at("duration_ms").get<int64_t>());
  o.stderr_text = j.at("stderr").get<std::string>();
  o.crash.reset();
  if (!j.at("crash").is_null()) {
    o.crash = ParseCrashKind(j.at("crash").get<std::string>());
    if (!o.crash) throw Error(ErrorCode::kCorruptState, "unknown crash kind");
  }
  o.stacktrace.reset();
  if (!j.at("stacktrace").is_null()) o.stacktrace = j.at("stacktrace").get<StackTrace>();
}

json CrashMetaToJson(const CrashEvent& e) {
  return json{{"id", e.id},
              {"parent_id", e.parent_id},
              {"parent_chain", e.parent_chain},
              {"origin_seed", e.origin_seed},
              {"final_step", e.final_step},
              {"outcome", e.outcome},
              {"wall_offset_s", e.wall_offset_s},
              {"execution", e.execution}};
}

CrashEvent CrashMetaFromJson(const json& j, std::string input) {
  CrashEvent e;
  e.id = j.at("id").get<uint64_t>();
  e.parent_id = j.at("parent_id").get<uint64_t>();
  e.parent_chain = j.at("parent_chain").get<Chain>();
  e.origin_seed = j.at("origin_seed").get<std::string>();
  e.final_step = j.at("final_step").get<ChainStep>();
  e.outcome = j.at("outcome").get<RunOutcome>();
  e.wall_offset_s = j.at("wall_offset_s").get<double>();
  e.execution = j.at("execution").get<uint64_t>();
  e.input = std::move(input);
  return e;
}

}  // namespace histmut
