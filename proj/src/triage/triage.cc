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

#include "histmut/triage.h"

#include <algorithm>
#include <map>

#include <boost/regex.hpp>

#include "histmut/error.h"
#include "histmut/util.h"

namespace histmut {

DedupKey DedupKey::FromString(std::string_view s) {
  size_t sep = s.find(" | ");
  if (sep == std::string_view::npos) return {std::string(s), std::string(kNoFrame)};
  return {std::string(s.substr(0, sep)), std::string(s.substr(sep + 3))};
}

const std::vector<std::string>& DefaultHelpers() {
  static const std::vector<std::string> helpers = {
      "diagnostic",        "internal_error", "fancy_abort",
      "report_fatal_error", "print_stack_trace", "PrintStackTrace",
      "SignalHandler",     "__assert_fail",  "__GI_",
  };
  return helpers;
}

namespace {

bool IsHelper(const StackFrame& f, const std::vector<std::string>& helpers) {
  for (const auto& h : helpers) {
    if (!h.empty() && f.function.find(h) != std::string::npos) return true;
  }
  return false;
}

std::string FrameIdentity(const StackFrame& f) {
  std::string fn = f.function.empty() ? "?" : f.function;
  const std::string& where = f.location.empty() ? f.pc : f.location;
  return where.empty() ? fn : fn + "@" + where;
}

}  // namespace

DedupKey MakeDedupKey(const StackTrace& trace,
                      const std::vector<std::string>& helpers,
                      std::optional<CrashKind> kind) {
  std::vector<const StackFrame*> kept;
  for (const auto& f : trace.frames) {
    if (IsHelper(f, helpers)) continue;
    kept.push_back(&f);
    if (kept.size() == 2) break;
  }
  DedupKey key{std::string(DedupKey::kNoFrame), std::string(DedupKey::kNoFrame)};
  if (kept.empty()) {
    key.first = kind ? "<" + std::string(CrashKindName(*kind)) + ">" : "<no-frames>";
    return key;
  }
  key.first = FrameIdentity(*kept[0]);
  if (kept.size() > 1) key.second = FrameIdentity(*kept[1]);
  return key;
}

DedupKey KeyOf(const RunOutcome& outcome, const std::vector<std::string>& helpers) {
  static const StackTrace kEmpty;
  return MakeDedupKey(outcome.stacktrace ? *outcome.stacktrace : kEmpty, helpers,
                      outcome.crash);
}

std::string_view ModuleName(CompilerModule m) {
  switch (m) {
    case CompilerModule::kFrontEnd: return "FrontEnd";
    case CompilerModule::kIRGeneration: return "IRGeneration";
    case CompilerModule::kOptimization: return "Optimization";
    case CompilerModule::kBackEnd: return "BackEnd";
    case CompilerModule::kUnknown: return "Unknown";
  }
  return "Unknown";
}

std::optional<CompilerModule> ParseModule(std::string_view s) {
  for (auto m : {CompilerModule::kFrontEnd, CompilerModule::kIRGeneration,
                 CompilerModule::kOptimization, CompilerModule::kBackEnd,
                 CompilerModule::kUnknown}) {
    if (ModuleName(m) == s) return m;
  }
  return std::nullopt;
}

struct ModuleClassifier::Rule {
  CompilerModule module;
  Field field;
  boost::regex regex;
};

void ModuleClassifier::AddRule(CompilerModule module, Field field,
                               const std::string& regex) {
  try {
    rules_.push_back(std::make_shared<const Rule>(
        Rule{module, field, boost::regex(regex, boost::regex::perl)}));
  } catch (const boost::regex_error& e) {
    throw Error(ErrorCode::kInvalidPattern,
                "classifier rule /" + regex + "/: " + e.what());
  }
}

ModuleClassifier ModuleClassifier::Parse(std::string_view text,
                                         std::string_view origin) {
  ModuleClassifier c;
  auto lines = SplitLines(text);
  for (size_t i = 0; i < lines.size(); ++i) {
    std::string line = Trim(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    auto where = std::string(origin) + ":" + std::to_string(i + 1);
    size_t a = line.find_first_of(" \t");
    size_t b = a == std::string::npos ? a : line.find_first_not_of(" \t", a);
    size_t c2 = b == std::string::npos ? b : line.find_first_of(" \t", b);
    if (c2 == std::string::npos) {
      throw Error(ErrorCode::kParseError, where + ": expected '<Module> <field> <regex>'");
    }
    auto module = ParseModule(line.substr(0, a));
    if (!module) throw Error(ErrorCode::kParseError, where + ": unknown module");
    std::string field = line.substr(b, c2 - b);
    Field f;
    if (field == "function") {
      f = Field::kFunction;
    } else if (field == "location") {
      f = Field::kLocation;
    } else if (field == "any") {
      f = Field::kAny;
    } else {
      throw Error(ErrorCode::kParseError, where + ": unknown field '" + field + "'");
    }
    c.AddRule(*module, f, Trim(line.substr(c2)));
  }
  return c;
}

ModuleClassifier ModuleClassifier::Load(const std::filesystem::path& path) {
  return Parse(ReadFile(path), path.string());
}

CompilerModule ModuleClassifier::Classify(const StackTrace& trace,
                                          const std::vector<std::string>& helpers) const {
  for (const auto& frame : trace.frames) {
    if (IsHelper(frame, helpers)) continue;
    for (const auto& rule : rules_) {
      bool hit = false;
      if (rule->field != Field::kLocation) {
        hit = boost::regex_search(frame.function, rule->regex);
      }
      if (!hit && rule->field != Field::kFunction) {
        hit = boost::regex_search(frame.location, rule->regex);
      }
      if (hit) return rule->module;
    }
  }
  return CompilerModule::kUnknown;
}

CompilerModule ClassifyModule(const StackTrace& trace, const ModuleClassifier& rules) {
  return rules.Classify(trace);
}

std::vector<CrashGroup> GroupCrashes(const std::vector<CrashEvent>& events,
                                     const std::vector<std::string>& helpers,
                                     const ModuleClassifier* classifier) {
  std::vector<CrashGroup> groups;
  std::map<DedupKey, size_t> index;
  for (size_t i = 0; i < events.size(); ++i) {
    DedupKey key = KeyOf(events[i].outcome, helpers);
    auto [it, inserted] = index.emplace(key, groups.size());
    if (inserted) {
      CrashGroup g;
      g.key = key;
      g.representative = i;
      g.kind = events[i].outcome.crash.value_or(CrashKind::kSegmentationFault);
      if (classifier && events[i].outcome.stacktrace) {
        g.module = classifier->Classify(*events[i].outcome.stacktrace, helpers);
      }
      groups.push_back(std::move(g));
    }
    CrashGroup& g = groups[it->second];
    g.members.push_back(i);
    const std::string& rep = events[g.representative].input;
    const std::string& cand = events[i].input;
    if (cand.size() < rep.size() || (cand.size() == rep.size() && cand < rep)) {
      g.representative = i;
    }
  }
  return groups;
}

std::vector<size_t> DeltaDebug(
    size_t n, const std::function<bool(const std::vector<size_t>&)>& reproduces) {
  std::vector<size_t> cur(n);
  for (size_t i = 0; i < n; ++i) cur[i] = i;
  size_t parts = 2;
  while (cur.size() >= 2) {
    parts = std::min(parts, cur.size());
    std::vector<std::vector<size_t>> chunks(parts);
    for (size_t i = 0; i < cur.size(); ++i) chunks[i * parts / cur.size()].push_back(cur[i]);
    bool reduced = false;
    for (const auto& chunk : chunks) {
      if (reproduces(chunk)) {
        cur = chunk;
        parts = 2;
        reduced = true;
        break;
      }
    }
    if (!reduced && parts > 2) {
      for (size_t c = 0; c < chunks.size(); ++c) {
        std::vector<size_t> complement;
        for (size_t d = 0; d < chunks.size(); ++d) {
          if (d != c) complement.insert(complement.end(), chunks[d].begin(), chunks[d].end());
        }
        std::sort(complement.begin(), complement.end());
        if (reproduces(complement)) {
          cur = complement;
          parts = std::max<size_t>(parts - 1, 2);
          reduced = true;
          break;
        }
      }
    }
    if (!reduced) {
      if (parts >= cur.size()) break;
      parts = std::min(parts * 2, cur.size());
    }
  }
  // Make 1-minimality explicit: no single removal may still reproduce.
  bool changed = true;
  while (changed && !cur.empty()) {
    changed = false;
    for (size_t i = 0; i < cur.size(); ++i) {
      std::vector<size_t> smaller = cur;
      smaller.erase(smaller.begin() + static_cast<std::ptrdiff_t>(i));
      if (reproduces(smaller)) {
        cur = std::move(smaller);
        changed = true;
        break;
      }
    }
  }
  return cur;
}

MinimizedChain MinimizeChain(const CrashEvent& event, const std::string& origin_source,
                             const ReplayContext& ctx) {
  MinimizedChain result;
  result.original = event.FullChain();
  result.minimal = result.original;
  const DedupKey expected = KeyOf(event.outcome, ctx.helpers);
  std::map<std::vector<size_t>, bool> cache;
  bool any_crash = false;

  auto reproduces = [&](const std::vector<size_t>& subset) {
    auto it = cache.find(subset);
    if (it != cache.end()) return it->second;
    Chain chain;
    for (size_t i : subset) chain.push_back(result.original[i]);
    bool ok = false;
    try {
      std::string source = ReplayChain(*ctx.registry, origin_source, chain,
                                       ctx.target.workdir);
      RunOutcome outcome = Compile(ctx.target, source);
      ++result.replays;
      if (outcome.kind == OutcomeKind::kCrash) {
        any_crash = true;
        ok = KeyOf(outcome, ctx.helpers) == expected;
      }
    } catch (const Error&) {
      ok = false;  // plugin or launch failure: treat as non-reproducing
    }
    cache.emplace(subset, ok);
    return ok;
  };

  std::vector<size_t> all(result.original.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;
  if (!reproduces(all)) {
    result.diagnostic =
        any_crash ? "replay crashes with a different dedup key"
                  : std::string(ErrorCodeName(ErrorCode::kReplayDivergence)) +
                        ": replaying the chain no longer crashes";
    return result;
  }
  std::vector<size_t> minimal = DeltaDebug(all.size(), reproduces);
  result.minimal.clear();
  for (size_t i : minimal) result.minimal.push_back(result.original[i]);
  result.verified = true;
  for (size_t i = 0; i < all.size(); ++i) {
    if (reproduces({i})) result.single_step_reproducers.push_back(result.original[i]);
  }
  return result;
}

std::vector<VennRegion> DiffCampaigns(
    const std::map<std::string, std::set<std::string>>& keys_by_campaign) {
  std::vector<std::string> names;
  std::vector<const std::set<std::string>*> sets;
  for (const auto& [name, keys] : keys_by_campaign) {
    names.push_back(name);
    sets.push_back(&keys);
  }
  if (names.size() > 20) {
    throw Error(ErrorCode::kInvalidArgument, "too many campaigns for a Venn diff");
  }
  size_t n = names.size();
  std::map<std::string, size_t> membership;
  for (size_t i = 0; i < n; ++i) {
    for (const auto& k : *sets[i]) membership[k] |= size_t{1} << i;
  }
  std::vector<size_t> counts(size_t{1} << n, 0);
  for (const auto& [k, mask] : membership) ++counts[mask];
  std::vector<VennRegion> regions;
  for (size_t mask = 1; mask < counts.size(); ++mask) {
    VennRegion r;
    for (size_t i = 0; i < n; ++i) {
      if (mask & (size_t{1} << i)) r.members.push_back(names[i]);
    }
    r.count = counts[mask];
    regions.push_back(std::move(r));
  }
  return regions;
}

std::set<std::string> MergeRuns(const std::vector<std::set<std::string>>& runs) {
  std::set<std::string> out;
  for (const auto& r : runs) out.insert(r.begin(), r.end());
  return out;
}

MutatorStats ComputeMutatorStats(const std::vector<CrashGroup>& groups,
                                 const std::vector<MinimizedChain>& minimized,
                                 const MutatorRegistry* registry) {
  if (groups.size() != minimized.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "one minimized chain per crash group is required");
  }
  MutatorStats stats;
  for (size_t g = 0; g < groups.size(); ++g) {
    const MinimizedChain& mc = minimized[g];
    const Chain& credit_from =
        mc.single_step_reproducers.empty() ? mc.minimal : mc.single_step_reproducers;
    std::set<std::string> credited;
    for (const auto& step : credit_from) credited.insert(step.mutator_id);
    for (const auto& id : credited) ++stats.per_mutator[id].bugs;
    ++stats.chain_length_histogram[mc.minimal.size()];
  }
  for (auto& [id, entry] : stats.per_mutator) {
    ++stats.bugs_histogram[entry.bugs];
    if (!registry) continue;
    if (auto idx = registry->Find(id)) {
      const Mutator& m = registry->at(*idx);
      entry.action = MutatorAction(m);
      entry.elements = MutatorElements(m);
      ++stats.action_distribution[std::string(ActionName(*entry.action))];
      for (Element e : entry.elements) {
        ++stats.element_distribution[std::string(ElementName(e))];
      }
    }
  }
  return stats;
}

}  // namespace histmut
