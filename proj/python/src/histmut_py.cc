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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "histmut/error.h"
#include "histmut/fuzz.h"
#include "histmut/mutator.h"
#include "histmut/pack.h"
#include "histmut/runner.h"
#include "histmut/triage.h"

namespace py = pybind11;
using namespace pybind11::literals;

namespace histmut {
namespace {

Scope ScopeArg(const std::string& name) {
  auto s = ParseScope(name);
  if (!s) throw Error(ErrorCode::kInvalidArgument, "unknown scope '" + name + "'");
  return *s;
}

py::dict OutcomeDict(const RunOutcome& o, const std::vector<std::string>& helpers) {
  py::dict d;
  d["kind"] = std::string(OutcomeKindName(o.kind));
  d["crash"] = o.crash ? py::object(py::str(std::string(CrashKindName(*o.crash)))) : py::none();
  d["key"] = o.kind == OutcomeKind::kCrash ? py::object(py::str(KeyOf(o, helpers).ToString()))
                                           : py::none();
  d["stderr"] = o.stderr_text;
  return d;
}

py::tuple ApplyRule(const std::string& pattern, const std::string& replacement,
                    const std::string& source, const std::string& scope, uint64_t seed) {
  RewriteRule rule;
  rule.id = "py";
  rule.pattern = pattern;
  rule.replacement = replacement;
  rule.scope = ScopeArg(scope);
  rule.elements = {Element::kExpression};
  Rng rng(seed);
  MutationResult r = ApplyRewrite(rule, source, rng);
  return py::make_tuple(r.output, r.changed, r.sites_matched);
}

py::tuple Classify(int exit_code, int signal, const std::string& stderr_text, bool timed_out) {
  ExitStatus exit{signal != 0, exit_code, signal};
  OutcomeClass c = ClassifyOutcome(exit, stderr_text, timed_out);
  return py::make_tuple(std::string(OutcomeKindName(c.kind)),
                        c.crash ? py::object(py::str(std::string(CrashKindName(*c.crash))))
                                : py::none());
}

std::string KeyFromStderr(const std::string& stderr_text,
                          std::optional<std::vector<std::string>> helpers) {
  StackTrace t = ParseStackTrace(stderr_text, DetectDialect(stderr_text));
  return MakeDedupKey(t, helpers ? *helpers : DefaultHelpers()).ToString();
}

std::vector<std::string> PackIds(const std::filesystem::path& path) {
  return LoadMutatorPack(path).Ids();
}

py::dict CompileSource(const std::string& command, const std::string& source, int timeout_ms) {
  TargetConfig t;
  t.command = command;
  t.timeout = std::chrono::milliseconds(timeout_ms);
  RunOutcome o;
  {
    py::gil_scoped_release release;
    o = Compile(t, source);
  }
  return OutcomeDict(o, DefaultHelpers());
}

py::dict RunCampaign(const std::filesystem::path& seeds, const std::filesystem::path& pack,
                     const std::string& command, uint64_t max_steps, uint64_t seed,
                     size_t workers) {
  CampaignConfig cfg;
  cfg.target.command = command;
  cfg.max_steps = max_steps;
  cfg.seed = seed;
  cfg.workers = workers;
  auto campaign = Campaign::Init(seeds, LoadMutatorPack(pack),
                                 std::make_unique<FixtureTokenCoverage>(), cfg);
  CampaignReport r;
  {
    py::gil_scoped_release release;
    r = campaign->Run();
  }
  py::dict d;
  d["steps"] = r.counters.steps;
  d["executions"] = r.counters.executions;
  d["crashes"] = r.counters.crashes_raw;
  d["unique"] = r.counters.crashes_unique;
  d["queue"] = r.queue_size;
  d["coverage"] = r.coverage_size;
  d["keys"] = r.unique_keys;
  d["run_log"] = campaign->run_log();
  return d;
}

}  // namespace
}  // namespace histmut

PYBIND11_MODULE(histmut_py, m) {
  using namespace histmut;
  m.doc() = "Bindings for the histmut mutator engine, runner and triage.";

  static py::exception<Error> error(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(ErrorCodeName(e.code())) + ": " + e.what()).c_str());
    }
  });

  m.def("apply_rewrite", &ApplyRule, "pattern"_a, "replacement"_a, "source"_a,
        "scope"_a = "all-matches", "seed"_a = 0,
        "Applies a rewrite rule; returns (output, changed, sites_matched).");
  m.def("sample_size", &SampleSize, "population"_a, "confidence"_a = 0.99, "margin"_a = 0.01);
  m.def("classify", &Classify, "exit_code"_a = 0, "signal"_a = 0, "stderr"_a = "",
        "timed_out"_a = false, "Returns (outcome kind, crash kind or None).");
  m.def("dedup_key", &KeyFromStderr, "stderr"_a, "helpers"_a = py::none());
  m.def("default_helpers", &DefaultHelpers);
  m.def("pack_ids", &PackIds, "path"_a);
  m.def("compile", &CompileSource, "command"_a, "source"_a, "timeout_ms"_a = 10000);
  m.def("run_campaign", &RunCampaign, "seeds"_a, "pack"_a, "command"_a, "max_steps"_a,
        "seed"_a = 0, "workers"_a = 1);
}
