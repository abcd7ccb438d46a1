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

#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "histmut/cli.h"
#include "histmut/error.h"
#include "histmut/util.h"

#ifndef HISTMUT_DATA_DIR
#define HISTMUT_DATA_DIR "data"
#endif
#ifndef HISTMUT_FIXTURES_DIR
#define HISTMUT_FIXTURES_DIR "fixtures"
#endif

namespace histmut {

namespace fs = std::filesystem;

fs::path BundledDataDir() { return HISTMUT_DATA_DIR; }
fs::path BundledFixturesDir() { return HISTMUT_FIXTURES_DIR; }

ToolConfig DefaultToolConfig() {
  ToolConfig c;
  c.data_dir = BundledDataDir();
  c.pack = c.data_dir / "starter_pack.txt";
  c.classifier = c.data_dir / "classifiers" / "fixture.txt";
  return c;
}

namespace {

std::vector<std::string> ListValue(const std::string& v) {
  std::vector<std::string> out;
  for (const auto& part : Split(v, ',')) {
    std::string t = Trim(part);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

uint64_t UintValue(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    unsigned long long n = std::stoull(v, &used);
    if (used != v.size() || (!v.empty() && v[0] == '-')) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, key + ": expected a non-negative integer, got '" + v + "'");
  }
}

double DoubleValue(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size() || d < 0) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, key + ": expected a non-negative number, got '" + v + "'");
  }
}

bool BoolValue(const std::string& key, const std::string& v) {
  std::string l = ToLower(v);
  if (l == "true" || l == "yes" || l == "1" || l == "on") return true;
  if (l == "false" || l == "no" || l == "0" || l == "off") return false;
  throw Error(ErrorCode::kInvalidArgument, key + ": expected a boolean, got '" + v + "'");
}

std::optional<uint64_t> OptUint(const std::string& key, const std::string& v) {
  if (v.empty() || ToLower(v) == "none") return std::nullopt;
  return UintValue(key, v);
}

void Apply(ToolConfig& c, const std::string& key, const std::string& v, const fs::path& base) {
  auto path = [&](const std::string& s) -> fs::path {
    if (s.empty()) return {};
    fs::path p(s);
    return p.is_absolute() || base.empty() ? p : base / p;
  };
  if (key == "paths.data_dir") c.data_dir = path(v);
  else if (key == "paths.seeds") c.seeds = path(v);
  else if (key == "paths.pack") c.pack = path(v);
  else if (key == "paths.classifier") c.classifier = path(v);
  else if (key == "target.command") c.target.command = v;
  else if (key == "target.timeout_ms") c.target.timeout = std::chrono::milliseconds(UintValue(key, v));
  else if (key == "target.env_allow") c.target.env_allow = ListValue(v);
  else if (key == "target.workdir") c.target.workdir = path(v);
  else if (key == "llm.transport") {
    if (v != "replay" && v != "http") {
      throw Error(ErrorCode::kInvalidArgument, key + ": expected replay or http");
    }
    c.llm_transport = v;
  } else if (key == "llm.transcripts") c.transcripts = path(v);
  else if (key == "llm.endpoint") c.llm_endpoint = v;
  else if (key == "llm.derive_models") c.derive_models = ListValue(v);
  else if (key == "llm.agent_model") c.agent_model = v;
  else if (key == "llm.api_key_env") c.api_key_env = v;
  else if (key == "tracker.kind") {
    if (v != "fixture" && v != "github" && v != "bugzilla") {
      throw Error(ErrorCode::kInvalidArgument, key + ": expected fixture, github or bugzilla");
    }
    c.tracker = v;
  } else if (key == "tracker.url") c.tracker_url = v;
  else if (key == "tracker.project") c.tracker_project = v;
  else if (key == "tracker.compiler") c.tracker_compiler = v;
  else if (key == "tracker.issues") c.issues = path(v);
  else if (key == "tracker.since") c.since = v;
  else if (key == "tracker.until") c.until = v;
  else if (key == "fuzz.jobs") {
    c.jobs = UintValue(key, v);
    if (c.jobs == 0) throw Error(ErrorCode::kInvalidArgument, key + " must be >= 1");
  } else if (key == "fuzz.budget_s") c.budget_s = DoubleValue(key, v);
  else if (key == "fuzz.max_files") c.max_files = OptUint(key, v);
  else if (key == "fuzz.max_steps") c.max_steps = OptUint(key, v);
  else if (key == "fuzz.stop_after_unique") {
    auto n = OptUint(key, v);
    c.stop_after_unique = n ? std::optional<size_t>(*n) : std::nullopt;
  } else if (key == "fuzz.seed") c.seed = UintValue(key, v);
  else if (key == "fuzz.coverage") c.coverage = v;
  else if (key == "fuzz.successful_only") c.successful_only = BoolValue(key, v);
  else if (key == "triage.helpers") c.helpers = ListValue(v);
  else if (key == "triage.minimize") c.minimize = BoolValue(key, v);
  else throw Error(ErrorCode::kInvalidArgument, "unknown configuration key '" + key + "'");
}

std::string OptStr(const std::optional<uint64_t>& v) { return v ? std::to_string(*v) : "none"; }

}  // namespace

void SetConfigValue(ToolConfig& config, const std::string& dotted_key, const std::string& value) {
  Apply(config, dotted_key, value, {});
}

ToolConfig ParseToolConfig(const std::string& text, const std::string& origin) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::kParseError, origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  ToolConfig c = DefaultToolConfig();
  fs::path base = origin.empty() || origin[0] == '<' ? fs::path() : fs::path(origin).parent_path();
  for (const auto& [section, children] : tree) {
    if (children.empty() && !children.data().empty()) {
      throw Error(ErrorCode::kParseError, origin + ": key '" + section + "' outside a section");
    }
    for (const auto& [key, node] : children) {
      Apply(c, section + "." + key, Trim(node.data()), base);
    }
  }
  return c;
}

ToolConfig LoadToolConfig(const fs::path& path) {
  return ParseToolConfig(ReadFile(path), path.string());
}

std::string FormatToolConfig(const ToolConfig& c) {
  std::ostringstream o;
  o << "[paths]\n"
    << "data_dir = " << c.data_dir.string() << "\n"
    << "seeds = " << c.seeds.string() << "\n"
    << "pack = " << c.pack.string() << "\n"
    << "classifier = " << c.classifier.string() << "\n\n"
    << "[target]\n"
    << "command = " << c.target.command << "\n"
    << "timeout_ms = " << c.target.timeout.count() << "\n"
    << "env_allow = " << Join(c.target.env_allow, ",") << "\n"
    << "workdir = " << c.target.workdir.string() << "\n\n"
    << "[llm]\n"
    << "transport = " << c.llm_transport << "\n"
    << "transcripts = " << c.transcripts.string() << "\n"
    << "endpoint = " << c.llm_endpoint << "\n"
    << "derive_models = " << Join(c.derive_models, ",") << "\n"
    << "agent_model = " << c.agent_model << "\n"
    << "api_key_env = " << c.api_key_env << "\n\n"
    << "[tracker]\n"
    << "kind = " << c.tracker << "\n"
    << "url = " << c.tracker_url << "\n"
    << "project = " << c.tracker_project << "\n"
    << "compiler = " << c.tracker_compiler << "\n"
    << "issues = " << c.issues.string() << "\n"
    << "since = " << c.since << "\n"
    << "until = " << c.until << "\n\n"
    << "[fuzz]\n"
    << "jobs = " << c.jobs << "\n"
    << "budget_s = " << c.budget_s << "\n"
    << "max_files = " << OptStr(c.max_files) << "\n"
    << "max_steps = " << OptStr(c.max_steps) << "\n"
    << "stop_after_unique = "
    << (c.stop_after_unique ? std::to_string(*c.stop_after_unique) : "none") << "\n"
    << "seed = " << c.seed << "\n"
    << "coverage = " << c.coverage << "\n"
    << "successful_only = " << (c.successful_only ? "true" : "false") << "\n\n"
    << "[triage]\n"
    << "helpers = " << Join(c.helpers, ",") << "\n"
    << "minimize = " << (c.minimize ? "true" : "false") << "\n";
  return o.str();
}

CampaignConfig ToCampaignConfig(const ToolConfig& c) {
  CampaignConfig cc;
  cc.target = c.target;
  cc.workers = c.jobs;
  cc.budget = std::chrono::milliseconds(static_cast<int64_t>(c.budget_s * 1000.0));
  cc.max_files = c.max_files;
  cc.max_steps = c.max_steps;
  cc.stop_after_unique = c.stop_after_unique;
  cc.seed = c.seed;
  cc.helpers = c.helpers;
  return cc;
}

}  // namespace histmut
