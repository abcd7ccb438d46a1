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

#include "histmut/pack.h"

#include <map>

#include <nlohmann/json.hpp>

#include "histmut/error.h"
#include "histmut/util.h"

namespace histmut {

namespace {

bool NeedsQuoting(std::string_view v) {
  if (v.empty()) return true;
  if (v.front() == '"' || std::isspace(static_cast<unsigned char>(v.front())) ||
      std::isspace(static_cast<unsigned char>(v.back()))) {
    return true;
  }
  for (char c : v) {
    if (static_cast<unsigned char>(c) < 0x20) return true;
  }
  return false;
}

std::string FormatValue(std::string_view v) {
  if (!NeedsQuoting(v)) return std::string(v);
  return nlohmann::json(std::string(v)).dump();
}

[[noreturn]] void Fail(std::string_view origin, size_t line,
                       const std::string& what) {
  throw Error(ErrorCode::kParseError, std::string(origin) + ":" +
                                          std::to_string(line) + ": " + what);
}

struct Stanza {
  size_t line = 0;
  std::string kind;  // "mutator" or "filter"
  std::map<std::string, std::pair<std::string, size_t>> fields;
};

std::set<Element> ParseElements(const std::string& list, std::string_view origin,
                                size_t line) {
  std::set<Element> out;
  for (const auto& part : Split(list, ',')) {
    std::string name = Trim(part);
    if (name.empty()) continue;
    auto e = ParseElement(name);
    if (!e) Fail(origin, line, "unknown program element '" + name + "'");
    out.insert(*e);
  }
  return out;
}

std::string FormatElements(const std::set<Element>& elements) {
  std::vector<std::string> names;
  for (Element e : elements) names.emplace_back(ElementName(e));
  return Join(names, ",");
}

Mutator BuildMutator(const Stanza& s, std::string_view origin) {
  auto get = [&](const std::string& key, bool required) -> std::optional<std::string> {
    auto it = s.fields.find(key);
    if (it == s.fields.end()) {
      if (required) Fail(origin, s.line, "missing field '" + key + "'");
      return std::nullopt;
    }
    return it->second.first;
  };
  auto line_of = [&](const std::string& key) {
    auto it = s.fields.find(key);
    return it == s.fields.end() ? s.line : it->second.second;
  };

  std::string id = *get("id", true);
  std::string kind = get("kind", false).value_or("rewrite");
  auto action = ParseAction(*get("action", true));
  if (!action) Fail(origin, line_of("action"), "unknown action");
  std::set<Element> elements =
      ParseElements(*get("elements", true), origin, line_of("elements"));
  std::string provenance = get("provenance", false).value_or("");

  static const std::set<std::string> kRewriteKeys = {
      "id", "kind", "pattern", "replacement", "scope", "guard",
      "action", "elements", "provenance"};
  static const std::set<std::string> kExternalKeys = {
      "id", "kind", "command", "script", "timeout_ms",
      "action", "elements", "provenance"};

  Mutator m;
  if (kind == "rewrite") {
    RewriteRule r;
    r.id = id;
    r.pattern = *get("pattern", true);
    r.replacement = *get("replacement", true);
    if (auto scope = get("scope", false)) {
      auto parsed = ParseScope(*scope);
      if (!parsed) Fail(origin, line_of("scope"), "unknown scope '" + *scope + "'");
      r.scope = *parsed;
    }
    r.guard = get("guard", false);
    r.action = *action;
    r.elements = std::move(elements);
    r.provenance = provenance;
    for (const auto& [k, v] : s.fields) {
      if (!kRewriteKeys.count(k)) Fail(origin, v.second, "unexpected field '" + k + "'");
    }
    m = std::move(r);
  } else if (kind == "external") {
    ExternalMutator e;
    e.id = id;
    e.command = *get("command", true);
    e.script = get("script", false);
    std::string timeout = get("timeout_ms", false).value_or("5000");
    try {
      size_t used = 0;
      long long ms = std::stoll(timeout, &used);
      if (used != timeout.size()) throw std::invalid_argument("trailing");
      e.timeout = std::chrono::milliseconds(ms);
    } catch (const std::exception&) {
      Fail(origin, line_of("timeout_ms"), "timeout_ms is not an integer");
    }
    e.action = *action;
    e.elements = std::move(elements);
    e.provenance = provenance;
    for (const auto& [k, v] : s.fields) {
      if (!kExternalKeys.count(k)) Fail(origin, v.second, "unexpected field '" + k + "'");
    }
    m = std::move(e);
  } else {
    Fail(origin, line_of("kind"), "unknown kind '" + kind + "'");
  }
  try {
    ValidateMutator(m);
  } catch (const Error& e) {
    throw Error(e.code(), std::string(origin) + ":" + std::to_string(s.line) + ": " + e.what());
  }
  return m;
}

}  // namespace

MutatorRegistry ParsePack(std::string_view text, std::string_view origin) {
  if (origin.empty()) origin = "<pack>";
  std::vector<Stanza> stanzas;
  auto lines = SplitLines(text);
  for (size_t i = 0; i < lines.size(); ++i) {
    size_t lineno = i + 1;
    std::string line = Trim(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    if (line == "[mutator]" || line == "[filter]") {
      stanzas.push_back({lineno, line.substr(1, line.size() - 2), {}});
      continue;
    }
    if (line.front() == '[') Fail(origin, lineno, "unknown section " + line);
    if (stanzas.empty()) Fail(origin, lineno, "field outside of a stanza");
    size_t eq = line.find('=');
    if (eq == std::string::npos) Fail(origin, lineno, "expected 'key = value'");
    std::string key = Trim(line.substr(0, eq));
    std::string value = Trim(line.substr(eq + 1));
    if (!value.empty() && value.front() == '"') {
      try {
        value = nlohmann::json::parse(value).get<std::string>();
      } catch (const std::exception&) {
        Fail(origin, lineno, "bad quoted value for '" + key + "'");
      }
    }
    auto [it, inserted] = stanzas.back().fields.emplace(key, std::make_pair(value, lineno));
    if (!inserted) Fail(origin, lineno, "repeated field '" + key + "'");
  }

  MutatorRegistry registry;
  std::optional<std::set<std::string>> filter;
  for (const auto& s : stanzas) {
    if (s.kind == "filter") {
      auto it = s.fields.find("successful");
      if (it == s.fields.end()) Fail(origin, s.line, "filter without 'successful'");
      std::set<std::string> ids;
      for (const auto& id : Split(it->second.first, ',')) {
        if (!Trim(id).empty()) ids.insert(Trim(id));
      }
      filter = std::move(ids);
      continue;
    }
    Mutator m = BuildMutator(s, origin);
    if (registry.Find(MutatorId(m))) {
      throw Error(ErrorCode::kDuplicateId, std::string(origin) + ":" +
                                               std::to_string(s.line) +
                                               ": duplicate mutator id " +
                                               MutatorId(m));
    }
    registry.Add(std::move(m));
  }
  if (filter) registry.RestrictTo(*filter);
  return registry;
}

std::string FormatPack(const MutatorRegistry& registry) {
  std::string out = "# histmut mutator pack\n";
  auto field = [&out](std::string_view key, std::string_view value) {
    out += key;
    out += " = ";
    out += FormatValue(value);
    out += '\n';
  };
  for (size_t i = 0; i < registry.size(); ++i) {
    out += "\n[mutator]\n";
    const Mutator& m = registry.at(i);
    if (const auto* r = std::get_if<RewriteRule>(&m)) {
      field("id", r->id);
      field("kind", "rewrite");
      field("pattern", r->pattern);
      field("replacement", r->replacement);
      field("scope", ScopeName(r->scope));
      if (r->guard) field("guard", *r->guard);
    } else {
      const auto& e = std::get<ExternalMutator>(m);
      field("id", e.id);
      field("kind", "external");
      field("command", e.command);
      if (e.script) field("script", *e.script);
      field("timeout_ms", std::to_string(e.timeout.count()));
    }
    field("action", ActionName(MutatorAction(m)));
    field("elements", FormatElements(MutatorElements(m)));
    std::visit([&](const auto& x) { field("provenance", x.provenance); }, m);
  }
  if (registry.restricted()) {
    out += "\n[filter]\n";
    std::vector<std::string> ids(registry.successful_ids().begin(),
                                 registry.successful_ids().end());
    field("successful", Join(ids, ","));
  }
  return out;
}

MutatorRegistry LoadMutatorPack(const std::filesystem::path& path) {
  return ParsePack(ReadFile(path), path.string());
}

void SaveMutatorPack(const MutatorRegistry& registry,
                     const std::filesystem::path& path) {
  WriteFile(path, FormatPack(registry));
}

MutatorRegistry MergePacks(const MutatorRegistry& base,
                           const MutatorRegistry& extra) {
  MutatorRegistry out = base;
  for (size_t i = 0; i < extra.size(); ++i) out.Add(extra.at(i));
  return out;
}

}  // namespace histmut
