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

#include "histmut/mutator.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include <boost/math/distributions/normal.hpp>
#include <boost/regex.hpp>

#include "histmut/error.h"
#include "histmut/util.h"

namespace histmut {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::pair<Action, std::string_view>, 4> kActionNames = {{
    {Action::kAdd, "Add"},
    {Action::kModify, "Modify"},
    {Action::kRemove, "Remove"},
    {Action::kSwap, "Swap"},
}};

constexpr std::array<std::pair<Element, std::string_view>, 13> kElementNames = {{
    {Element::kAttribute, "Attribute"},
    {Element::kBuiltinFunction, "BuiltinFunction"},
    {Element::kUnaryOperator, "UnaryOperator"},
    {Element::kFunctionDeclaration, "FunctionDeclaration"},
    {Element::kLiteral, "Literal"},
    {Element::kInitialization, "Initialization"},
    {Element::kParameter, "Parameter"},
    {Element::kExpression, "Expression"},
    {Element::kStorageClassSpecifier, "StorageClassSpecifier"},
    {Element::kStatement, "Statement"},
    {Element::kType, "Type"},
    {Element::kVariableDeclaration, "VariableDeclaration"},
    {Element::kCharacter, "Character"},
}};

constexpr std::array<std::pair<Scope, std::string_view>, 3> kScopeNames = {{
    {Scope::kAllMatches, "all-matches"},
    {Scope::kFirstMatch, "first-match"},
    {Scope::kRandomMatchSite, "random-match-site"},
}};

template <typename T, size_t N>
std::string_view NameOf(const std::array<std::pair<T, std::string_view>, N>& t,
                        T v) {
  for (const auto& [k, name] : t) {
    if (k == v) return name;
  }
  return "?";
}

template <typename T, size_t N>
std::optional<T> ParseName(
    const std::array<std::pair<T, std::string_view>, N>& t, std::string_view s) {
  for (const auto& [k, name] : t) {
    if (name == s) return k;
  }
  return std::nullopt;
}

// One piece of a parsed sed-style replacement template.
struct ReplacementPart {
  std::string literal;
  int group = -1;  // >= 0 for a back-reference
};

std::vector<ReplacementPart> ParseReplacement(std::string_view tmpl,
                                              int& max_group) {
  std::vector<ReplacementPart> parts;
  std::string lit;
  max_group = -1;
  auto flush = [&] {
    if (!lit.empty()) parts.push_back({std::move(lit), -1});
    lit.clear();
  };
  for (size_t i = 0; i < tmpl.size(); ++i) {
    char c = tmpl[i];
    if (c == '&') {
      flush();
      parts.push_back({"", 0});
      max_group = std::max(max_group, 0);
    } else if (c == '\\' && i + 1 < tmpl.size()) {
      char n = tmpl[++i];
      if (n >= '0' && n <= '9') {
        flush();
        parts.push_back({"", n - '0'});
        max_group = std::max(max_group, n - '0');
      } else if (n == 'n') {
        lit.push_back('\n');
      } else if (n == 't') {
        lit.push_back('\t');
      } else {
        lit.push_back(n);
      }
    } else {
      lit.push_back(c);
    }
  }
  flush();
  return parts;
}

const auto kMatchFlags = boost::match_default | boost::match_not_dot_newline;

boost::regex CompileRegex(const std::string& pattern, const std::string& id) {
  try {
    return boost::regex(pattern, boost::regex::perl);
  } catch (const boost::regex_error& e) {
    throw Error(ErrorCode::kInvalidPattern,
                "mutator " + id + ": pattern /" + pattern + "/ does not compile: " +
                    e.what());
  }
}

}  // namespace

std::string_view ActionName(Action a) { return NameOf(kActionNames, a); }
std::string_view ElementName(Element e) { return NameOf(kElementNames, e); }
std::string_view ScopeName(Scope s) { return NameOf(kScopeNames, s); }
std::optional<Action> ParseAction(std::string_view s) {
  return ParseName(kActionNames, s);
}
std::optional<Element> ParseElement(std::string_view s) {
  return ParseName(kElementNames, s);
}
std::optional<Scope> ParseScope(std::string_view s) {
  return ParseName(kScopeNames, s);
}

const std::vector<Element>& AllElements() {
  static const std::vector<Element> all = [] {
    std::vector<Element> v;
    for (const auto& [e, name] : kElementNames) v.push_back(e);
    return v;
  }();
  return all;
}

const std::string& MutatorId(const Mutator& m) {
  return std::visit([](const auto& x) -> const std::string& { return x.id; }, m);
}

Action MutatorAction(const Mutator& m) {
  return std::visit([](const auto& x) { return x.action; }, m);
}

const std::set<Element>& MutatorElements(const Mutator& m) {
  return std::visit(
      [](const auto& x) -> const std::set<Element>& { return x.elements; }, m);
}

struct CompiledRewrite::Impl {
  boost::regex pattern;
  std::optional<boost::regex> guard;
  std::vector<ReplacementPart> replacement;

  void Expand(const boost::smatch& m, std::string& out) const {
    for (const auto& part : replacement) {
      if (part.group < 0) {
        out += part.literal;
      } else if (m[part.group].matched) {
        out += m[part.group].str();
      }
    }
  }
};

CompiledRewrite::CompiledRewrite(RewriteRule rule, std::unique_ptr<Impl> impl)
    : rule_(std::move(rule)), impl_(std::move(impl)) {}

CompiledRewrite::~CompiledRewrite() = default;

std::shared_ptr<const CompiledRewrite> CompiledRewrite::Compile(
    const RewriteRule& rule) {
  auto impl = std::make_unique<Impl>();
  impl->pattern = CompileRegex(rule.pattern, rule.id);
  if (rule.guard) impl->guard = CompileRegex(*rule.guard, rule.id);
  int max_group = -1;
  impl->replacement = ParseReplacement(rule.replacement, max_group);
  if (max_group > static_cast<int>(impl->pattern.mark_count())) {
    throw Error(ErrorCode::kReplacementGroupOutOfRange,
                "mutator " + rule.id + ": replacement references group \\" +
                    std::to_string(max_group) + " but pattern has " +
                    std::to_string(impl->pattern.mark_count()));
  }
  return std::shared_ptr<const CompiledRewrite>(
      new CompiledRewrite(rule, std::move(impl)));
}

size_t CompiledRewrite::CountSites(std::string_view source) const {
  std::string text(source);
  try {
    boost::sregex_iterator it(text.begin(), text.end(), impl_->pattern,
                              kMatchFlags);
    return static_cast<size_t>(std::distance(it, boost::sregex_iterator()));
  } catch (const std::runtime_error&) {
    return 0;  // regex engine gave up (complexity limit)
  }
}

namespace {

MutationResult Unchanged(std::string_view source, size_t sites) {
  MutationResult r;
  r.output = std::string(source);
  r.sites_matched = sites;
  return r;
}

}  // namespace

MutationResult CompiledRewrite::ApplyAtSite(std::string_view source,
                                            size_t site) const {
  std::string text(source);
  std::vector<boost::smatch> matches;
  try {
    if (impl_->guard && !boost::regex_search(text, *impl_->guard, kMatchFlags)) {
      return Unchanged(source, 0);
    }
    for (boost::sregex_iterator it(text.begin(), text.end(), impl_->pattern,
                                   kMatchFlags), end;
         it != end; ++it) {
      matches.push_back(*it);
    }
  } catch (const std::runtime_error&) {
    return Unchanged(source, 0);
  }
  if (site >= matches.size()) return Unchanged(source, matches.size());
  const auto& m = matches[site];
  MutationResult r;
  r.sites_matched = matches.size();
  r.site_chosen = site;
  auto begin = static_cast<size_t>(m.position(size_t{0}));
  r.output = text.substr(0, begin);
  impl_->Expand(m, r.output);
  r.output += text.substr(begin + static_cast<size_t>(m.length(0)));
  r.changed = r.output != text;
  return r;
}

MutationResult CompiledRewrite::Apply(std::string_view source, Rng& rng) const {
  if (rule_.scope != Scope::kAllMatches) {
    size_t sites;
    std::string text(source);
    try {
      if (impl_->guard &&
          !boost::regex_search(text, *impl_->guard, kMatchFlags)) {
        return Unchanged(source, 0);
      }
    } catch (const std::runtime_error&) {
      return Unchanged(source, 0);
    }
    sites = CountSites(source);
    if (sites == 0) return Unchanged(source, 0);
    size_t site = rule_.scope == Scope::kFirstMatch ? 0 : rng.Below(sites);
    MutationResult r = ApplyAtSite(source, site);
    if (rule_.scope == Scope::kFirstMatch) r.site_chosen.reset();
    return r;
  }

  std::string text(source);
  MutationResult r;
  try {
    if (impl_->guard && !boost::regex_search(text, *impl_->guard, kMatchFlags)) {
      return Unchanged(source, 0);
    }
    auto last = text.cbegin();
    for (boost::sregex_iterator it(text.begin(), text.end(), impl_->pattern,
                                   kMatchFlags), end;
         it != end; ++it) {
      const auto& m = *it;
      r.output.append(last, m[0].first);
      impl_->Expand(m, r.output);
      last = m[0].second;
      ++r.sites_matched;
    }
    r.output.append(last, text.cend());
  } catch (const std::runtime_error&) {
    return Unchanged(source, 0);
  }
  r.changed = r.output != text;
  return r;
}

void ValidateMutator(const Mutator& m) {
  const std::string& id = MutatorId(m);
  if (id.empty()) throw Error(ErrorCode::kParseError, "mutator without id");
  if (MutatorElements(m).empty()) {
    throw Error(ErrorCode::kParseError,
                "mutator " + id + ": elements must be non-empty");
  }
  if (const auto* rule = std::get_if<RewriteRule>(&m)) {
    CompiledRewrite::Compile(*rule);
  } else {
    const auto& ext = std::get<ExternalMutator>(m);
    if (CountOccurrences(ext.command, "{file}") != 1) {
      throw Error(ErrorCode::kParseError,
                  "mutator " + id + ": command needs exactly one {file}");
    }
    if (ext.script.has_value() !=
        (CountOccurrences(ext.command, "{script}") == 1)) {
      throw Error(ErrorCode::kParseError,
                  "mutator " + id + ": {script} placeholder and script body "
                                    "must appear together");
    }
    if (ext.timeout.count() <= 0) {
      throw Error(ErrorCode::kParseError,
                  "mutator " + id + ": timeout must be positive");
    }
  }
}

MutationResult ApplyRewrite(const RewriteRule& rule, std::string_view source,
                            Rng& rng) {
  return CompiledRewrite::Compile(rule)->Apply(source, rng);
}

MutationResult ApplyExternal(const ExternalMutator& m, std::string_view source,
                             const fs::path& scratch_dir) {
  ScratchDir dir(scratch_dir, "ext");
  fs::path file = dir.path() / "input.c";
  fs::path script = dir.path() / "mutator.sh";
  WriteFile(file, source);
  if (m.script) WriteFile(script, *m.script);

  ProcessSpec spec;
  for (std::string arg : SplitCommandLine(m.command)) {
    arg = ReplaceAll(std::move(arg), "{file}", file.string());
    spec.argv.push_back(ReplaceAll(std::move(arg), "{script}", script.string()));
  }
  spec.cwd = dir.path();
  spec.env = EnvFromAllowList({"PATH", "HOME", "LANG", "LC_ALL"});
  spec.timeout = m.timeout;
  ProcessResult pr = RunProcess(spec);
  if (pr.timed_out) {
    throw Error(ErrorCode::kPluginTimeout, "mutator " + m.id + " timed out");
  }
  if (pr.signaled || pr.exit_code != 0) {
    throw Error(ErrorCode::kPluginNonZeroExit,
                "mutator " + m.id + " failed: " + TrimRight(pr.stderr_text));
  }
  MutationResult r;
  r.output = ReadFile(file);
  r.changed = r.output != source;
  r.sites_matched = r.changed ? 1 : 0;
  return r;
}

uint64_t SampleSize(uint64_t population, double confidence, double margin) {
  if (population < 1 || !(confidence > 0 && confidence < 1) ||
      !(margin > 0 && margin < 1)) {
    throw Error(ErrorCode::kInvalidArgument,
                "sample size needs population >= 1 and fractions in (0, 1)");
  }
  boost::math::normal_distribution<double> normal;
  double z = boost::math::quantile(normal, 1.0 - (1.0 - confidence) / 2.0);
  double n0 = z * z * 0.25 / (margin * margin);
  double n = n0 / (1.0 + (n0 - 1.0) / static_cast<double>(population));
  auto rounded = static_cast<uint64_t>(std::ceil(n));
  return std::min(rounded, population);
}

void MutatorRegistry::Add(Mutator m) {
  ValidateMutator(m);
  if (Find(MutatorId(m))) {
    throw Error(ErrorCode::kDuplicateId, "duplicate mutator id " + MutatorId(m));
  }
  Entry e{std::move(m), nullptr};
  if (const auto* rule = std::get_if<RewriteRule>(&e.mutator)) {
    e.compiled = CompiledRewrite::Compile(*rule);
  }
  entries_.push_back(std::move(e));
}

std::optional<size_t> MutatorRegistry::Find(std::string_view id) const {
  for (size_t i = 0; i < entries_.size(); ++i) {
    if (MutatorId(entries_[i].mutator) == id) return i;
  }
  return std::nullopt;
}

std::vector<std::string> MutatorRegistry::Ids() const {
  std::vector<std::string> ids;
  for (const auto& e : entries_) ids.push_back(MutatorId(e.mutator));
  return ids;
}

void MutatorRegistry::RestrictTo(const std::set<std::string>& ids) {
  if (ids.empty()) {
    throw Error(ErrorCode::kEmptySelection, "successful-only set is empty");
  }
  for (const auto& id : ids) {
    if (!Find(id)) {
      throw Error(ErrorCode::kInvalidArgument, "unknown mutator id " + id);
    }
  }
  restricted_ = true;
  successful_ = ids;
}

void MutatorRegistry::ClearRestriction() {
  restricted_ = false;
  successful_.clear();
}

std::vector<size_t> MutatorRegistry::ActiveIndices() const {
  std::vector<size_t> out;
  for (size_t i = 0; i < entries_.size(); ++i) {
    if (!restricted_ || successful_.count(MutatorId(entries_[i].mutator))) {
      out.push_back(i);
    }
  }
  return out;
}

MutationResult MutatorRegistry::Apply(size_t index, std::string_view source,
                                      Rng& rng,
                                      const fs::path& scratch_dir) const {
  const Entry& e = entries_.at(index);
  if (e.compiled) return e.compiled->Apply(source, rng);
  return ApplyExternal(std::get<ExternalMutator>(e.mutator), source,
                       scratch_dir);
}

bool MutatorRegistry::operator==(const MutatorRegistry& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (size_t i = 0; i < entries_.size(); ++i) {
    if (!(entries_[i].mutator == other.entries_[i].mutator)) return false;
  }
  return restricted_ == other.restricted_ && successful_ == other.successful_;
}

namespace {

std::string ManifestDigest(const std::vector<SampleInput>& sample) {
  Sha256 h;
  for (const auto& s : sample) {
    h.Update(std::to_string(s.name.size()) + ":");
    h.Update(s.name);
  }
  return h.FinishHex();
}

}  // namespace

MutatorFingerprint FingerprintMutator(const MutatorRegistry& registry,
                                      size_t index,
                                      const std::vector<SampleInput>& sample,
                                      uint64_t rng_seed) {
  ScratchDir scratch({}, "fingerprint");
  Sha256 h;
  for (size_t i = 0; i < sample.size(); ++i) {
    Rng rng(SplitSeed(rng_seed, i));
    std::string frame = "#" + std::to_string(i) + ":";
    try {
      MutationResult r = registry.Apply(index, sample[i].text, rng, scratch.path());
      h.Update(frame + std::to_string(r.output.size()) + ":");
      h.Update(r.output);
    } catch (const Error&) {
      h.Update(frame + "plugin-failure:");
    }
  }
  MutatorFingerprint fp;
  fp.digest = h.FinishHex();
  fp.sample_size = sample.size();
  fp.sample_manifest_digest = ManifestDigest(sample);
  return fp;
}

MutatorFingerprint FingerprintMutator(const Mutator& m,
                                      const std::vector<SampleInput>& sample,
                                      uint64_t rng_seed) {
  MutatorRegistry single;
  single.Add(m);
  return FingerprintMutator(single, 0, sample, rng_seed);
}

DedupResult DedupMutators(const MutatorRegistry& registry,
                          const std::vector<SampleInput>& sample,
                          uint64_t rng_seed) {
  DedupResult result;
  std::map<std::string, std::string> seen;  // digest -> kept id
  for (size_t i = 0; i < registry.size(); ++i) {
    const std::string& id = MutatorId(registry.at(i));
    std::string digest = FingerprintMutator(registry, i, sample, rng_seed).digest;
    auto [it, inserted] = seen.emplace(digest, id);
    if (inserted) {
      result.registry.Add(registry.at(i));
    } else {
      result.dropped.emplace_back(it->second, id);
    }
  }
  if (registry.restricted()) {
    std::set<std::string> keep;
    for (const auto& id : registry.successful_ids()) {
      if (result.registry.Find(id)) keep.insert(id);
    }
    if (!keep.empty()) result.registry.RestrictTo(keep);
  }
  return result;
}

std::vector<SampleInput> LoadSample(const fs::path& dir) {
  std::vector<SampleInput> out;
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "not a directory: " + dir.string());
  }
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    out.push_back({fs::relative(entry.path(), dir).generic_string(),
                   ReadFile(entry.path())});
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.name < b.name; });
  return out;
}

std::vector<SampleInput> DrawSample(const std::vector<SampleInput>& corpus,
                                    size_t n, uint64_t rng_seed) {
  std::vector<size_t> idx(corpus.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(rng_seed);
  n = std::min(n, idx.size());
  for (size_t i = 0; i < n; ++i) {
    size_t j = i + rng.Below(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  std::vector<SampleInput> out;
  for (size_t i = 0; i < n; ++i) out.push_back(corpus[idx[i]]);
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.name < b.name; });
  return out;
}

}  // namespace histmut
