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

#include "histmut/miner.h"

#include <algorithm>
#include <map>

#include <boost/regex.hpp>
#include <nlohmann/json.hpp>

#include "histmut/error.h"
#include "histmut/util.h"

#ifndef HISTMUT_DATA_DIR
#define HISTMUT_DATA_DIR "data"
#endif

namespace histmut {

std::string_view ValidationTagName(ValidationTag t) {
  switch (t) {
    case ValidationTag::kCorrect: return "Correct";
    case ValidationTag::kPartiallyCorrect: return "PartiallyCorrect";
    case ValidationTag::kError: return "Error";
    case ValidationTag::kWrong: return "Wrong";
  }
  return "?";
}

std::string_view MineStageName(MineStage s) {
  switch (s) {
    case MineStage::kExtract: return "extract";
    case MineStage::kDerive: return "derive";
    case MineStage::kReview: return "review";
    case MineStage::kGenerate: return "generate";
  }
  return "?";
}

ValidationTag TagFor(int passed, bool harness_ok) {
  if (!harness_ok) return ValidationTag::kError;
  if (passed >= 4) return ValidationTag::kCorrect;
  if (passed == 3) return ValidationTag::kPartiallyCorrect;
  return ValidationTag::kWrong;
}

namespace {

// Same mapping for suites that are not exactly four tests long: all pass,
// all but one pass (and still a majority), otherwise wrong.
ValidationTag TagForTotal(int passed, int total, bool harness_ok) {
  if (total == 4) return TagFor(passed, harness_ok);
  if (!harness_ok) return ValidationTag::kError;
  if (passed == total) return ValidationTag::kCorrect;
  if (passed == total - 1 && 2 * passed > total) return ValidationTag::kPartiallyCorrect;
  return ValidationTag::kWrong;
}

}  // namespace

PromptTemplates PromptTemplates::Load(const std::filesystem::path& dir) {
  PromptTemplates t;
  t.derive_negative = ReadFile(dir / "derive_negative.txt");
  t.creator = ReadFile(dir / "creator.txt");
  t.refiner = ReadFile(dir / "refiner.txt");
  t.example_script = TrimRight(ReadFile(dir / "example_script.sh"));
  return t;
}

const PromptTemplates& PromptTemplates::Default() {
  static const PromptTemplates kDefault =
      Load(std::filesystem::path(HISTMUT_DATA_DIR) / "prompts");
  return kDefault;
}

std::string FillTemplate(std::string text,
                         const std::vector<std::pair<std::string, std::string>>& values) {
  std::string out;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t open = text.find('{', pos);
    if (open == std::string::npos) break;
    size_t close = text.find('}', open);
    if (close == std::string::npos) break;
    std::string name = text.substr(open + 1, close - open - 1);
    auto it = std::find_if(values.begin(), values.end(),
                           [&](const auto& kv) { return kv.first == name; });
    out.append(text, pos, open - pos);
    if (it != values.end()) {
      out += it->second;
      pos = close + 1;
    } else {
      out += '{';
      pos = open + 1;
    }
  }
  out.append(text, pos, std::string::npos);
  return out;
}

std::optional<std::string> ExtractPositive(const IssueRecord& issue) {
  for (const std::string& block : issue.code_blocks) {
    if (!Trim(block).empty()) return block;
  }
  return std::nullopt;
}

ScreenResult ScreenFixed(const IssueRecord&, const std::string& positive,
                         const TargetConfig& target) {
  try {
    RunOutcome outcome = Compile(target, positive);
    if (outcome.kind == OutcomeKind::kCrash) {
      return {false, "positive still crashes (" +
                         std::string(CrashKindName(*outcome.crash)) + ")"};
    }
    return {true, std::string(OutcomeKindName(outcome.kind))};
  } catch (const Error& e) {
    return {false, "infrastructure: " + std::string(e.what())};
  }
}

namespace {

std::string StripBlankEdges(const std::string& s) {
  std::vector<std::string> lines = SplitLines(s);
  size_t b = 0, e = lines.size();
  while (b < e && Trim(lines[b]).empty()) ++b;
  while (e > b && Trim(lines[e - 1]).empty()) --e;
  std::vector<std::string> kept(lines.begin() + b, lines.begin() + e);
  for (auto& l : kept) l = TrimRight(l);
  return Join(kept, "\n");
}

// First fenced block: (content, offset of opening fence, offset past closing).
struct Fence {
  std::string content;
  size_t begin = 0;
  size_t end = 0;
};

std::optional<Fence> FirstFence(const std::string& text) {
  size_t open = text.find("```");
  if (open == std::string::npos) return std::nullopt;
  size_t body = text.find('\n', open);
  if (body == std::string::npos) return std::nullopt;
  size_t close = text.find("```", body);
  if (close == std::string::npos) return std::nullopt;
  return Fence{text.substr(body + 1, close - body - 1), open, close + 3};
}

std::optional<std::string> TagContent(const std::string& text, const std::string& tag) {
  std::string open = "<" + tag + ">", close = "</" + tag + ">";
  size_t b = text.find(open);
  if (b == std::string::npos) return std::nullopt;
  b += open.size();
  size_t e = text.find(close, b);
  if (e == std::string::npos) return std::nullopt;
  return text.substr(b, e - b);
}

// Code from a `<code>` block (optionally wrapping a fence) or a bare fence.
std::optional<std::string> ExtractCode(const std::string& reply) {
  std::optional<std::string> code = TagContent(reply, "code");
  if (code) {
    if (auto fence = FirstFence(*code)) return StripBlankEdges(fence->content);
    return StripBlankEdges(*code);
  }
  if (auto fence = FirstFence(reply)) return StripBlankEdges(fence->content);
  return std::nullopt;
}

std::string BugReportText(const IssueRecord& issue) {
  std::string out = "Title: " + issue.title + "\n";
  for (const auto& [k, v] : issue.metadata) out += k + ": " + v + "\n";
  out += "\n" + issue.discussion;
  return out;
}

std::string NormalizeForCompare(const std::string& s) {
  std::vector<std::string> lines = SplitLines(s);
  for (auto& l : lines) l = TrimRight(l);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return Join(lines, "\n");
}

std::string CreatorPrompt(const PromptTemplates& prompts, const std::string& description,
                          const TestCasePair& pair) {
  return FillTemplate(prompts.creator, {{"description_to_reverse", description},
                                        {"negative input", pair.negative},
                                        {"positive input", pair.positive},
                                        {"example bash code", prompts.example_script}});
}

std::string FormatTests(const std::vector<GeneratedTest>& tests) {
  std::string out;
  for (size_t i = 0; i < tests.size(); ++i) {
    std::string n = std::to_string(i + 1);
    out += "<input" + n + ">" + tests[i].input + "</input" + n + "><output" + n + ">" +
           tests[i].expected_output + "</output" + n + ">\n";
  }
  return out;
}

}  // namespace

TestCasePair DeriveNegative(const IssueRecord& issue, const std::string& positive,
                            LlmClient& llm, const PromptTemplates& prompts) {
  std::string prompt = FillTemplate(
      prompts.derive_negative,
      {{"bug_report", BugReportText(issue)}, {"positive_input", positive}});
  std::string reply = llm.Send(prompt, "You are an experienced C developer.");
  std::optional<Fence> fence = FirstFence(reply);
  if (!fence) {
    throw Error(ErrorCode::kMalformedResponse,
                "issue " + issue.id + ": negative-input reply has no code block");
  }
  TestCasePair pair;
  pair.positive = positive;
  pair.negative = StripBlankEdges(fence->content);
  std::string before = Trim(reply.substr(0, fence->begin));
  std::string after = Trim(reply.substr(fence->end));
  std::string desc = before.empty() || after.empty() ? before + after : before + "\n\n" + after;
  static const boost::regex kLabel(R"(^\s*(\*\*)?(mutation\s+)?description(\*\*)?\s*:\s*(\*\*)?\s*)",
                                   boost::regex::perl | boost::regex::icase);
  pair.mutation_description = Trim(boost::regex_replace(desc, kLabel, ""));
  if (pair.negative.empty()) {
    throw Error(ErrorCode::kMalformedResponse, "issue " + issue.id + ": empty negative input");
  }
  if (NormalizeForCompare(pair.negative) == NormalizeForCompare(pair.positive)) {
    throw Error(ErrorCode::kMalformedResponse,
                "issue " + issue.id + ": negative input equals the positive input");
  }
  return pair;
}

ReviewResult ReviewNegative(const IssueRecord& issue, const TestCasePair& pair,
                            const TargetConfig& target, const Reviewer& reviewer) {
  try {
    RunOutcome outcome = Compile(target, pair.negative);
    if (outcome.kind == OutcomeKind::kCrash) {
      return {false, false,
              "negative crashes (" + std::string(CrashKindName(*outcome.crash)) + ")"};
    }
    if (outcome.kind == OutcomeKind::kCompileError) {
      return {false, false, "negative does not compile"};
    }
  } catch (const Error& e) {
    return {false, false, "infrastructure: " + std::string(e.what())};
  }
  if (reviewer && !reviewer(issue, pair)) {
    return {false, true, "reviewer rejected the negative input"};
  }
  return {true, false, "accepted"};
}

std::string GeneralizeDescription(const std::string& description, LlmClient& llm,
                                  const TestCasePair& pair, const PromptTemplates& prompts) {
  std::string prompt = CreatorPrompt(prompts, description, pair) +
                       "\n**CURRENT TASK**: TASK 1 only.\n";
  std::string reply = llm.Send(prompt, "Mutator Creator");
  std::optional<std::string> desc = TagContent(reply, "description");
  if (!desc || Trim(*desc).empty()) {
    throw Error(ErrorCode::kMalformedResponse, "generalization reply has no <description>");
  }
  return Trim(*desc);
}

namespace {

std::vector<GeneratedTest> ParseTests(const std::string& reply, size_t n) {
  std::vector<GeneratedTest> tests;
  for (size_t i = 1; i <= n; ++i) {
    std::string k = std::to_string(i);
    auto in = TagContent(reply, "input" + k);
    auto out = TagContent(reply, "output" + k);
    if (!in || !out) {
      throw Error(ErrorCode::kMalformedResponse,
                  "test reply lacks <input" + k + "> or <output" + k + ">");
    }
    tests.push_back({StripBlankEdges(*in), StripBlankEdges(*out)});
  }
  return tests;
}

bool HasDegenerate(const std::vector<GeneratedTest>& tests) {
  return std::any_of(tests.begin(), tests.end(), [](const GeneratedTest& t) {
    return NormalizeForCompare(t.input) == NormalizeForCompare(t.expected_output);
  });
}

}  // namespace

std::vector<GeneratedTest> GenerateTests(const std::string& generalized, LlmClient& llm,
                                         const TestCasePair& pair, size_t n,
                                         const PromptTemplates& prompts) {
  if (n == 0) return {};
  std::string prompt = CreatorPrompt(prompts, pair.mutation_description, pair) +
                       "\nGeneral rule: <description>" + generalized + "</description>\n";
  if (n != 3) prompt += "Provide exactly " + std::to_string(n) + " pairs.\n";
  prompt += "**CURRENT TASK**: TASK 2 only.\n";
  std::vector<GeneratedTest> tests = ParseTests(llm.Send(prompt, "Mutator Creator"), n);
  if (!HasDegenerate(tests)) return tests;
  prompt += "Every input must differ from its output.\n";
  tests = ParseTests(llm.Send(prompt, "Mutator Creator"), n);
  if (HasDegenerate(tests)) {
    throw Error(ErrorCode::kDegeneratePair, "generated test input equals its output twice");
  }
  return tests;
}

namespace {

// Expands $NAME and ${NAME} for names in `vars`; other text is kept.
std::string ExpandVars(const std::string& s, const std::map<std::string, std::string>& vars) {
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '$' || i + 1 >= s.size()) {
      out += s[i];
      continue;
    }
    size_t b = i + 1, e;
    bool braced = s[b] == '{';
    if (braced) ++b;
    e = b;
    if (e < s.size() && std::isdigit(static_cast<unsigned char>(s[e]))) {
      ++e;
    } else {
      while (e < s.size() && (std::isalnum(static_cast<unsigned char>(s[e])) || s[e] == '_')) ++e;
    }
    std::string name = s.substr(b, e - b);
    if (braced && (e >= s.size() || s[e] != '}')) {
      out += s[i];
      continue;
    }
    auto it = vars.find(name);
    if (name.empty() || it == vars.end()) {
      out += s[i];
      continue;
    }
    out += it->second;
    i = braced ? e : e - 1;
  }
  return out;
}

// Shell-like word splitting with quote removal; variables are expanded in
// every quoting context.
std::optional<std::vector<std::string>> ShellWords(
    const std::string& line, const std::map<std::string, std::string>& vars) {
  std::vector<std::string> words;
  std::string cur;
  bool have = false;
  size_t i = 0;
  auto flush_segment = [&](const std::string& seg) { cur += ExpandVars(seg, vars); };
  while (i < line.size()) {
    char c = line[i];
    if (c == ' ' || c == '\t') {
      if (have) words.push_back(cur);
      cur.clear();
      have = false;
      ++i;
    } else if (c == '\'') {
      size_t e = line.find('\'', i + 1);
      if (e == std::string::npos) return std::nullopt;
      flush_segment(line.substr(i + 1, e - i - 1));
      have = true;
      i = e + 1;
    } else if (c == '"') {
      std::string seg;
      size_t j = i + 1;
      for (; j < line.size() && line[j] != '"'; ++j) {
        if (line[j] == '\\' && j + 1 < line.size() &&
            std::string_view("\"\\$`").find(line[j + 1]) != std::string_view::npos) {
          seg += line[++j];
        } else {
          seg += line[j];
        }
      }
      if (j >= line.size()) return std::nullopt;
      flush_segment(seg);
      have = true;
      i = j + 1;
    } else if (c == '\\' && i + 1 < line.size()) {
      cur += line[i + 1];
      have = true;
      i += 2;
    } else if (std::string_view("|;&<>`()").find(c) != std::string_view::npos) {
      return std::nullopt;
    } else {
      std::string seg;
      while (i < line.size() &&
             std::string_view(" \t'\"\\|;&<>`()").find(line[i]) == std::string_view::npos) {
        seg += line[i++];
      }
      flush_segment(seg);
      have = true;
    }
  }
  if (have) words.push_back(cur);
  return words;
}

// Splits `s/R/S/F` into its parts, unescaping the delimiter.
std::optional<std::array<std::string, 3>> SplitSubstitution(const std::string& expr) {
  if (expr.size() < 4 || expr[0] != 's') return std::nullopt;
  char delim = expr[1];
  if (std::isalnum(static_cast<unsigned char>(delim)) || delim == '\\' || delim == '\n') {
    return std::nullopt;
  }
  std::array<std::string, 3> parts;
  size_t part = 0;
  for (size_t i = 2; i < expr.size(); ++i) {
    char c = expr[i];
    if (part == 2) {
      parts[2] += c;
      continue;
    }
    if (c == '\\' && i + 1 < expr.size()) {
      if (expr[i + 1] == delim) {
        if (delim == '/' || part == 1) {
          parts[part] += delim;
        } else {
          parts[part] += '\\';
          parts[part] += delim;
        }
      } else {
        parts[part] += c;
        parts[part] += expr[i + 1];
      }
      ++i;
    } else if (c == delim) {
      ++part;
    } else {
      parts[part] += c;
    }
  }
  if (part != 2) return std::nullopt;
  return parts;
}

}  // namespace

std::optional<RewriteRule> LiftSedScript(const std::string& script) {
  static const boost::regex kAssign(R"(^(?:export\s+|local\s+)?([A-Za-z_]\w*)=(.*)$)");
  std::map<std::string, std::string> vars;
  std::optional<RewriteRule> rule;
  for (const std::string& raw : SplitLines(script)) {
    std::string line = Trim(raw);
    if (line.empty() || line[0] == '#' || line == "set -e" || line == "set -eu" ||
        line == "set -euo pipefail") {
      continue;
    }
    boost::smatch m;
    if (boost::regex_match(line, m, kAssign)) {
      auto words = ShellWords(m[2].str(), vars);
      if (!words || words->size() > 1) return std::nullopt;
      vars[m[1].str()] = words->empty() ? "" : words->front();
      continue;
    }
    if (rule) return std::nullopt;  // a second command
    auto words = ShellWords(line, vars);
    if (!words || words->empty() || (*words)[0] != "sed") return std::nullopt;
    bool extended = false, in_place = false;
    std::optional<std::string> expr;
    std::vector<std::string> operands;
    for (size_t i = 1; i < words->size(); ++i) {
      const std::string& w = (*words)[i];
      if (w == "-e") {
        if (expr || i + 1 >= words->size()) return std::nullopt;
        expr = (*words)[++i];
      } else if (w == "--in-place" || StartsWith(w, "--in-place=")) {
        in_place = true;
      } else if (w == "--regexp-extended") {
        extended = true;
      } else if (w.size() > 1 && w[0] == '-' && w[1] != '-') {
        for (size_t k = 1; k < w.size(); ++k) {
          if (w[k] == 'E' || w[k] == 'r') {
            extended = true;
          } else if (w[k] == 'i') {
            in_place = true;
            break;  // the rest is a backup suffix
          } else {
            return std::nullopt;
          }
        }
      } else if (!expr) {
        expr = w;
      } else {
        operands.push_back(w);
      }
    }
    if (!expr || !in_place || !extended || operands.size() != 1 || operands[0] != "$1") {
      return std::nullopt;
    }
    auto parts = SplitSubstitution(*expr);
    if (!parts) return std::nullopt;
    RewriteRule r;
    r.pattern = (*parts)[0];
    r.replacement = (*parts)[1];
    std::string flags = (*parts)[2];
    r.scope = Scope::kRandomMatchSite;
    for (char f : flags) {
      if (f == 'g') {
        r.scope = Scope::kAllMatches;
      } else if (f == 'I') {
        r.pattern = "(?i)" + r.pattern;
      } else {
        return std::nullopt;
      }
    }
    rule = std::move(r);
  }
  return rule;
}

Mutator ScriptToMutator(const std::string& script, const std::string& id) {
  if (auto rule = LiftSedScript(script)) {
    rule->id = id;
    rule->elements = {Element::kExpression};
    return *rule;
  }
  ExternalMutator m;
  m.id = id;
  m.command = "bash {script} {file}";
  m.script = script + (script.empty() || script.back() == '\n' ? "" : "\n");
  m.elements = {Element::kExpression};
  return m;
}

CandidateMutator CreateScript(const std::string& generalized, const TestCasePair& pair,
                              std::vector<GeneratedTest> tests, LlmClient& llm,
                              const std::string& id, const PromptTemplates& prompts) {
  std::string prompt = CreatorPrompt(prompts, pair.mutation_description, pair) +
                       "\nGeneral rule: <description>" + generalized + "</description>\n" +
                       "Test cases:\n" + FormatTests(tests) +
                       "**CURRENT TASK**: TASK 3 only.\n";
  std::string reply = llm.Send(prompt, "Mutator Creator");
  std::optional<std::string> code = ExtractCode(reply);
  if (!code || Trim(*code).empty()) {
    throw Error(ErrorCode::kMalformedResponse, "script reply has no code");
  }
  CandidateMutator c;
  c.generalized_description = generalized;
  c.script_text = *code;
  c.script = ScriptToMutator(*code, id);
  c.tests = std::move(tests);
  c.tests.push_back({pair.negative, pair.positive});
  return c;
}

ValidationOutcome ValidateCandidate(const CandidateMutator& candidate) {
  ValidationOutcome out;
  const int total = static_cast<int>(candidate.tests.size());
  std::shared_ptr<const CompiledRewrite> compiled;
  std::optional<ScratchDir> scratch;
  try {
    if (const auto* rule = std::get_if<RewriteRule>(&candidate.script)) {
      compiled = CompiledRewrite::Compile(*rule);
    } else {
      scratch.emplace();
    }
    for (int i = 0; i < total; ++i) {
      const GeneratedTest& t = candidate.tests[static_cast<size_t>(i)];
      const std::string want = NormalizeForCompare(t.expected_output);
      std::string got;
      bool pass = false;
      if (compiled) {
        size_t sites = compiled->CountSites(t.input);
        if (compiled->rule().scope == Scope::kRandomMatchSite && sites > 1) {
          for (size_t s = 0; s < sites && !pass; ++s) {
            got = compiled->ApplyAtSite(t.input, s).output;
            pass = NormalizeForCompare(got) == want;
          }
        } else {
          Rng rng(0);
          got = compiled->Apply(t.input, rng).output;
          pass = NormalizeForCompare(got) == want;
        }
      } else {
        got = ApplyExternal(std::get<ExternalMutator>(candidate.script), t.input,
                            scratch->path())
                  .output;
        pass = NormalizeForCompare(got) == want;
      }
      if (pass) {
        ++out.passed;
        if (i == total - 1) out.original_passed = true;
      } else {
        out.diagnostics.push_back("test " + std::to_string(i + 1) + " failed\n--- input\n" +
                                  t.input + "\n--- expected\n" + t.expected_output +
                                  "\n--- actual\n" + got);
      }
    }
    out.harness_ok = true;
  } catch (const Error& e) {
    out.harness_ok = false;
    out.passed = 0;
    out.original_passed = false;
    out.diagnostics = {std::string(ErrorCodeName(e.code())) + ": " + e.what()};
  }
  out.tag = TagForTotal(out.passed, total, out.harness_ok);
  return out;
}

CandidateMutator RefineMutator(const CandidateMutator& candidate,
                               const ValidationOutcome& outcome, LlmClient& llm,
                               const PromptTemplates& prompts) {
  bool accepted = (outcome.tag == ValidationTag::kCorrect ||
                   outcome.tag == ValidationTag::kPartiallyCorrect) &&
                  outcome.original_passed;
  if (accepted) {
    throw Error(ErrorCode::kInvalidArgument, "candidate needs no refinement");
  }
  if (candidate.refinement_count >= kMaxRefinements) {
    throw Error(ErrorCode::kRefinementBudgetExhausted,
                "refinement budget of " + std::to_string(kMaxRefinements) + " spent");
  }
  std::string context;
  if (!outcome.harness_ok) {
    context = "The test harness failed: " + Join(outcome.diagnostics, "\n");
  } else {
    context = std::to_string(outcome.passed) + " of " +
              std::to_string(candidate.tests.size()) + " tests pass.\n" +
              Join(outcome.diagnostics, "\n");
  }
  std::string prompt = FillTemplate(prompts.refiner,
                                    {{"mutation description", candidate.generalized_description},
                                     {"refinement context", context},
                                     {"test case context", FormatTests(candidate.tests)},
                                     {"mutator bash script", candidate.script_text}});
  std::string reply = llm.Send(prompt, "Mutator Refiner");
  std::optional<std::string> code = ExtractCode(reply);
  if (!code || Trim(*code).empty()) {
    throw Error(ErrorCode::kMalformedResponse, "refiner reply has no code");
  }
  CandidateMutator next = candidate;
  next.script_text = *code;
  next.script = ScriptToMutator(*code, MutatorId(candidate.script));
  next.refinement_count = candidate.refinement_count + 1;
  return next;
}

namespace {

std::vector<std::string> Tokens(const std::string& s) {
  static const boost::regex kToken(
      R"([A-Za-z_]\w*|\d[\w.]*|"(?:[^"\\\n]|\\.)*"|'(?:[^'\\\n]|\\.)*'|\S)");
  std::vector<std::string> out;
  for (boost::sregex_iterator it(s.begin(), s.end(), kToken), end; it != end; ++it) {
    out.push_back(it->str());
  }
  return out;
}

// Tokens of `a` and `b` outside their longest common subsequence.
std::pair<std::vector<std::string>, std::vector<std::string>> TokenDiff(
    const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const size_t n = a.size(), m = b.size();
  std::vector<std::vector<uint32_t>> lcs(n + 1, std::vector<uint32_t>(m + 1, 0));
  for (size_t i = n; i-- > 0;) {
    for (size_t j = m; j-- > 0;) {
      lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }
  std::vector<std::string> removed, added;
  size_t i = 0, j = 0;
  while (i < n && j < m) {
    if (a[i] == b[j]) {
      ++i, ++j;
    } else if (lcs[i + 1][j] >= lcs[i][j + 1]) {
      removed.push_back(a[i++]);
    } else {
      added.push_back(b[j++]);
    }
  }
  while (i < n) removed.push_back(a[i++]);
  while (j < m) added.push_back(b[j++]);
  return {removed, added};
}

}  // namespace

void Characterize(const TestCasePair& pair, Mutator& m) {
  constexpr size_t kMaxTokens = 4000;
  std::vector<std::string> neg = Tokens(pair.negative), pos = Tokens(pair.positive);
  if (neg.size() > kMaxTokens) neg.resize(kMaxTokens);
  if (pos.size() > kMaxTokens) pos.resize(kMaxTokens);
  auto [removed, added] = TokenDiff(neg, pos);

  Action action = Action::kModify;
  if (!added.empty() && removed.empty()) {
    action = Action::kAdd;
  } else if (added.empty() && !removed.empty()) {
    action = Action::kRemove;
  } else if (!added.empty()) {
    auto a = added, r = removed;
    std::sort(a.begin(), a.end());
    std::sort(r.begin(), r.end());
    if (a == r) action = Action::kSwap;
  }

  static const std::set<std::string> kStorage = {"static", "extern", "register", "auto",
                                                 "_Thread_local", "thread_local"};
  static const std::set<std::string> kTypes = {
      "int", "char", "short", "long", "float", "double", "void", "unsigned", "signed",
      "const", "volatile", "_Bool", "struct", "union", "enum", "_Complex", "restrict"};
  static const std::set<std::string> kUnary = {"!", "~", "&", "*", "-", "+"};
  std::set<Element> elements;
  std::vector<std::string> changed = removed;
  changed.insert(changed.end(), added.begin(), added.end());
  bool has_paren = false, has_storage = false;
  for (const std::string& t : changed) {
    const unsigned char c0 = static_cast<unsigned char>(t[0]);
    if (kStorage.count(t)) {
      elements.insert(Element::kStorageClassSpecifier);
      has_storage = true;
    } else if (t == "__attribute__" || t == "__declspec") {
      elements.insert(Element::kAttribute);
    } else if (StartsWith(t, "__builtin")) {
      elements.insert(Element::kBuiltinFunction);
    } else if (std::isdigit(c0) || t[0] == '"') {
      elements.insert(Element::kLiteral);
    } else if (t[0] == '\'') {
      elements.insert(Element::kCharacter);
    } else if (kTypes.count(t) || (t.size() > 2 && t.substr(t.size() - 2) == "_t")) {
      elements.insert(Element::kType);
    } else if (t == "asm" || t == "__asm__" || t == "#" || t == "return" || t == "goto") {
      elements.insert(Element::kStatement);
    } else if (t == "=") {
      elements.insert(Element::kInitialization);
    } else if (t == "(" || t == ")") {
      has_paren = true;
    } else if (kUnary.count(t) && changed.size() <= 2) {
      elements.insert(Element::kUnaryOperator);
    }
  }
  if (has_storage && has_paren) elements.insert(Element::kFunctionDeclaration);
  if (elements.empty()) elements.insert(Element::kExpression);
  std::visit(
      [&](auto& mut) {
        mut.action = action;
        mut.elements = elements;
      },
      m);
}

void SharedRegistry::Add(Mutator m) {
  std::lock_guard lock(mu_);
  registry_->Add(std::move(m));
}

MinerLlms LoadReplayLlms(const std::filesystem::path& path) {
  MinerLlms llms;
  try {
    nlohmann::json j = nlohmann::json::parse(ReadFile(path));
    for (const auto& t : j.at("derive")) {
      llms.derive.push_back(ReplayTransport::FromJson(t.dump(), path.string()));
    }
    llms.agent = ReplayTransport::FromJson(j.at("agent").dump(), path.string());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": bad transcript file: " + e.what());
  }
  return llms;
}

std::string MinedId(const IssueRecord& issue) {
  return issue.compiler.name + "-" + issue.id;
}

namespace {

class CountingClient : public LlmClient {
 public:
  explicit CountingClient(LlmClient& inner) : inner_(inner) {}
  std::string Send(const std::string& prompt, const std::string& role) override {
    CountCall();
    return inner_.Send(prompt, role);
  }
  std::string model() const override { return inner_.model(); }

 private:
  LlmClient& inner_;
};

MineResult Reject(MineResult r, MineStage stage, std::string reason) {
  r.mined = false;
  r.stage = stage;
  r.reason = std::move(reason);
  return r;
}

}  // namespace

MineResult MineIssue(const IssueRecord& issue, const MinerOptions& options,
                     const MinerLlms& llms, SharedRegistry* registry) {
  const PromptTemplates& prompts = options.prompts ? *options.prompts : PromptTemplates::Default();
  MineResult r;
  r.issue_id = issue.id;

  // Step 1: positive input and screening on the fixed compiler.
  if (issue.status != IssueStatus::kFixedClosed) {
    return Reject(std::move(r), MineStage::kExtract, "NotFixedClosed");
  }
  std::optional<std::string> positive = ExtractPositive(issue);
  if (!positive) return Reject(std::move(r), MineStage::kExtract, "NoInput");
  ScreenResult screen = ScreenFixed(issue, *positive, options.target);
  if (!screen.keep) return Reject(std::move(r), MineStage::kExtract, screen.reason);

  // Steps 2 and 3: negative input, retried with the next model on failure.
  if (llms.derive.empty()) throw Error(ErrorCode::kInvalidArgument, "no derive model configured");
  std::optional<TestCasePair> pair;
  MineStage failed_stage = MineStage::kDerive;
  std::string failure;
  for (const auto& model : llms.derive) {
    CountingClient counter(*model);
    try {
      TestCasePair candidate = DeriveNegative(issue, *positive, counter, prompts);
      r.derive_calls += counter.calls();
      ReviewResult review = ReviewNegative(issue, candidate, options.target, options.reviewer);
      if (review.accepted) {
        pair = std::move(candidate);
        break;
      }
      failed_stage = MineStage::kReview;
      failure = (review.manual ? "manual: " : "auto: ") + review.reason;
    } catch (const Error& e) {
      r.derive_calls += counter.calls();
      if (e.code() != ErrorCode::kMalformedResponse) throw;
      failed_stage = MineStage::kDerive;
      failure = std::string("MalformedResponse: ") + e.what();
    }
  }
  if (!pair) return Reject(std::move(r), failed_stage, failure);
  r.pair = pair;

  // Step 4: create, validate and refine.
  CountingClient agent(*llms.agent);
  try {
    std::string general =
        GeneralizeDescription(pair->mutation_description, agent, *pair, prompts);
    std::vector<GeneratedTest> tests = GenerateTests(general, agent, *pair, options.tests, prompts);
    CandidateMutator candidate =
        CreateScript(general, *pair, std::move(tests), agent, MinedId(issue), prompts);
    for (;;) {
      ValidationOutcome outcome = ValidateCandidate(candidate);
      r.outcome = outcome;
      r.refinements = candidate.refinement_count;
      bool accepted = (outcome.tag == ValidationTag::kCorrect ||
                       outcome.tag == ValidationTag::kPartiallyCorrect) &&
                      outcome.original_passed;
      if (accepted) break;
      candidate = RefineMutator(candidate, outcome, agent, prompts);
    }
    Mutator m = candidate.script;
    Characterize(*pair, m);
    std::visit([&](auto& mut) { mut.provenance = issue.compiler.name + "#" + issue.id; }, m);
    r.agent_calls = agent.calls();
    if (registry) registry->Add(m);
    r.mutator = std::move(m);
    r.mined = true;
    r.reason = std::string(ValidationTagName(r.outcome->tag));
    return r;
  } catch (const Error& e) {
    r.agent_calls = agent.calls();
    switch (e.code()) {
      case ErrorCode::kMalformedResponse:
      case ErrorCode::kDegeneratePair:
      case ErrorCode::kRefinementBudgetExhausted:
        return Reject(std::move(r), MineStage::kGenerate,
                      std::string(ErrorCodeName(e.code())) + ": " + e.what());
      default:
        throw;
    }
  }
}

}  // namespace histmut
