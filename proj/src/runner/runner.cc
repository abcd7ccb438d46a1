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

#include "histmut/runner.h"

#include <csignal>

#include <boost/regex.hpp>

#include "histmut/error.h"
#include "histmut/util.h"

namespace histmut {

namespace fs = std::filesystem;

std::string_view CrashKindName(CrashKind k) {
  switch (k) {
    case CrashKind::kSegmentationFault: return "SegmentationFault";
    case CrashKind::kAssertionFailure: return "AssertionFailure";
    case CrashKind::kHang: return "Hang";
    case CrashKind::kInternalCompilerError: return "InternalCompilerError";
  }
  return "?";
}

std::optional<CrashKind> ParseCrashKind(std::string_view s) {
  for (CrashKind k : {CrashKind::kSegmentationFault, CrashKind::kAssertionFailure,
                      CrashKind::kHang, CrashKind::kInternalCompilerError}) {
    if (CrashKindName(k) == s) return k;
  }
  return std::nullopt;
}

std::string_view OutcomeKindName(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::kSuccess: return "Success";
    case OutcomeKind::kCompileError: return "CompileError";
    case OutcomeKind::kCrash: return "Crash";
  }
  return "?";
}

void ValidateTargetConfig(const TargetConfig& config) {
  if (CountOccurrences(config.command, "{input}") != 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "target command needs exactly one {input} placeholder: " +
                    config.command);
  }
  if (config.timeout.count() <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "target timeout must be positive");
  }
}

OutcomeClass ClassifyOutcome(const ExitStatus& exit, std::string_view stderr_text,
                             bool timed_out) {
  static const boost::regex kAssertion(
      R"(Assertion [`'"].*['"] failed|assertion failed|Assertion failed)",
      boost::regex::perl | boost::regex::icase);
  if (timed_out) return {OutcomeKind::kCrash, CrashKind::kHang};
  if (exit.signaled && (exit.signal == SIGSEGV || exit.signal == SIGBUS)) {
    return {OutcomeKind::kCrash, CrashKind::kSegmentationFault};
  }
  std::string text(stderr_text);
  if (boost::regex_search(text, kAssertion)) {
    return {OutcomeKind::kCrash, CrashKind::kAssertionFailure};
  }
  std::string lower = ToLower(text);
  if (lower.find("internal compiler error") != std::string::npos ||
      text.find("PLEASE submit a bug report") != std::string::npos) {
    return {OutcomeKind::kCrash, CrashKind::kInternalCompilerError};
  }
  if (exit.signaled || exit.code != 0) return {OutcomeKind::kCompileError, std::nullopt};
  return {OutcomeKind::kSuccess, std::nullopt};
}

TraceDialect DetectDialect(std::string_view stderr_text) {
  static const boost::regex kGccFrame(R"(^0x[0-9a-fA-F]+ \S)");
  static const boost::regex kClangFrame(R"(^\s*#\d+ 0x[0-9a-fA-F]+ )");
  std::string text(stderr_text);
  if (boost::regex_search(text, kClangFrame)) return TraceDialect::kClangCrash;
  if (boost::regex_search(text, kGccFrame)) return TraceDialect::kGccIce;
  return TraceDialect::kGeneric;
}

namespace {

std::string StripEllipsis(std::string s) {
  while (s.size() >= 3 && s.compare(s.size() - 3, 3, "...") == 0) s.resize(s.size() - 3);
  return Trim(s);
}

StackTrace ParseGcc(const std::vector<std::string>& lines) {
  // 0xe0f0dc eliminate_unnecessary_stmts
  //     ../../gcc/tree-ssa-dce.cc:1512
  static const boost::regex kFrame(R"(^(0x[0-9a-fA-F]+)\s+(\S.*?)\s*$)");
  static const boost::regex kLoc(R"(^\s+(\S+:\d+\S*)\s*$)");
  StackTrace trace;
  for (size_t i = 0; i < lines.size(); ++i) {
    boost::smatch m;
    if (!boost::regex_match(lines[i], m, kFrame)) continue;
    StackFrame f;
    f.pc = m[1].str();
    f.function = StripEllipsis(m[2].str());
    f.raw = lines[i];
    boost::smatch loc;
    if (i + 1 < lines.size() && boost::regex_match(lines[i + 1], loc, kLoc)) {
      f.location = StripEllipsis(loc[1].str());
      ++i;
    }
    trace.frames.push_back(std::move(f));
  }
  return trace;
}

StackTrace ParseClang(const std::vector<std::string>& lines) {
  //  #3 0x00005555 clang::Foo::bar(int) /src/lib/Foo.cpp:12:3
  //  #4 0x00005555 (/usr/bin/clang+0x1234)
  static const boost::regex kFrame(R"(^\s*#\d+\s+(0x[0-9a-fA-F]+)\s+(.*?)\s*$)");
  static const boost::regex kSrcTail(R"(^(.*\S)\s+(\S+:\d+(?::\d+)?)$)");
  static const boost::regex kModTail(R"(^(.*?)\s*(\([^()]*\+0x[0-9a-fA-F]+\))$)");
  StackTrace trace;
  for (const auto& line : lines) {
    boost::smatch m;
    if (!boost::regex_match(line, m, kFrame)) continue;
    StackFrame f;
    f.pc = m[1].str();
    f.raw = line;
    std::string rest = m[2].str();
    boost::smatch t;
    if (boost::regex_match(rest, t, kSrcTail)) {
      f.function = Trim(t[1].str());
      f.location = t[2].str();
    } else if (boost::regex_match(rest, t, kModTail)) {
      f.function = Trim(t[1].str());
      f.location = t[2].str();
    } else {
      f.function = Trim(rest);
    }
    trace.frames.push_back(std::move(f));
  }
  return trace;
}

StackTrace ParseGeneric(const std::vector<std::string>& lines) {
  // gdb:  #0  0x0000 in func (a=1) at file.c:12
  //       #1  func (a=1) at file.c:12
  // other: "    at func (file.c:12)"
  static const boost::regex kGdb(
      R"(^\s*#\d+\s+(?:(0x[0-9a-fA-F]+)\s+in\s+)?([^\s(]+)(?:\s*\(.*?\))?(?:\s+(?:at|from)\s+(\S+))?\s*$)");
  static const boost::regex kAt(R"(^\s+at\s+([^\s(]+)\s*\(([^)]*)\)\s*$)");
  StackTrace trace;
  for (const auto& line : lines) {
    boost::smatch m;
    StackFrame f;
    if (boost::regex_match(line, m, kGdb)) {
      f.pc = m[1].str();
      f.function = m[2].str();
      f.location = m[3].str();
    } else if (boost::regex_match(line, m, kAt)) {
      f.function = m[1].str();
      f.location = m[2].str();
    } else {
      continue;
    }
    f.raw = line;
    trace.frames.push_back(std::move(f));
  }
  return trace;
}

}  // namespace

StackTrace ParseStackTrace(std::string_view stderr_text, TraceDialect dialect) {
  auto lines = SplitLines(stderr_text);
  switch (dialect) {
    case TraceDialect::kGccIce: return ParseGcc(lines);
    case TraceDialect::kClangCrash: return ParseClang(lines);
    case TraceDialect::kGeneric: return ParseGeneric(lines);
  }
  return {};
}

RunOutcome Compile(const TargetConfig& config, std::string_view source) {
  ValidateTargetConfig(config);
  ScratchDir dir(config.workdir, "run");
  fs::path input = dir.path() / config.input_name;
  WriteFile(input, source);

  ProcessSpec spec;
  for (std::string arg : SplitCommandLine(config.command)) {
    spec.argv.push_back(ReplaceAll(std::move(arg), "{input}", input.string()));
  }
  spec.cwd = dir.path();
  spec.env = EnvFromAllowList(config.env_allow);
  spec.timeout = config.timeout;
  ProcessResult pr = RunProcess(spec);

  RunOutcome out;
  out.exit = {pr.signaled, pr.exit_code, pr.signal};
  out.duration = pr.duration;
  if (pr.timed_out && out.duration < config.timeout) out.duration = config.timeout;
  out.stderr_text = std::move(pr.stderr_text);
  OutcomeClass cls = ClassifyOutcome(out.exit, out.stderr_text, pr.timed_out);
  out.kind = cls.kind;
  out.crash = cls.crash;
  if (out.kind == OutcomeKind::kCrash) {
    out.stacktrace =
        ParseStackTrace(out.stderr_text, DetectDialect(out.stderr_text));
  }
  for (const auto& name : config.collect) {
    fs::path p = dir.path() / name;
    if (fs::is_regular_file(p)) out.artifacts[name] = ReadFile(p);
  }
  return out;
}

}  // namespace histmut
