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

// Fixture compiler used as a stand-in target. It accepts a C-like input,
// reports coverage features, and fails deterministically on planted
// patterns:
//
//   BOOM_HANG                                       never terminates
//   BOOM_SEGV, or an array bound like [666...6wb]   SIGSEGV, back-end frames
//   BOOM_ASSERT, or a double function returning
//     __builtin_assoc_barrier(...)                  assertion, IR frames
//   BOOM_ICE, or a static prototype `static T f();` ICE, optimizer frames
//
// Unbalanced brackets and #error produce an ordinary diagnostic (exit 1).
// With --fixed only the BOOM_* tokens crash, which models a compiler in
// which the pattern-triggered bugs were repaired.
//
// Usage: fixture-cc [-O<n>] [-c] [--fixed] INPUT [-o OUT] [--coverage-file PATH]

#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

struct Feature {
  const char* name;
  const char* pattern;
};

const Feature kFeatures[] = {
    {"kw_static", R"(\bstatic\b)"},
    {"kw_extern", R"(\bextern\b)"},
    {"kw_return", R"(\breturn\b)"},
    {"kw_for", R"(\bfor\b)"},
    {"kw_while", R"(\bwhile\b)"},
    {"kw_if", R"(\bif\b)"},
    {"kw_double", R"(\bdouble\b)"},
    {"kw_float", R"(\bfloat\b)"},
    {"kw_char", R"(\bchar\b)"},
    {"kw_unsigned", R"(\bunsigned\b)"},
    {"kw_const", R"(\bconst\b)"},
    {"kw_struct", R"(\bstruct\b)"},
    {"kw_void", R"(\bvoid\b)"},
    {"attribute", R"(__attribute__)"},
    {"target_clones", R"(target_clones)"},
    {"builtin_assoc", R"(__builtin_assoc_barrier)"},
    {"builtin_other", R"(__builtin_(?!assoc_barrier)\w+)"},
    {"lit_wb", R"(\b\d+wb\b)"},
    {"lit_bin", R"(\b0b[01]+\b)"},
    {"lit_hex", R"(\b0[xX][0-9a-fA-F]+\b)"},
    {"lit_float", R"(\b\d+\.\d*)"},
    {"cast", R"(\((unsigned |signed |const )*(int|char|short|long|float|double|void)\s*\**\)\s*[\w(])"},
    {"array_decl", R"(\w+\s*\[\s*\w+\s*\])"},
    {"array_param", R"(\(\s*[^)]*\[\s*\]\s*[,)])"},
    {"pointer", R"(\w\s*\*\s*\w)"},
    {"asm", R"(__asm__)"},
    {"call", R"(\b\w+\s*\([^;{]*\)\s*;)"},
    {"fn_def", R"(\)\s*\{)"},
};

struct Crash {
  const char* token;
  const char* pattern;  // disabled by --fixed
  void (*fire)(const std::string& input);
};

void Flush() {
  std::cerr.flush();
  std::fflush(stderr);
}

void FireHang(const std::string&) {
  while (true) std::this_thread::sleep_for(std::chrono::seconds(1));
}

void FireSegv(const std::string& input) {
  std::cerr << "Stack dump:\n"
            << "0.\tProgram arguments: fixture-cc -c " << input << "\n"
            << "1.\t<eof> parser at end of file\n"
            << " #0 0x0000000000401a10 print_stack_trace diag/signals.cc:41\n"
            << " #1 0x0000000000402b20 layout_array_type be/layout.cc:51\n"
            << " #2 0x0000000000402c44 emit_global_decl be/emit.cc:210\n"
            << " #3 0x0000000000403000 compile_unit driver/main.cc:30\n";
  Flush();
  std::signal(SIGSEGV, SIG_DFL);
  std::raise(SIGSEGV);
}

void FireAssert(const std::string&) {
  std::cerr << "fixture-cc: ir/builder.cc:77: Value *build_assoc_barrier(Expr *): "
               "Assertion `operand_type->is_integer()' failed.\n"
            << "PLEASE submit a bug report to https://fixture.invalid/issues "
               "and include the crash backtrace.\n"
            << "Stack dump:\n"
            << " #0 0x0000000000401a10 print_stack_trace diag/signals.cc:41\n"
            << " #1 0x00007f00000011c0 __assert_fail_base (/lib/libc.so.6+0x2871b)\n"
            << " #2 0x0000000000404d10 build_assoc_barrier ir/builder.cc:77\n"
            << " #3 0x0000000000405120 lower_return_stmt ir/lower.cc:140\n"
            << " #4 0x0000000000405300 lower_function ir/lower.cc:22\n";
  Flush();
  std::signal(SIGABRT, SIG_DFL);
  std::abort();
}

void FireIce(const std::string& input) {
  std::cerr << "during GIMPLE pass: dce\n"
            << input << ": In function 'f':\n"
            << input << ":1:1: internal compiler error: in remove_dead_calls, "
               "at opt/dce.cc:1512\n"
            << "0x4000aa fancy_abort(char const*, int, char const*)\n"
            << "\tdiag/diagnostic.cc:1700\n"
            << "0x4a10dc remove_dead_calls\n"
            << "\topt/dce.cc:1512\n"
            << "0x4a1e55 execute_dce\n"
            << "\topt/dce.cc:2069\n"
            << "0x4a2000 run_pass_list\n"
            << "\topt/passes.cc:88\n"
            << "Please submit a full bug report, with preprocessed source.\n";
  Flush();
  std::exit(4);
}

const Crash kCrashes[] = {
    {"BOOM_HANG", nullptr, FireHang},
    {"BOOM_SEGV", R"(\[\s*6{16,}wb\s*\])", FireSegv},
    {"BOOM_ASSERT",
     R"(double\s+\w+\s*\([^)]*\)\s*\{[^}]*return\s+__builtin_assoc_barrier\s*\()",
     FireAssert},
    {"BOOM_ICE", R"(\bstatic\s+\w+\s+\w+\s*\(\s*\)\s*;)", FireIce},
};

size_t CountMatches(const std::string& text, const std::regex& re) {
  return static_cast<size_t>(std::distance(
      std::sregex_iterator(text.begin(), text.end(), re), std::sregex_iterator()));
}

std::string Bucket(size_t n) {
  if (n == 1) return "1";
  if (n <= 3) return "2-3";
  return "4+";
}

// Returns an error message, or empty when the input "parses".
std::string CheckSyntax(const std::string& text, int& line_out) {
  std::vector<std::pair<char, int>> stack;
  int line = 1;
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\n') {
      ++line;
    } else if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') ++i;
      --i;
    } else if (c == '/' && i + 1 < text.size() && text[i + 1] == '*') {
      size_t end = text.find("*/", i + 2);
      if (end == std::string::npos) {
        line_out = line;
        return "unterminated comment";
      }
      for (size_t j = i; j < end; ++j) line += text[j] == '\n';
      i = end + 1;
    } else if (c == '"' || c == '\'') {
      size_t j = i + 1;
      while (j < text.size() && text[j] != c && text[j] != '\n') {
        if (text[j] == '\\') ++j;
        ++j;
      }
      if (j >= text.size() || text[j] != c) {
        line_out = line;
        return "missing terminating quote";
      }
      i = j;
    } else if (c == '(' || c == '[' || c == '{') {
      stack.emplace_back(c, line);
    } else if (c == ')' || c == ']' || c == '}') {
      char open = c == ')' ? '(' : c == ']' ? '[' : '{';
      if (stack.empty() || stack.back().first != open) {
        line_out = line;
        return std::string("unexpected '") + c + "'";
      }
      stack.pop_back();
    } else if (c == '#' && text.compare(i, 6, "#error") == 0) {
      line_out = line;
      return "#error directive";
    }
  }
  if (!stack.empty()) {
    line_out = stack.back().second;
    return std::string("unmatched '") + stack.back().first + "'";
  }
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  std::string input_path;
  std::string coverage_file;
  bool fixed = false;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "-o" || a == "--coverage-file") {
      if (i + 1 >= argc) {
        std::cerr << "fixture-cc: error: missing argument to " << a << "\n";
        return 1;
      }
      if (a == "--coverage-file") coverage_file = argv[i + 1];
      ++i;
    } else if (a == "--fixed") {
      fixed = true;
    } else if (!a.empty() && a[0] == '-') {
      continue;  // -O2, -c and friends are accepted and ignored
    } else {
      input_path = a;
    }
  }
  if (input_path.empty()) {
    std::cerr << "fixture-cc: error: no input files\n";
    return 1;
  }
  std::ifstream in(input_path, std::ios::binary);
  if (!in) {
    std::cerr << "fixture-cc: error: " << input_path << ": No such file\n";
    return 1;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  std::vector<std::string> covered;
  std::vector<std::string> present;
  for (const auto& f : kFeatures) {
    size_t n = CountMatches(text, std::regex(f.pattern));
    if (n == 0) continue;
    present.push_back(f.name);
    covered.push_back(std::string(f.name) + "@" + Bucket(n));
  }
  for (size_t i = 0; i < present.size(); ++i) {
    for (size_t j = i + 1; j < present.size(); ++j) {
      covered.push_back(present[i] + "&" + present[j]);
    }
  }
  for (const auto& c : covered) std::cerr << "fixture-cov: " << c << "\n";
  if (!coverage_file.empty()) {
    std::ofstream cov(coverage_file);
    for (const auto& c : covered) cov << c << " 1\n";
  }
  Flush();

  for (const auto& crash : kCrashes) {
    bool hit = text.find(crash.token) != std::string::npos;
    if (!hit && crash.pattern && !fixed) {
      hit = std::regex_search(text, std::regex(crash.pattern));
    }
    if (hit) {
      crash.fire(input_path);
    }
  }

  int line = 0;
  std::string err = CheckSyntax(text, line);
  if (!err.empty()) {
    std::cerr << input_path << ":" << line << ": error: " << err << "\n";
    return 1;
  }
  return 0;
}
