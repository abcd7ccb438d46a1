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

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "histmut/cli.h"
#include "histmut/error.h"
#include "histmut/util.h"

namespace histmut {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::map<size_t, size_t> ParseHistogramCsv(const std::string& text) {
  std::map<size_t, size_t> out;
  auto lines = SplitLines(text);
  for (size_t i = 1; i < lines.size(); ++i) {
    auto parts = Split(lines[i], ',');
    if (parts.size() != 2) continue;
    out[std::stoull(parts[0])] = std::stoull(parts[1]);
  }
  return out;
}

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string Num(double v) {
  std::ostringstream o;
  o << std::setprecision(6) << v;
  return o.str();
}

constexpr double kW = 640, kH = 400, kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;

std::string SvgFrame(const std::string& title, const std::string& x_label,
                     const std::string& y_label, double x_max, double y_max,
                     const std::string& body, bool integer_x) {
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << Escape(title) << "</text>\n";
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  o << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw
    << "\" y2=\"" << kTop + ph << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
    << kTop + ph << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    double fx = x_max * i / 5, fy = y_max * i / 5;
    double px = kLeft + pw * i / 5, py = kTop + ph - ph * i / 5;
    o << "<text x=\"" << px << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">"
      << (integer_x ? Num(std::round(fx)) : Num(fx)) << "</text>\n"
      << "<text x=\"" << kLeft - 6 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">"
      << Num(std::round(fy * 100) / 100) << "</text>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << py << "\" x2=\"" << kLeft + pw << "\" y2=\""
      << py << "\" stroke=\"#e0e0e0\"/>\n";
  }
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 18
    << "\" text-anchor=\"middle\">" << Escape(x_label) << "</text>\n"
    << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << kTop + ph / 2 << ")\">" << Escape(y_label) << "</text>\n"
    << body << "</svg>\n";
  return o.str();
}

}  // namespace

std::string SvgLinePlot(
    const std::string& title, const std::string& x_label, const std::string& y_label,
    const std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>& series) {
  double x_max = 0, y_max = 0;
  for (const auto& [name, pts] : series) {
    for (const auto& [x, y] : pts) {
      x_max = std::max(x_max, x);
      y_max = std::max(y_max, y);
    }
  }
  if (x_max <= 0) x_max = 1;
  if (y_max <= 0) y_max = 1;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  std::ostringstream body;
  for (size_t i = 0; i < series.size(); ++i) {
    const auto& [name, pts] = series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    body << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : pts) {
      body << Num(kLeft + pw * x / x_max) << "," << Num(kTop + ph - ph * y / y_max) << " ";
    }
    body << "\"/>\n";
    body << "<rect x=\"" << kLeft + 10 << "\" y=\"" << kTop + 6 + 16 * i
         << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n"
         << "<text x=\"" << kLeft + 26 << "\" y=\"" << kTop + 15 + 16 * i << "\">"
         << Escape(name) << "</text>\n";
  }
  return SvgFrame(title, x_label, y_label, x_max, y_max, body.str(), false);
}

std::string SvgBarPlot(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::map<size_t, size_t>& bars) {
  size_t x_max = bars.empty() ? 1 : bars.rbegin()->first;
  size_t y_max = 1;
  for (const auto& [k, v] : bars) y_max = std::max(y_max, v);
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  const double slot = pw / static_cast<double>(x_max + 1);
  std::ostringstream body;
  for (const auto& [k, v] : bars) {
    double h = ph * static_cast<double>(v) / static_cast<double>(y_max);
    double x = kLeft + slot * (static_cast<double>(k) + 0.1);
    body << "<rect x=\"" << Num(x) << "\" y=\"" << Num(kTop + ph - h) << "\" width=\""
         << Num(slot * 0.8) << "\" height=\"" << Num(h) << "\" fill=\"" << kPalette[0]
         << "\"/>\n"
         << "<text x=\"" << Num(x + slot * 0.4) << "\" y=\"" << Num(kTop + ph - h - 4)
         << "\" text-anchor=\"middle\">" << v << "</text>\n";
  }
  return SvgFrame(title, x_label, y_label, static_cast<double>(x_max + 1),
                  static_cast<double>(y_max), body.str(), true);
}

std::string HistogramCsv(const std::map<size_t, size_t>& histogram, const std::string& key_name,
                         const std::string& value_name) {
  std::ostringstream o;
  o << key_name << "," << value_name << "\n";
  for (const auto& [k, v] : histogram) o << k << "," << v << "\n";
  return o.str();
}

std::string VennCsv(const std::vector<VennRegion>& regions) {
  std::set<std::string> names;
  for (const auto& r : regions) names.insert(r.members.begin(), r.members.end());
  std::ostringstream o;
  o << "region";
  for (const auto& n : names) o << "," << n;
  o << ",count\n";
  for (const auto& r : regions) {
    o << Join(r.members, "&");
    for (const auto& n : names) {
      o << "," << (std::find(r.members.begin(), r.members.end(), n) != r.members.end() ? 1 : 0);
    }
    o << "," << r.count << "\n";
  }
  return o.str();
}

CampaignSummary SummarizeCampaign(const fs::path& dir) {
  CampaignSummary s;
  s.name = fs::absolute(dir).lexically_normal().filename().string();
  if (s.name.empty()) s.name = fs::absolute(dir).parent_path().filename().string();
  fs::path state_path = dir / "campaign.state";
  if (!fs::exists(state_path)) {
    throw Error(ErrorCode::kCorruptState, dir.string() + ": missing campaign.state");
  }
  try {
    json state = json::parse(ReadFile(state_path));
    const json& c = state.at("counters");
    s.counters.steps = c.at("steps");
    s.counters.executions = c.at("executions");
    s.counters.files_generated = c.at("files_generated");
    s.counters.crashes_raw = c.at("crashes_raw");
    s.counters.crashes_unique = c.at("crashes_unique");
    s.counters.infra_errors = c.at("infra_errors");
    for (const auto& [key, hits] : state.at("unique_keys").items()) s.keys.insert(key);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kCorruptState, dir.string() + ": " + e.what());
  }
  if (fs::exists(dir / "stats.csv")) s.series = ParseStatsCsv(ReadFile(dir / "stats.csv"));
  if (fs::exists(dir / "triage" / "chain_length_histogram.csv")) {
    s.chain_length_histogram = ParseHistogramCsv(ReadFile(dir / "triage" / "chain_length_histogram.csv"));
  }
  if (fs::exists(dir / "triage" / "bugs_histogram.csv")) {
    s.bugs_histogram = ParseHistogramCsv(ReadFile(dir / "triage" / "bugs_histogram.csv"));
  }
  return s;
}

void WriteReport(const std::vector<CampaignSummary>& input, const fs::path& out) {
  fs::create_directories(out);
  std::vector<CampaignSummary> campaigns = input;
  std::map<std::string, int> seen;
  for (auto& c : campaigns) {
    int n = ++seen[c.name];
    if (n > 1) c.name += "-" + std::to_string(n);
  }

  std::ostringstream cov, crashes, files;
  cov << "campaign,timestamp,coverage_size\n";
  crashes << "campaign,timestamp,unique_crashes\n";
  files << "campaign,steps,executions,files_generated,crashes_raw,crashes_unique,infra_errors\n";
  std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> cov_series,
      crash_series;
  std::map<size_t, size_t> chain_total, bugs_total;
  std::map<std::string, std::set<std::string>> keys;
  for (const auto& c : campaigns) {
    WriteFile(out / c.name / "stats.csv", FormatStatsCsv(c.series));
    std::vector<std::pair<double, double>> cp, kp;
    for (const auto& r : c.series) {
      cov << c.name << "," << Num(r.timestamp_s) << "," << r.coverage_size << "\n";
      crashes << c.name << "," << Num(r.timestamp_s) << "," << r.unique_crashes << "\n";
      cp.emplace_back(r.timestamp_s, static_cast<double>(r.coverage_size));
      kp.emplace_back(r.timestamp_s, static_cast<double>(r.unique_crashes));
    }
    cov_series.emplace_back(c.name, std::move(cp));
    crash_series.emplace_back(c.name, std::move(kp));
    files << c.name << "," << c.counters.steps << "," << c.counters.executions << ","
          << c.counters.files_generated << "," << c.counters.crashes_raw << ","
          << c.counters.crashes_unique << "," << c.counters.infra_errors << "\n";
    for (const auto& [k, v] : c.chain_length_histogram) chain_total[k] += v;
    for (const auto& [k, v] : c.bugs_histogram) bugs_total[k] += v;
    keys[c.name] = c.keys;
  }
  WriteFile(out / "coverage_over_time.csv", cov.str());
  WriteFile(out / "crashes_over_time.csv", crashes.str());
  WriteFile(out / "file_counts.csv", files.str());
  WriteFile(out / "venn.csv", VennCsv(DiffCampaigns(keys)));
  WriteFile(out / "chain_length_histogram.csv",
            HistogramCsv(chain_total, "chain_length", "crashes"));
  WriteFile(out / "bugs_histogram.csv", HistogramCsv(bugs_total, "bugs", "mutators"));
  WriteFile(out / "coverage.svg",
            SvgLinePlot("Coverage over time", "seconds", "coverage ids", cov_series));
  WriteFile(out / "crashes.svg",
            SvgLinePlot("Unique crashes over time", "seconds", "unique crashes", crash_series));
  WriteFile(out / "chain_length.svg",
            SvgBarPlot("Mutations needed per crash", "chain length", "crashes", chain_total));
  WriteFile(out / "bugs_per_mutator.svg",
            SvgBarPlot("Bugs per mutator", "bugs", "mutators", bugs_total));
}

}  // namespace histmut
