// Copyright 2026 The fuzzeval Authors.
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

#include "fuzzeval/report/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace fuzzeval::report {
namespace {

std::string Row(std::initializer_list<std::string> fields) {
  std::string out;
  bool first = true;
  for (const auto& f : fields) {
    if (!first) out += ',';
    out += CsvField(f);
    first = false;
  }
  out += '\n';
  return out;
}

// Integers print without a fraction; anything else keeps full precision.
std::string Number(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 1e15) {
    return fmt::format("{}", static_cast<long long>(v));
  }
  return fmt::format("{}", v);
}

std::string Sig(double v) { return fmt::format("{:#.6g}", v); }

template <typename T>
T ParseNumber(const std::string& s, const char* what) {
  T value{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument(std::string("bad ") + what + " '" + s + "'");
  }
  return value;
}

std::string Xml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default:
        // Control characters are not allowed in XML 1.0.
        if (static_cast<unsigned char>(c) >= 0x20 || c == '\t' || c == '\n') out += c;
    }
  }
  return out;
}

}  // namespace

std::string CsvField(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::vector<std::string>> ParseCsv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    any = true;
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw std::invalid_argument("unterminated quoted CSV field");
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string EmitTimeseriesCsv(std::span<const TrialRecord> trials) {
  std::vector<const TrialRecord*> sorted;
  for (const auto& t : trials) sorted.push_back(&t);
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    return campaign::KeyOf(*a) < campaign::KeyOf(*b);
  });
  std::string out = "fuzzer,target,seed_config,trial,time,cumulative_crashes\n";
  for (const auto* t : sorted) {
    const std::string prefix = CsvField(t->fuzzer_id) + ',' + CsvField(t->target_id) + ',' +
                               CsvField(t->seed_config_id) + ',' +
                               std::to_string(t->trial_index) + ',';
    out += prefix + "0.000000,0\n";
    std::vector<double> times;
    for (const auto& ev : t->crashes) times.push_back(ev.at);
    std::sort(times.begin(), times.end());
    for (std::size_t i = 0; i < times.size(); ++i) {
      out += prefix + fmt::format("{:.6f},{}\n", times[i], i + 1);
    }
  }
  return out;
}

std::vector<TimeseriesRow> ParseTimeseriesCsv(std::string_view text) {
  const auto rows = ParseCsv(text);
  const std::vector<std::string> header = {"fuzzer", "target", "seed_config",
                                           "trial",  "time",   "cumulative_crashes"};
  if (rows.empty() || rows.front() != header) {
    throw std::invalid_argument("not a time-series CSV (bad header)");
  }
  std::vector<TimeseriesRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != header.size()) {
      throw std::invalid_argument(fmt::format("time-series row {} has {} fields", i, r.size()));
    }
    out.push_back({r[0], r[1], r[2], ParseNumber<std::uint32_t>(r[3], "trial"),
                   ParseNumber<double>(r[4], "time"),
                   ParseNumber<std::uint64_t>(r[5], "count")});
  }
  return out;
}

std::string EmitComparisonCsv(std::span<const campaign::ComparisonResult> results) {
  std::string out = "target,seed_config,time,median_a,median_b,p_value,a12\n";
  for (const auto& r : results) {
    out += Row({r.target_id, r.seed_config_id, fmt::format("{:.6f}", r.at_time),
                Number(r.median_a), Number(r.median_b), Sig(r.p_value), Sig(r.a12)});
  }
  return out;
}

std::string EmitComparisonTable(std::span<const campaign::ComparisonResult> results) {
  std::vector<std::array<std::string, 5>> cells;
  std::string a_name = "A";
  std::string b_name = "B";
  if (!results.empty()) {
    a_name = results.front().fuzzer_a;
    b_name = results.front().fuzzer_b;
  }
  cells.push_back({"target", "seed_config", "time", a_name, b_name + " (p)"});
  for (const auto& r : results) {
    cells.push_back({r.target_id, r.seed_config_id, fmt::format("{:.6f}", r.at_time),
                     Number(r.median_a),
                     fmt::format("{} ({:.4f})", Number(r.median_b), r.p_value)});
  }
  std::array<std::size_t, 5> width{};
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::string out;
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) line += "  ";
      line += fmt::format("{:<{}}", row[i], width[i]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
  }
  return out;
}

std::string EmitDedupCsv(const dedup::DedupTable& table) {
  std::string out = "bug,hashes,matches,false_matches,inputs\n";
  for (const auto& r : table.rows) {
    out += Row({r.label.ToString(), std::to_string(r.hashes), std::to_string(r.matches),
                std::to_string(r.false_matches), std::to_string(r.inputs)});
  }
  return out;
}

std::string EmitSvgPlot(const PlotSpec& spec) {
  if (spec.series.empty()) throw std::invalid_argument("plot needs at least one series");
  if (spec.width <= 0 || spec.height <= 0) {
    throw std::invalid_argument("plot dimensions must be positive");
  }
  double x_max = 0.0;
  double y_max = 0.0;
  for (const auto& s : spec.series) {
    const auto& b = s.band;
    const std::size_t n = b.grid.size();
    if (n == 0) throw std::invalid_argument("series '" + s.label + "' has an empty band");
    for (const auto* v : {&b.median, &b.min, &b.max, &b.ci_lo, &b.ci_hi}) {
      if (v->size() != n) {
        throw std::invalid_argument("series '" + s.label + "' has ragged band columns");
      }
      for (double y : *v) {
        if (!std::isfinite(y)) throw std::invalid_argument("non-finite band value");
        y_max = std::max(y_max, y);
      }
    }
    for (double x : b.grid) {
      if (!std::isfinite(x)) throw std::invalid_argument("non-finite grid time");
      x_max = std::max(x_max, x);
    }
  }
  if (x_max <= 0.0) x_max = 1.0;
  if (y_max <= 0.0) y_max = 1.0;

  const double w = spec.width;
  const double h = spec.height;
  const double left = 60.0, right = 20.0, top = 40.0;
  const double bottom = 50.0 + 18.0 * static_cast<double>(spec.series.size());
  const double pw = std::max(1.0, w - left - right);
  const double ph = std::max(1.0, h - top - bottom);
  auto px = [&](double x) { return left + pw * x / x_max; };
  auto py = [&](double y) { return top + ph * (1.0 - y / y_max); };

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" "
      "viewBox=\"0 0 {} {}\">\n",
      spec.width, spec.height, spec.width, spec.height);
  out += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n",
                     spec.width, spec.height);
  out += fmt::format(
      "<text x=\"{:.2f}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
      w / 2.0, Xml(spec.title));

  // Axes with a handful of ticks.
  const double x0 = px(0.0), y0 = py(0.0);
  out += fmt::format(
      "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"black\"/>\n", x0,
      y0, px(x_max), y0);
  out += fmt::format(
      "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"black\"/>\n", x0,
      y0, x0, py(y_max));
  constexpr int kTicks = 4;
  for (int i = 0; i <= kTicks; ++i) {
    const double xv = x_max * i / kTicks;
    const double yv = y_max * i / kTicks;
    out += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"black\"/>\n",
        px(xv), y0, y0 + 4.0);
    out += fmt::format(
        "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\" font-size=\"11\">{:g}</text>\n",
        px(xv), y0 + 16.0, xv);
    out += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"black\"/>\n",
        x0 - 4.0, py(yv), x0);
    out += fmt::format(
        "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\" font-size=\"11\">{:g}</text>\n",
        x0 - 6.0, py(yv) + 4.0, yv);
  }
  out += fmt::format(
      "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\" font-size=\"12\">{}</text>\n",
      left + pw / 2.0, y0 + 34.0, Xml(spec.x_label));
  out += fmt::format(
      "<text x=\"16\" y=\"{0:.2f}\" text-anchor=\"middle\" font-size=\"12\" "
      "transform=\"rotate(-90 16 {0:.2f})\">{1}</text>\n",
      top + ph / 2.0, Xml(spec.y_label));

  auto polyline = [&](const std::vector<double>& xs, const std::vector<double>& ys,
                      const std::string& color, bool dashed, std::string_view role) {
    std::string pts;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i > 0) pts += ' ';
      pts += fmt::format("{:.2f},{:.2f}", px(xs[i]), py(ys[i]));
    }
    out += fmt::format("<polyline class=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"{} "
                       "points=\"{}\"/>\n",
                       role, Xml(color), dashed ? "1" : "2",
                       dashed ? " stroke-dasharray=\"5,3\"" : "", pts);
  };
  for (const auto& s : spec.series) {
    const auto& b = s.band;
    polyline(b.grid, b.median, s.color, false, "median");
    polyline(b.grid, b.ci_lo, s.color, true, "ci_lo");
    polyline(b.grid, b.ci_hi, s.color, true, "ci_hi");
    polyline(b.grid, b.min, s.color, true, "min");
    polyline(b.grid, b.max, s.color, true, "max");
  }

  // Legend below the x-axis label.
  double ly = y0 + 50.0;
  for (const auto& s : spec.series) {
    out += fmt::format(
        "<rect class=\"legend\" x=\"{:.2f}\" y=\"{:.2f}\" width=\"12\" height=\"12\" "
        "fill=\"{}\"/>\n",
        left, ly - 10.0, Xml(s.color));
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"12\">{}</text>\n",
                       left + 18.0, ly, Xml(s.label));
    ly += 18.0;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace fuzzeval::report
