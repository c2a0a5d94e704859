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

// CSV tables and SVG plots. All emitters are pure functions of their
// inputs, so identical inputs give byte-identical text.
//
// CSV follows RFC 4180 (header row, comma delimiter, quoted fields where
// needed) with LF line endings. Times are decimal seconds.

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fuzzeval/campaign/campaign.hpp"
#include "fuzzeval/dedup/dedup.hpp"
#include "fuzzeval/stats/stats.hpp"

namespace fuzzeval::report {

// Quotes a field if it contains a comma, quote or line break.
std::string CsvField(std::string_view s);

// Splits CSV text into rows of fields. Throws std::invalid_argument on
// unterminated quotes.
std::vector<std::vector<std::string>> ParseCsv(std::string_view text);

// fuzzer,target,seed_config,trial,time,cumulative_crashes
// One (0.0, 0) row per trial then one row per crash event; rows sorted by
// cell key then time. Times have six decimals.
std::string EmitTimeseriesCsv(std::span<const TrialRecord> trials);

struct TimeseriesRow {
  std::string fuzzer;
  std::string target;
  std::string seed_config;
  std::uint32_t trial = 0;
  double time = 0.0;
  std::uint64_t cumulative_crashes = 0;
};

// Inverse of EmitTimeseriesCsv. Throws std::invalid_argument on a bad
// header or malformed row.
std::vector<TimeseriesRow> ParseTimeseriesCsv(std::string_view text);

// target,seed_config,time,median_a,median_b,p_value,a12
std::string EmitComparisonCsv(std::span<const campaign::ComparisonResult> results);

// Human-readable variant with aligned columns: both medians, then the
// p-value in parentheses, e.g.
//   branchy-crash  empty  24.000000  12  2 (0.1000)
std::string EmitComparisonTable(std::span<const campaign::ComparisonResult> results);

// bug,hashes,matches,false_matches,inputs
std::string EmitDedupCsv(const dedup::DedupTable& table);

struct PlotSeries {
  std::string label;
  stats::Band band;
  std::string color = "#1f77b4";
};

struct PlotSpec {
  std::string title;
  std::vector<PlotSeries> series;
  std::string x_label = "time (s)";
  std::string y_label = "crashes";
  int width = 640;
  int height = 400;
};

// SVG 1.1 using polyline, line, text and rect only. Per series: a solid
// median polyline and dashed ci_lo, ci_hi, min and max polylines, plus a
// legend entry. Throws std::invalid_argument on an invalid spec or an
// empty band.
std::string EmitSvgPlot(const PlotSpec& spec);

}  // namespace fuzzeval::report
