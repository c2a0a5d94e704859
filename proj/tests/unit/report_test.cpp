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

#include <gtest/gtest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <random>
#include <set>
#include <sstream>

namespace fuzzeval::report {
namespace {

namespace pt = boost::property_tree;

TrialRecord Trial(std::string fuzzer, std::uint32_t index, std::vector<double> times) {
  TrialRecord r;
  r.fuzzer_id = std::move(fuzzer);
  r.target_id = "branchy-crash";
  r.seed_config_id = "empty";
  r.trial_index = index;
  r.deadline = 10.0;
  for (double t : times) {
    CrashEvent ev;
    ev.at = t;
    r.crashes.push_back(ev);
  }
  return r;
}

TEST(Csv, QuotingAndParsing) {
  EXPECT_EQ(CsvField("plain"), "plain");
  EXPECT_EQ(CsvField("a,b"), "\"a,b\"");
  EXPECT_EQ(CsvField("say \"hi\""), "\"say \"\"hi\"\"\"");
  const auto rows = ParseCsv("x,\"a,b\",\"q\"\"\"\n1,2,3\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"x", "a,b", "q\""}));
  EXPECT_THROW(ParseCsv("\"open\n"), std::invalid_argument);
}

TEST(Timeseries, Example) {
  const std::vector<TrialRecord> trials = {Trial("b", 0, {}), Trial("a", 0, {0.5, 1.25})};
  EXPECT_EQ(EmitTimeseriesCsv(trials),
            "fuzzer,target,seed_config,trial,time,cumulative_crashes\n"
            "a,branchy-crash,empty,0,0.000000,0\n"
            "a,branchy-crash,empty,0,0.500000,1\n"
            "a,branchy-crash,empty,0,1.250000,2\n"
            "b,branchy-crash,empty,0,0.000000,0\n");
}

TEST(Timeseries, RoundTripProperty) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> when(0.0, 10.0);
  for (int c = 0; c < 1000; ++c) {
    std::vector<TrialRecord> trials;
    const int n = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < n; ++i) {
      std::vector<double> times(rng() % 6);
      for (auto& t : times) t = std::round(when(rng) * 1e6) / 1e6;
      std::sort(times.begin(), times.end());
      trials.push_back(Trial(rng() % 2 ? "f,1" : "g", static_cast<std::uint32_t>(i), times));
    }
    const auto rows = ParseTimeseriesCsv(EmitTimeseriesCsv(trials));
    std::size_t expected = 0;
    for (const auto& t : trials) expected += 1 + t.crashes.size();
    ASSERT_EQ(rows.size(), expected);
    // Each trial's counts climb by one from zero.
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].cumulative_crashes == 0) {
        ASSERT_EQ(rows[i].time, 0.0);
      } else {
        ASSERT_EQ(rows[i].cumulative_crashes, rows[i - 1].cumulative_crashes + 1);
        ASSERT_GE(rows[i].time, rows[i - 1].time);
      }
    }
  }
  EXPECT_THROW(ParseTimeseriesCsv("wrong,header\n"), std::invalid_argument);
}

campaign::ComparisonResult Cmp() {
  campaign::ComparisonResult r;
  r.target_id = "branchy-crash";
  r.seed_config_id = "empty";
  r.fuzzer_a = "greybox";
  r.fuzzer_b = "blackbox";
  r.at_time = 24.0;
  r.median_a = 12;
  r.median_b = 2;
  r.p_value = 0.1;
  r.a12 = 1.0;
  return r;
}

TEST(Comparison, CsvRow) {
  const std::vector<campaign::ComparisonResult> rs = {Cmp()};
  EXPECT_EQ(EmitComparisonCsv(rs),
            "target,seed_config,time,median_a,median_b,p_value,a12\n"
            "branchy-crash,empty,24.000000,12,2,0.100000,1.00000\n");
  EXPECT_EQ(EmitComparisonCsv({}), "target,seed_config,time,median_a,median_b,p_value,a12\n");
}

TEST(Comparison, PValueKeepsFourSignificantDigits) {
  auto r = Cmp();
  r.p_value = 0.000123456;
  r.median_a = 2.5;
  const std::vector<campaign::ComparisonResult> rs = {r};
  const auto rows = ParseCsv(EmitComparisonCsv(rs));
  EXPECT_EQ(rows[1][3], "2.5");
  EXPECT_NEAR(std::stod(rows[1][5]), 0.000123456, 5e-9);
}

TEST(Comparison, Table) {
  const std::vector<campaign::ComparisonResult> rs = {Cmp()};
  const auto text = EmitComparisonTable(rs);
  EXPECT_NE(text.find("greybox"), std::string::npos);
  EXPECT_NE(text.find("blackbox (p)"), std::string::npos);
  EXPECT_NE(text.find("2 (0.1000)"), std::string::npos);
  EXPECT_NE(text.find("24.000000"), std::string::npos);
}

TEST(Dedup, Csv) {
  const std::vector<dedup::BugLabel> labels = {dedup::BugLabel::FixedBy(1),
                                               dedup::BugLabel::FixedBy(1),
                                               dedup::BugLabel::FixedBy(2)};
  const std::vector<dedup::HashId> hashes = {dedup::HashId::FromKey("x"),
                                             dedup::HashId::FromKey("y"),
                                             dedup::HashId::FromKey("y")};
  EXPECT_EQ(EmitDedupCsv(dedup::DedupReport(labels, hashes)),
            "bug,hashes,matches,false_matches,inputs\n"
            "fixed@1,2,1,1,2\n"
            "fixed@2,1,0,1,1\n");
}

stats::Band Ramp(double scale) {
  stats::Band b;
  for (int i = 0; i <= 10; ++i) {
    const double v = scale * i;
    b.grid.push_back(i);
    b.median.push_back(v);
    b.min.push_back(v - 1);
    b.max.push_back(v + 2);
    b.ci_lo.push_back(v - 0.5);
    b.ci_hi.push_back(v + 1);
  }
  return b;
}

pt::ptree ParseSvg(const std::string& svg) {
  std::istringstream in(svg);
  pt::ptree tree;
  pt::read_xml(in, tree);
  return tree;
}

// Element names anywhere in the tree; attribute nodes are skipped.
void Collect(const pt::ptree& node, std::multiset<std::string>& tags) {
  for (const auto& [tag, child] : node) {
    if (tag == "<xmlattr>" || tag == "<xmlcomment>") continue;
    tags.insert(tag);
    Collect(child, tags);
  }
}

TEST(Svg, OneSeriesHasFivePolylines) {
  PlotSpec spec;
  spec.title = "branchy-crash <empty>";
  spec.series = {{"greybox", Ramp(1.0)}};
  const auto svg = EmitSvgPlot(spec);
  const auto tree = ParseSvg(svg);
  std::multiset<std::string> tags;
  Collect(tree, tags);
  EXPECT_EQ(tags.count("polyline"), 5u);
  for (const auto& t : tags) {
    EXPECT_TRUE(t == "svg" || t == "polyline" || t == "line" || t == "text" || t == "rect") << t;
  }
  EXPECT_NE(svg.find("&lt;empty&gt;"), std::string::npos);
}

TEST(Svg, TwoSeriesAndLegend) {
  PlotSpec spec;
  spec.title = "t";
  spec.series = {{"greybox", Ramp(1.0), "#1f77b4"}, {"blackbox", Ramp(0.5), "#ff7f0e"}};
  const auto svg = EmitSvgPlot(spec);
  std::multiset<std::string> tags;
  Collect(ParseSvg(svg), tags);
  EXPECT_EQ(tags.count("polyline"), 10u);
  EXPECT_NE(svg.find(">greybox</text>"), std::string::npos);
  EXPECT_NE(svg.find(">blackbox</text>"), std::string::npos);
  EXPECT_EQ(svg, EmitSvgPlot(spec));
}

TEST(Svg, InvalidSpecs) {
  PlotSpec spec;
  EXPECT_THROW(EmitSvgPlot(spec), std::invalid_argument);
  spec.series = {{"a", stats::Band{}}};
  EXPECT_THROW(EmitSvgPlot(spec), std::invalid_argument);
  spec.series = {{"a", Ramp(1.0)}};
  spec.series[0].band.max.pop_back();
  EXPECT_THROW(EmitSvgPlot(spec), std::invalid_argument);
  spec.series = {{"a", Ramp(1.0)}};
  spec.width = 0;
  EXPECT_THROW(EmitSvgPlot(spec), std::invalid_argument);
}

}  // namespace
}  // namespace fuzzeval::report
