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

#include <gtest/gtest.h>

#include <set>

#include "fuzzeval/campaign/campaign.hpp"
#include "fuzzeval/errors.hpp"

namespace fuzzeval::campaign {
namespace {

FuzzerSpec Loop(core::Mode mode) {
  FuzzerSpec f;
  f.engine = Engine::kLoop;
  f.loop.mode = mode;
  return f;
}

FuzzerSpec Simulated(double rate, std::map<std::uint32_t, double> labels = {{0, 1.0}}) {
  FuzzerSpec f;
  f.engine = Engine::kSimulated;
  f.simulated.kind = StochasticProfile::Kind::kPoisson;
  f.simulated.rate = rate;
  f.simulated.label_distribution = std::move(labels);
  return f;
}

CampaignConfig SmallLoopCampaign() {
  CampaignConfig c;
  c.fuzzer_a = "grey";
  c.fuzzer_b = "black";
  c.fuzzers = {{"grey", Loop(core::Mode::kGreybox)}, {"black", Loop(core::Mode::kBlackbox)}};
  c.targets = {TargetSpec::BranchyCrash()};
  c.seed_configs = {SeedConfig{"empty", SeedKind::kEmpty, {}, {}}};
  c.trials = 3;
  c.deadline = 0.02;
  return c;
}

TEST(Config, Validation) {
  auto c = SmallLoopCampaign();
  EXPECT_NO_THROW(c.Validate());
  c.trials = 0;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = SmallLoopCampaign();
  c.deadline = 0.0;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = SmallLoopCampaign();
  c.workers = 0;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = SmallLoopCampaign();
  c.checkpoints = {0.01, 0.005};
  EXPECT_THROW(c.Validate(), ConfigError);
  c.checkpoints = {0.01, 0.5};
  EXPECT_THROW(c.Validate(), ConfigError);
  c = SmallLoopCampaign();
  c.fuzzer_b = "missing";
  EXPECT_THROW(c.Validate(), ConfigError);
  c = SmallLoopCampaign();
  c.seed_configs.push_back(c.seed_configs.front());
  EXPECT_THROW(c.Validate(), ConfigError);
  c = SmallLoopCampaign();
  c.seed_configs.front().literals = {ToBytes("x")};
  EXPECT_THROW(c.Validate(), ConfigError);
}

TEST(Config, DefaultCheckpoints) {
  auto c = SmallLoopCampaign();
  c.deadline = 24.0;
  EXPECT_EQ(c.EffectiveCheckpoints(), (std::vector<double>{6.0, 12.0, 24.0}));
  c.checkpoints = {1.0};
  EXPECT_EQ(c.EffectiveCheckpoints(), (std::vector<double>{1.0}));
}

TEST(Seeds, DerivationDependsOnEveryCoordinate) {
  const auto base = DeriveTrialSeed(7, "a", "t", "s", 0);
  EXPECT_EQ(base, DeriveTrialSeed(7, "a", "t", "s", 0));
  EXPECT_NE(base, DeriveTrialSeed(8, "a", "t", "s", 0));
  EXPECT_NE(base, DeriveTrialSeed(7, "b", "t", "s", 0));
  EXPECT_NE(base, DeriveTrialSeed(7, "a", "u", "s", 0));
  EXPECT_NE(base, DeriveTrialSeed(7, "a", "t", "r", 0));
  EXPECT_NE(base, DeriveTrialSeed(7, "a", "t", "s", 1));
  // Field boundaries are unambiguous.
  EXPECT_NE(DeriveTrialSeed(7, "ab", "c", "s", 0), DeriveTrialSeed(7, "a", "bc", "s", 0));
}

TEST(Campaign, CardinalityAndKeys) {
  const auto r = RunCampaign(SmallLoopCampaign());
  ASSERT_EQ(r.trials.size(), 6u);
  std::set<CellKey> keys;
  for (const auto& t : r.trials) keys.insert(KeyOf(t));
  EXPECT_EQ(keys.size(), 6u);
  EXPECT_EQ(r.Collection("grey", "branchy-crash", "empty").size(), 3u);
}

TEST(Campaign, WorkerCountDoesNotChangeResults) {
  auto c = SmallLoopCampaign();
  c.targets.push_back(TargetSpec::Versioned(0));
  c.workers = 1;
  const auto one = RunCampaign(c);
  c.workers = 8;
  const auto eight = RunCampaign(c);
  ASSERT_EQ(one.trials.size(), eight.trials.size());
  for (std::size_t i = 0; i < one.trials.size(); ++i) {
    EXPECT_TRUE(one.trials[i].SameResults(eight.trials[i])) << KeyOf(one.trials[i]).ToString();
  }
}

TEST(Campaign, SinkSeesEveryTrial) {
  auto c = SmallLoopCampaign();
  c.workers = 4;
  std::size_t seen = 0;
  RunCampaign(c, [&](const TrialRecord&) { ++seen; });
  EXPECT_EQ(seen, 6u);
}

TEST(Campaign, FailingCellAbortsAfterPersistingEarlierTrials) {
  auto c = SmallLoopCampaign();
  c.targets.push_back(TargetSpec::External("/nonexistent/fuzz-target"));
  std::vector<CellKey> delivered;
  try {
    RunCampaign(c, [&](const TrialRecord& r) { delivered.push_back(KeyOf(r)); });
    FAIL() << "expected CampaignError";
  } catch (const CampaignError& e) {
    EXPECT_EQ(e.cell().target_id, "external-subprocess:/nonexistent/fuzz-target");
    EXPECT_NE(std::string(e.what()).find(e.cell().ToString()), std::string::npos);
  }
  // Trials are dispatched in cell order, so the branchy ones ran first.
  ASSERT_GE(delivered.size(), 3u);
  EXPECT_EQ(delivered.front().target_id, "branchy-crash");
}

TEST(Campaign, SimulatedFuzzersIgnoreTheTarget) {
  CampaignConfig c;
  c.fuzzer_a = "fast";
  c.fuzzer_b = "slow";
  c.fuzzers = {{"fast", Simulated(2.0)}, {"slow", Simulated(1.0)}};
  c.targets = {TargetSpec::BranchyCrash(), TargetSpec::SharedCrashPaths()};
  c.seed_configs = {SeedConfig{"none", SeedKind::kEmpty, {}, {}}};
  c.trials = 4;
  c.deadline = 10.0;
  const auto r = RunCampaign(c);
  ASSERT_EQ(r.trials.size(), 8u);
  for (const auto& t : r.trials) EXPECT_EQ(t.target_id, "simulated");
}

TrialRecord WithEvents(std::vector<double> times, double deadline = 10.0) {
  TrialRecord r;
  r.fuzzer_id = "f";
  r.target_id = "simulated";
  r.seed_config_id = "s";
  r.deadline = deadline;
  for (double t : times) {
    CrashEvent ev;
    ev.at = t;
    ev.trace = core::SyntheticTrace(0);
    ev.profile = core::SyntheticProfile(0);
    r.crashes.push_back(ev);
  }
  return r;
}

TEST(CrashCount, Examples) {
  const auto r = WithEvents({1, 2, 3});
  EXPECT_EQ(CrashCountAt(r, 2.0), 2u);
  EXPECT_EQ(CrashCountAt(r, 0.0), 0u);
  EXPECT_THROW(CrashCountAt(r, -0.1), std::invalid_argument);
  EXPECT_THROW(CrashCountAt(r, 10.5), std::invalid_argument);
  std::uint64_t prev = 0;
  for (double t = 0.0; t <= 10.0; t += 0.25) {
    const auto c = CrashCountAt(r, t);
    EXPECT_GE(c, prev);
    prev = c;
  }
}

TEST(CrashCount, CoverageDedupDropsDuplicateProfile) {
  auto r = WithEvents({1, 2, 2.5, 3});
  const Edge a{0, 1}, b{1, 2}, c{2, 3}, d{3, 4};
  r.crashes[0].profile = {a, b};
  r.crashes[1].profile = {a, b, c};
  r.crashes[2].profile = {a, b, c};  // duplicate of the event at 2
  r.crashes[3].profile = {a, b, c, d};
  EXPECT_EQ(MetricAt(r, 3.0, Metric::kCoverageUnique), 3.0);
  EXPECT_EQ(MetricAt(r, 3.0, Metric::kRaw), 4.0);
}

TEST(Metrics, ParseSpellings) {
  EXPECT_EQ(ParseMetric("raw"), Metric::kRaw);
  EXPECT_EQ(ParseMetric("coverage"), Metric::kCoverageUnique);
  EXPECT_EQ(ParseMetric("cov-unique"), Metric::kCoverageUnique);
  EXPECT_EQ(ParseMetric("stackhash"), Metric::kStackHash);
  EXPECT_EQ(ParseMetric("groundtruth"), Metric::kGroundTruth);
  EXPECT_EQ(ParseMetric("ground-truth-bugs"), Metric::kGroundTruth);
  EXPECT_THROW(ParseMetric("fuzzy"), std::invalid_argument);
}

TEST(Metrics, GroundTruthOnBuiltInTargets) {
  auto r = WithEvents({1});
  r.target_id = "versioned-family@0";
  r.crashes[0].input = ToBytes("C!1");
  EXPECT_EQ(DefaultLabeler()(r, r.crashes[0]), dedup::BugLabel::FixedBy(5));
  r.target_id = "branchy-crash";
  r.crashes[0].input = ToBytes("q");
  EXPECT_EQ(DefaultLabeler()(r, r.crashes[0]), dedup::BugLabel::FixedBy(1));
  r.target_id = "external-subprocess:/bin/false";
  EXPECT_EQ(DefaultLabeler()(r, r.crashes[0]), dedup::BugLabel::Unknown());
}

TEST(Compare, CampaignExample) {
  std::vector<TrialRecord> a, b;
  for (int n : {10, 12, 14}) a.push_back(WithEvents(std::vector<double>(n, 1.0)));
  for (int n : {1, 2, 3}) b.push_back(WithEvents(std::vector<double>(n, 1.0)));
  const auto r = Compare(a, b, 10.0, Metric::kRaw);
  EXPECT_EQ(r.median_a, 12.0);
  EXPECT_EQ(r.median_b, 2.0);
  EXPECT_NEAR(r.p_value, 0.1, 1e-12);
  EXPECT_EQ(r.a12, 1.0);
  EXPECT_EQ(r.n_a, 3u);
  EXPECT_LE(r.ci_a.first, r.median_a);
  EXPECT_GE(r.ci_a.second, r.median_a);
  const auto self = Compare(a, a, 10.0, Metric::kRaw);
  EXPECT_EQ(self.p_value, 1.0);
  EXPECT_EQ(self.a12, 0.5);
  const auto swapped = Compare(b, a, 10.0, Metric::kRaw);
  EXPECT_EQ(swapped.p_value, r.p_value);
  EXPECT_NEAR(swapped.a12 + r.a12, 1.0, 1e-12);
}

TEST(Compare, GroundTruthOnSyntheticLabels) {
  std::vector<TrialRecord> a, b;
  for (int i = 0; i < 5; ++i) {
    for (auto* side : {&a, &b}) {
      auto r = WithEvents({1, 2, 3, 4});
      for (std::uint32_t k = 0; k < 4; ++k) {
        const std::uint32_t label = k % 3;
        r.crashes[k].trace = core::SyntheticTrace(label);
        r.crashes[k].profile = core::SyntheticProfile(label);
      }
      side->push_back(r);
    }
  }
  const auto r = Compare(a, b, 10.0, Metric::kGroundTruth);
  EXPECT_EQ(r.median_a, 3.0);
  EXPECT_EQ(r.median_b, 3.0);
  EXPECT_EQ(r.p_value, 1.0);
}

TEST(Compare, MismatchedCellsAreRejected) {
  std::vector<TrialRecord> a = {WithEvents({1})};
  std::vector<TrialRecord> b = {WithEvents({1})};
  b[0].seed_config_id = "other";
  EXPECT_THROW(Compare(a, b, 1.0, Metric::kRaw), std::invalid_argument);
  EXPECT_THROW(Compare({}, b, 1.0, Metric::kRaw), std::invalid_argument);
}

}  // namespace
}  // namespace fuzzeval::campaign
