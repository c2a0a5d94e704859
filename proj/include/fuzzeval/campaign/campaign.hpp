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

// Multi-trial A-vs-B campaigns and their pairwise comparison.
//
// A campaign runs every (fuzzer, target, seed config) cell `trials` times.
// Each trial's RNG seed is derived from the master seed and the cell
// coordinates only, so results do not depend on worker count or on the
// order in which trials finish.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fuzzeval/core/fuzzer.hpp"
#include "fuzzeval/core/types.hpp"
#include "fuzzeval/dedup/dedup.hpp"
#include "fuzzeval/stats/stats.hpp"

namespace fuzzeval::campaign {

enum class Engine { kLoop, kSimulated };

struct FuzzerSpec {
  Engine engine = Engine::kLoop;
  core::FuzzerConfig loop;       // kLoop; seeds come from the campaign cell
  StochasticProfile simulated;   // kSimulated
};

// Desk-scale stand-in for a 24 hour trial: one second per hour.
inline constexpr double kDefaultDeadline = 24.0;
inline constexpr std::uint32_t kDefaultTrials = 30;

struct CampaignConfig {
  std::string fuzzer_a;
  std::string fuzzer_b;
  std::map<std::string, FuzzerSpec> fuzzers;
  std::vector<TargetSpec> targets;
  std::vector<SeedConfig> seed_configs;
  std::uint32_t trials = kDefaultTrials;
  double deadline = kDefaultDeadline;
  std::uint32_t workers = 1;
  std::uint64_t master_rng_seed = 0;
  // Empty means {deadline/4, deadline/2, deadline}.
  std::vector<double> checkpoints;

  // Throws ConfigError describing the first violated invariant.
  void Validate() const;
  std::vector<double> EffectiveCheckpoints() const;
  // fuzzer_a, then fuzzer_b if different.
  std::vector<std::string> FuzzerIds() const;
};

struct CellKey {
  std::string fuzzer_id;
  std::string target_id;
  std::string seed_config_id;
  std::uint32_t trial_index = 0;

  auto operator<=>(const CellKey&) const = default;
  std::string ToString() const;
};

CellKey KeyOf(const TrialRecord& r);

// splitmix64 finalizer.
std::uint64_t Mix64(std::uint64_t x);

// Seed for one trial: FNV-1a over the three ids, each terminated by a zero
// byte, combined with the master seed and trial index through Mix64.
std::uint64_t DeriveTrialSeed(std::uint64_t master, std::string_view fuzzer_id,
                              std::string_view target_id,
                              std::string_view seed_config_id,
                              std::uint32_t trial_index);

struct CampaignResult {
  std::vector<TrialRecord> trials;  // sorted by CellKey

  std::vector<TrialRecord> Collection(std::string_view fuzzer_id,
                                      std::string_view target_id,
                                      std::string_view seed_config_id) const;
};

// Raised when any trial fails; completed trials were already delivered to
// the sink.
class CampaignError : public std::runtime_error {
 public:
  CampaignError(CellKey cell, const std::string& what)
      : std::runtime_error("trial " + cell.ToString() + " failed: " + what),
        cell_(std::move(cell)) {}
  const CellKey& cell() const { return cell_; }

 private:
  CellKey cell_;
};

// Called once per finished trial, serialized across workers.
using TrialSink = std::function<void(const TrialRecord&)>;

// Runs one cell's trial.
TrialRecord RunTrial(const CampaignConfig& config, const std::string& fuzzer_id,
                     const TargetSpec& target, const SeedConfig& seeds,
                     std::uint32_t trial_index);

CampaignResult RunCampaign(const CampaignConfig& config, const TrialSink& sink = {});

// Number of crash events at or before t. Throws std::invalid_argument if t
// is outside [0, deadline].
std::uint64_t CrashCountAt(const TrialRecord& trial, double t);

enum class Metric { kRaw, kCoverageUnique, kStackHash, kGroundTruth };

std::string_view MetricName(Metric m);
// Accepts the CLI spellings: raw, coverage|cov-unique, stackhash,
// groundtruth|ground-truth-bugs.
Metric ParseMetric(std::string_view s);

using Labeler = std::function<dedup::BugLabel(const TrialRecord&, const CrashEvent&)>;

// Ground truth for every trial source: synthetic labels for simulated
// trials, replay across all versions for versioned-family, the planted
// bug for the single-bug toy targets (reported as fixed by version 1, the
// patched program) and unknown for external targets.
Labeler DefaultLabeler();

struct MetricOptions {
  std::size_t frames = dedup::kDefaultStackFrames;
  Labeler labeler;  // empty: DefaultLabeler()
};

// Metric value of one trial at time t: raw crash count, AFL-unique
// crashes, distinct stack hashes, or distinct ground-truth bugs (unknown
// labels excluded).
double MetricAt(const TrialRecord& trial, double t, Metric metric,
                const MetricOptions& options = {});

struct ComparisonResult {
  std::string target_id;
  std::string seed_config_id;
  std::string fuzzer_a;
  std::string fuzzer_b;
  Metric metric = Metric::kRaw;
  double at_time = 0.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  double median_a = 0.0;
  double median_b = 0.0;
  std::pair<double, double> ci_a;
  std::pair<double, double> ci_b;
  double u_statistic = 0.0;
  double p_value = 1.0;
  double a12 = 0.5;
  stats::Method method = stats::Method::kExact;
};

// Compares per-trial metric values at time t with the Mann-Whitney U test.
// Throws std::invalid_argument on empty collections or when the two sides
// differ in target or seed config.
ComparisonResult Compare(std::span<const TrialRecord> trials_a,
                         std::span<const TrialRecord> trials_b, double t,
                         Metric metric, const MetricOptions& options = {},
                         double level = 0.95);

// Compare for already-computed per-trial values.
ComparisonResult CompareValues(std::span<const double> a, std::span<const double> b,
                               double level = 0.95);

}  // namespace fuzzeval::campaign
