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

// Nonparametric statistics for comparing fuzzers across trials.
//
// All tests are two-sided. Samples are per-trial outcomes (crash or bug
// counts); nothing here assumes a distribution shape.

#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace fuzzeval::stats {

// Exact enumeration is used while the number of distinct labelings
// C(n+m, n) stays at or below this.
inline constexpr double kExactLabelingLimit = 200000.0;

enum class Method { kExact, kNormalApproximation, kMonteCarlo };

// How to compute a p-value. kAuto picks exact enumeration under
// kExactLabelingLimit and the approximate method above it.
enum class MethodChoice { kAuto, kExact, kApproximate };

struct TestResult {
  double u_statistic = 0.0;  // U of the first sample, midranks for ties
  double p_value = 1.0;
  Method method = Method::kExact;
  double a12 = 0.5;
};

// Number of ways to choose k of n, as a double (inf on overflow).
double Binomial(std::size_t n, std::size_t k);

double Median(std::span<const double> values);

// Mann-Whitney U test. Throws std::invalid_argument on an empty sample.
TestResult MannWhitneyU(std::span<const double> a, std::span<const double> b,
                        MethodChoice choice = MethodChoice::kAuto);

// Probability that a draw from `a` exceeds one from `b`, ties counting
// one half.
double VarghaDelaneyA12(std::span<const double> a, std::span<const double> b);

struct MedianInterval {
  double median = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double achieved_level = 1.0;
  std::size_t lo_rank = 1;  // 1-based order statistics
  std::size_t hi_rank = 1;
  bool below_nominal = false;
};

// Distribution-free interval from order statistics (k, n+1-k), with the
// largest k whose binomial(n, 1/2) coverage reaches `level`. Samples too
// small for the level get ranks (1, n) and below_nominal = true.
MedianInterval MedianCi(std::span<const double> sample, double level = 0.95);

struct PermutationResult {
  double p_value = 1.0;
  Method method = Method::kExact;
};

// Permutation test on |median(a) - median(b)|. Exact when the labelings
// fit kExactLabelingLimit (or when forced); otherwise Monte-Carlo with
// add-one smoothing. Monte-Carlo requires iterations >= 100.
PermutationResult PermutationTestMedian(std::span<const double> a,
                                        std::span<const double> b,
                                        std::uint64_t iterations,
                                        std::uint64_t rng_seed,
                                        MethodChoice choice = MethodChoice::kAuto);

struct SeriesPoint {
  double time = 0.0;
  double count = 0.0;
  bool operator==(const SeriesPoint&) const = default;
};

// Cumulative crash count over time. Starts at time 0; times strictly
// increase; counts are non-decreasing integers. The first count is 0
// unless crashes were recorded at time 0 itself.
class CrashTimeSeries {
 public:
  CrashTimeSeries() : points_{{0.0, 0.0}} {}
  // Throws std::invalid_argument if the invariants above do not hold.
  explicit CrashTimeSeries(std::vector<SeriesPoint> points);

  // Series from sorted crash times. When sample_interval > 0, the count is
  // also observed every sample_interval seconds up to `horizon`, the way a
  // fuzzer logs its progress periodically; these points carry the current
  // count unchanged.
  static CrashTimeSeries FromEvents(std::span<const double> crash_times,
                                    double sample_interval = 0.0,
                                    double horizon = 0.0);

  const std::vector<SeriesPoint>& points() const { return points_; }

  // Step-function count at time t (events at exactly t included).
  double CountAt(double t) const;

 private:
  std::vector<SeriesPoint> points_;
};

// Area under the cumulative count in crash-seconds: trapezoids over the
// piecewise-linear curve through the points, held flat after the last
// point up to `horizon`, clipped at `horizon`.
double CrashAuc(const CrashTimeSeries& series, double horizon);

struct Band {
  std::vector<double> grid;
  std::vector<double> median;
  std::vector<double> min;
  std::vector<double> max;
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;
};

// Per-grid-time summary across trials, using step semantics.
Band AggregateBand(std::span<const CrashTimeSeries> trials,
                   std::span<const double> grid, double level = 0.95);

}  // namespace fuzzeval::stats
