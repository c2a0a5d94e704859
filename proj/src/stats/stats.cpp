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

#include "fuzzeval/stats/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>
#include <stdexcept>

#include "fuzzeval/simd/kernels.hpp"

namespace fuzzeval::stats {
namespace {

void RequireNonEmpty(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("statistical test needs two non-empty samples");
  }
}

// Midranks of the pooled sample, doubled so they are integers.
std::vector<std::int64_t> DoubledMidranks(std::span<const double> pooled,
                                          double* tie_term) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return pooled[x] < pooled[y]; });
  std::vector<std::int64_t> ranks(n);
  double ties = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    // ranks i+1 .. j+1 share (i+1 + j+1)/2; doubled: i + j + 2
    const auto doubled = static_cast<std::int64_t>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = doubled;
    const double t = static_cast<double>(j - i + 1);
    ties += t * t * t - t;
    i = j + 1;
  }
  if (tie_term != nullptr) *tie_term = ties;
  return ranks;
}

// Number of subsets of size k, by doubled rank sum. counts[s] = number of
// k-subsets of `ranks` whose doubled ranks sum to s.
std::vector<double> SubsetSumCounts(std::span<const std::int64_t> ranks,
                                    std::size_t k) {
  const auto max_sum = static_cast<std::size_t>(
      std::accumulate(ranks.begin(), ranks.end(), std::int64_t{0}));
  if (k == 1) {
    std::vector<double> counts(max_sum + 1, 0.0);
    for (auto r : ranks) counts[static_cast<std::size_t>(r)] += 1.0;
    return counts;
  }
  // rows[j][s]: subsets of size j with sum s, over the items seen so far
  std::vector<std::vector<double>> rows(k + 1, std::vector<double>(max_sum + 1, 0.0));
  rows[0][0] = 1.0;
  std::size_t reach = 0;  // largest sum reachable so far
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    const auto r = static_cast<std::size_t>(ranks[i]);
    const std::size_t top = std::min(k, i + 1);
    for (std::size_t j = top; j >= 1; --j) {
      // rows[j][s + r] += rows[j-1][s] for s in [0, reach]
      simd::Accumulate(std::span<double>(rows[j]).subspan(r, reach + 1),
                       std::span<const double>(rows[j - 1]).first(reach + 1));
    }
    reach = std::min(max_sum, reach + r);
  }
  return std::move(rows[k]);
}

double NormalTwoSidedP(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

}  // namespace

double Binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
    if (!std::isfinite(c)) return c;
  }
  return std::round(c);
}

double Median(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

TestResult MannWhitneyU(std::span<const double> a, std::span<const double> b,
                        MethodChoice choice) {
  RequireNonEmpty(a, b);
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  double tie_term = 0.0;
  const auto ranks = DoubledMidranks(pooled, &tie_term);

  const std::int64_t doubled_rank_sum_a =
      std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(n),
                      std::int64_t{0});
  const auto nn = static_cast<std::int64_t>(n);
  const auto nm = static_cast<std::int64_t>(n * m);
  // 2U = 2R - n(n+1)
  const std::int64_t doubled_u = doubled_rank_sum_a - nn * (nn + 1);

  TestResult result;
  result.u_statistic = static_cast<double>(doubled_u) / 2.0;
  result.a12 = result.u_statistic / static_cast<double>(n * m);

  const bool exact = choice == MethodChoice::kExact ||
      (choice == MethodChoice::kAuto && Binomial(n + m, n) <= kExactLabelingLimit);
  if (exact) {
    // Enumerate labelings through the smaller group's rank-sum
    // distribution. |2U - nm| is symmetric between the groups.
    const bool a_smaller = n <= m;
    const std::size_t k = a_smaller ? n : m;
    const auto kk = static_cast<std::int64_t>(k);
    const auto counts = SubsetSumCounts(ranks, k);
    const std::int64_t observed = std::abs(doubled_u - nm);
    double extreme = 0.0;
    double total = 0.0;
    for (std::size_t s = 0; s < counts.size(); ++s) {
      if (counts[s] == 0.0) continue;
      const std::int64_t du = static_cast<std::int64_t>(s) - kk * (kk + 1);
      total += counts[s];
      if (std::abs(du - nm) >= observed) extreme += counts[s];
    }
    result.method = Method::kExact;
    result.p_value = std::clamp(extreme / total, 0.0, 1.0);
    return result;
  }

  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  const double big_n = nd + md;
  const double mean = nd * md / 2.0;
  const double var =
      nd * md / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
  result.method = Method::kNormalApproximation;
  if (!(var > 0.0)) {
    result.p_value = 1.0;
    return result;
  }
  const double dev = std::max(0.0, std::abs(result.u_statistic - mean) - 0.5);
  result.p_value = std::clamp(NormalTwoSidedP(dev / std::sqrt(var)), 0.0, 1.0);
  return result;
}

double VarghaDelaneyA12(std::span<const double> a, std::span<const double> b) {
  RequireNonEmpty(a, b);
  double wins = 0.0;
  for (double x : a) {
    const auto c = simd::CountLessEqual(b, x);
    wins += static_cast<double>(c.less) + 0.5 * static_cast<double>(c.equal);
  }
  return wins / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

MedianInterval MedianCi(std::span<const double> sample, double level) {
  if (sample.empty()) throw std::invalid_argument("median CI of an empty sample");
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("confidence level must be in (0, 1)");
  }
  std::vector<double> v(sample.begin(), sample.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();

  // tail[j] = P(X <= j) for X ~ Binomial(n, 1/2)
  const double nd = static_cast<double>(n);
  const double log_half_n = nd * std::log(0.5);
  auto coverage = [&](std::size_t k) {
    double tail = 0.0;
    for (std::size_t i = 0; i + 1 <= k; ++i) {
      const double id = static_cast<double>(i);
      tail += std::exp(std::lgamma(nd + 1) - std::lgamma(id + 1) -
                       std::lgamma(nd - id + 1) + log_half_n);
    }
    return std::clamp(1.0 - 2.0 * tail, 0.0, 1.0);
  };

  MedianInterval out;
  out.median = Median(v);
  std::size_t k = 1;
  double achieved = coverage(1);
  if (achieved < level) {
    out.below_nominal = true;
  } else {
    for (std::size_t cand = 2; cand <= (n + 1) / 2; ++cand) {
      const double c = coverage(cand);
      if (c < level) break;
      k = cand;
      achieved = c;
    }
  }
  out.lo_rank = k;
  out.hi_rank = n + 1 - k;
  out.lo = v[out.lo_rank - 1];
  out.hi = v[out.hi_rank - 1];
  out.achieved_level = achieved;
  if (v.front() == v.back()) {
    // all values equal: the interval [c, c] cannot miss
    out.achieved_level = 1.0;
    out.below_nominal = false;
  }
  return out;
}

PermutationResult PermutationTestMedian(std::span<const double> a,
                                        std::span<const double> b,
                                        std::uint64_t iterations,
                                        std::uint64_t rng_seed,
                                        MethodChoice choice) {
  RequireNonEmpty(a, b);
  const std::size_t n = a.size();
  const std::size_t total = n + b.size();
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const double observed = std::abs(Median(a) - Median(b));
  const double tol = 1e-12 * std::max(1.0, observed);

  std::vector<double> left(n);
  std::vector<double> right(total - n);
  auto statistic = [&]() { return std::abs(Median(left) - Median(right)); };

  const bool exact = choice == MethodChoice::kExact ||
      (choice == MethodChoice::kAuto && Binomial(total, n) <= kExactLabelingLimit);
  PermutationResult out;
  if (exact) {
    // Walk all n-subsets as a selection mask in lexicographic order.
    std::vector<char> mask(total, 0);
    std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(n), 1);
    std::uint64_t extreme = 0;
    std::uint64_t count = 0;
    do {
      std::size_t li = 0, ri = 0;
      for (std::size_t i = 0; i < total; ++i) {
        (mask[i] ? left[li++] : right[ri++]) = pooled[i];
      }
      ++count;
      if (statistic() >= observed - tol) ++extreme;
    } while (std::prev_permutation(mask.begin(), mask.end()));
    out.method = Method::kExact;
    out.p_value = static_cast<double>(extreme) / static_cast<double>(count);
    return out;
  }

  if (iterations < 100) {
    throw std::invalid_argument("Monte-Carlo permutation test needs >= 100 iterations");
  }
  std::mt19937_64 rng(rng_seed);
  std::vector<double> shuffled = pooled;
  std::uint64_t extreme = 0;
  for (std::uint64_t it = 0; it < iterations; ++it) {
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::copy_n(shuffled.begin(), n, left.begin());
    std::copy(shuffled.begin() + static_cast<std::ptrdiff_t>(n), shuffled.end(),
              right.begin());
    if (statistic() >= observed - tol) ++extreme;
  }
  out.method = Method::kMonteCarlo;
  out.p_value = static_cast<double>(1 + extreme) / static_cast<double>(1 + iterations);
  return out;
}

CrashTimeSeries::CrashTimeSeries(std::vector<SeriesPoint> points)
    : points_(std::move(points)) {
  if (points_.empty() || points_.front().time != 0.0) {
    throw std::invalid_argument("crash series must start at time 0");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    if (p.count < 0.0 || p.count != std::floor(p.count)) {
      throw std::invalid_argument("crash counts must be non-negative integers");
    }
    if (i > 0) {
      if (!(p.time > points_[i - 1].time)) {
        throw std::invalid_argument("crash series times must strictly increase");
      }
      if (p.count < points_[i - 1].count) {
        throw std::invalid_argument("crash counts must not decrease");
      }
    }
  }
}

CrashTimeSeries CrashTimeSeries::FromEvents(std::span<const double> crash_times,
                                            double sample_interval,
                                            double horizon) {
  if (!std::is_sorted(crash_times.begin(), crash_times.end())) {
    throw std::invalid_argument("crash times must be sorted");
  }
  if (!crash_times.empty() && crash_times.front() < 0.0) {
    throw std::invalid_argument("crash times must be >= 0");
  }
  std::vector<double> times;
  times.push_back(0.0);
  if (sample_interval > 0.0) {
    for (std::size_t k = 1;; ++k) {
      const double t = static_cast<double>(k) * sample_interval;
      if (t > horizon) break;
      times.push_back(t);
    }
  }
  times.insert(times.end(), crash_times.begin(), crash_times.end());
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  std::vector<SeriesPoint> points;
  points.reserve(times.size());
  std::size_t seen = 0;
  for (double t : times) {
    while (seen < crash_times.size() && crash_times[seen] <= t) ++seen;
    points.push_back({t, static_cast<double>(seen)});
  }
  return CrashTimeSeries(std::move(points));
}

double CrashTimeSeries::CountAt(double t) const {
  auto it = std::upper_bound(points_.begin(), points_.end(), t,
                             [](double v, const SeriesPoint& p) { return v < p.time; });
  if (it == points_.begin()) return 0.0;
  return std::prev(it)->count;
}

double CrashAuc(const CrashTimeSeries& series, double horizon) {
  if (horizon < 0.0) throw std::invalid_argument("AUC horizon must be >= 0");
  const auto& pts = series.points();
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const SeriesPoint& p0 = pts[i - 1];
    const SeriesPoint& p1 = pts[i];
    if (p0.time >= horizon) return area;
    if (p1.time > horizon) {
      const double frac = (horizon - p0.time) / (p1.time - p0.time);
      const double c = p0.count + frac * (p1.count - p0.count);
      return area + 0.5 * (p0.count + c) * (horizon - p0.time);
    }
    area += 0.5 * (p0.count + p1.count) * (p1.time - p0.time);
  }
  const SeriesPoint& last = pts.back();
  if (horizon > last.time) area += last.count * (horizon - last.time);
  return area;
}

Band AggregateBand(std::span<const CrashTimeSeries> trials,
                   std::span<const double> grid, double level) {
  if (trials.empty()) throw std::invalid_argument("band needs at least one trial");
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw std::invalid_argument("band grid must be sorted");
  }
  Band band;
  band.grid.assign(grid.begin(), grid.end());
  std::vector<double> values(trials.size());
  for (double t : grid) {
    for (std::size_t i = 0; i < trials.size(); ++i) values[i] = trials[i].CountAt(t);
    const auto ci = MedianCi(values, level);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    band.median.push_back(ci.median);
    band.min.push_back(*lo);
    band.max.push_back(*hi);
    band.ci_lo.push_back(ci.lo);
    band.ci_hi.push_back(ci.hi);
  }
  return band;
}

}  // namespace fuzzeval::stats
