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

#include "fuzzeval/campaign/campaign.hpp"

#include <pthread.h>
#include <sched.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <set>
#include <thread>

#include "fuzzeval/core/targets.hpp"
#include "fuzzeval/errors.hpp"

namespace fuzzeval::campaign {

void CampaignConfig::Validate() const {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (!(deadline > 0.0) || !std::isfinite(deadline)) {
    throw ConfigError("deadline must be > 0");
  }
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end())) {
    throw ConfigError("checkpoints must be sorted");
  }
  for (double c : checkpoints) {
    if (c < 0.0 || c > deadline) {
      throw ConfigError("checkpoint " + std::to_string(c) + " outside [0, deadline]");
    }
  }
  for (const auto& id : {fuzzer_a, fuzzer_b}) {
    if (!fuzzers.contains(id)) throw ConfigError("unknown fuzzer id '" + id + "'");
  }
  for (const auto& [id, spec] : fuzzers) {
    if (spec.engine == Engine::kSimulated) {
      try {
        spec.simulated.Validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError("fuzzer '" + id + "': " + e.what());
      }
    }
  }
  if (targets.empty()) throw ConfigError("campaign has no targets");
  std::set<std::string> target_ids;
  for (const auto& t : targets) {
    try {
      t.Validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (!target_ids.insert(t.Id()).second) {
      throw ConfigError("duplicate target " + t.Id());
    }
  }
  if (seed_configs.empty()) throw ConfigError("campaign has no seed configs");
  std::set<std::string> seed_ids;
  for (const auto& s : seed_configs) {
    if (s.id.empty()) throw ConfigError("seed config with empty id");
    if (!seed_ids.insert(s.id).second) throw ConfigError("duplicate seed config id " + s.id);
    if (s.kind == SeedKind::kEmpty && (!s.literals.empty() || !s.paths.empty())) {
      throw ConfigError("empty seed config '" + s.id + "' must not carry a payload");
    }
  }
}

std::vector<double> CampaignConfig::EffectiveCheckpoints() const {
  if (!checkpoints.empty()) return checkpoints;
  return {deadline / 4.0, deadline / 2.0, deadline};
}

std::vector<std::string> CampaignConfig::FuzzerIds() const {
  if (fuzzer_a == fuzzer_b) return {fuzzer_a};
  return {fuzzer_a, fuzzer_b};
}

std::string CellKey::ToString() const {
  return fuzzer_id + "/" + target_id + "/" + seed_config_id + "/#" +
         std::to_string(trial_index);
}

CellKey KeyOf(const TrialRecord& r) {
  return CellKey{r.fuzzer_id, r.target_id, r.seed_config_id, r.trial_index};
}

std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t DeriveTrialSeed(std::uint64_t master, std::string_view fuzzer_id,
                              std::string_view target_id,
                              std::string_view seed_config_id,
                              std::uint32_t trial_index) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a offset basis
  auto feed_byte = [&](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  auto feed = [&](std::string_view s) {
    for (unsigned char c : s) feed_byte(c);
    feed_byte(0);
  };
  feed(fuzzer_id);
  feed(target_id);
  feed(seed_config_id);
  return Mix64(Mix64(master ^ h) + trial_index);
}

std::vector<TrialRecord> CampaignResult::Collection(std::string_view fuzzer_id,
                                                    std::string_view target_id,
                                                    std::string_view seed_config_id) const {
  std::vector<TrialRecord> out;
  for (const auto& t : trials) {
    if (t.fuzzer_id == fuzzer_id && t.target_id == target_id &&
        t.seed_config_id == seed_config_id) {
      out.push_back(t);
    }
  }
  return out;
}

TrialRecord RunTrial(const CampaignConfig& config, const std::string& fuzzer_id,
                     const TargetSpec& target, const SeedConfig& seeds,
                     std::uint32_t trial_index) {
  const FuzzerSpec& spec = config.fuzzers.at(fuzzer_id);
  const std::uint64_t seed = DeriveTrialSeed(config.master_rng_seed, fuzzer_id,
                                             target.Id(), seeds.id, trial_index);
  TrialRecord record;
  if (spec.engine == Engine::kSimulated) {
    record = core::SimulatedFuzzer(spec.simulated, config.deadline, seed);
  } else {
    core::FuzzerConfig loop = spec.loop;
    loop.id = fuzzer_id;
    loop.seeds = seeds;
    record = core::RunFuzzLoop(target, loop, config.deadline, seed);
  }
  record.fuzzer_id = fuzzer_id;
  record.target_id = spec.engine == Engine::kSimulated ? "simulated" : target.Id();
  record.seed_config_id = seeds.id;
  record.trial_index = trial_index;
  return record;
}

namespace {

struct Job {
  std::string fuzzer_id;
  const TargetSpec* target;
  const SeedConfig* seeds;
  std::uint32_t trial;
};

void PinToCpu(std::size_t worker) {
  // Best effort; results never depend on placement.
  const unsigned cpus = std::max(1u, std::thread::hardware_concurrency());
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(worker % cpus, &set);
  pthread_setaffinity_np(pthread_self(), sizeof(set), &set);
}

}  // namespace

CampaignResult RunCampaign(const CampaignConfig& config, const TrialSink& sink) {
  config.Validate();

  std::vector<Job> jobs;
  for (const auto& fuzzer_id : config.FuzzerIds()) {
    const bool simulated = config.fuzzers.at(fuzzer_id).engine == Engine::kSimulated;
    for (const auto& target : config.targets) {
      // Simulated fuzzers ignore the target: one cell per seed config.
      if (simulated && target != config.targets.front()) continue;
      for (const auto& seeds : config.seed_configs) {
        for (std::uint32_t t = 0; t < config.trials; ++t) {
          jobs.push_back(Job{fuzzer_id, &target, &seeds, t});
        }
      }
    }
  }

  std::vector<std::optional<TrialRecord>> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::optional<std::pair<std::size_t, std::string>> failure;  // job, message

  auto worker = [&](std::size_t worker_index) {
    PinToCpu(worker_index);
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& job = jobs[i];
      try {
        TrialRecord r = RunTrial(config, job.fuzzer_id, *job.target, *job.seeds, job.trial);
        std::lock_guard<std::mutex> lock(mu);
        if (sink) sink(r);
        results[i] = std::move(r);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure || i < failure->first) failure.emplace(i, e.what());
        stop.store(true);
      }
    }
  };

  const std::size_t n_workers =
      std::min<std::size_t>(config.workers, std::max<std::size_t>(1, jobs.size()));
  if (n_workers == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker, w);
  }

  if (failure) {
    const Job& job = jobs[failure->first];
    const bool simulated = config.fuzzers.at(job.fuzzer_id).engine == Engine::kSimulated;
    throw CampaignError(CellKey{job.fuzzer_id, simulated ? "simulated" : job.target->Id(),
                                job.seeds->id, job.trial},
                        failure->second);
  }

  CampaignResult out;
  out.trials.reserve(results.size());
  for (auto& r : results) out.trials.push_back(std::move(*r));
  std::sort(out.trials.begin(), out.trials.end(),
            [](const TrialRecord& x, const TrialRecord& y) { return KeyOf(x) < KeyOf(y); });
  return out;
}

std::uint64_t CrashCountAt(const TrialRecord& trial, double t) {
  if (!(t >= 0.0 && t <= trial.deadline)) {
    throw std::invalid_argument("time " + std::to_string(t) + " outside [0, " +
                                std::to_string(trial.deadline) + "]");
  }
  return static_cast<std::uint64_t>(std::count_if(
      trial.crashes.begin(), trial.crashes.end(),
      [t](const CrashEvent& e) { return e.at <= t; }));
}

std::string_view MetricName(Metric m) {
  switch (m) {
    case Metric::kRaw:
      return "raw";
    case Metric::kCoverageUnique:
      return "cov-unique";
    case Metric::kStackHash:
      return "stackhash";
    case Metric::kGroundTruth:
      return "ground-truth-bugs";
  }
  return "?";
}

Metric ParseMetric(std::string_view s) {
  if (s == "raw") return Metric::kRaw;
  if (s == "coverage" || s == "cov-unique") return Metric::kCoverageUnique;
  if (s == "stackhash") return Metric::kStackHash;
  if (s == "groundtruth" || s == "ground-truth-bugs") return Metric::kGroundTruth;
  throw std::invalid_argument("unknown metric: " + std::string(s));
}

Labeler DefaultLabeler() {
  return [](const TrialRecord& trial, const CrashEvent& ev) -> dedup::BugLabel {
    if (trial.target_id == "simulated") {
      if (auto label = core::DecodeSyntheticLabel(ev.trace)) {
        return dedup::BugLabel::FixedBy(*label);
      }
      return dedup::BugLabel::Unknown();
    }
    const TargetSpec target = TargetSpec::FromId(trial.target_id);
    switch (target.family) {
      case TargetFamily::kVersionedFamily: {
        std::vector<TargetSpec> versions;
        for (std::uint32_t v = 0; v < core::versioned::kNumVersions; ++v) {
          versions.push_back(TargetSpec::Versioned(v));
        }
        const std::vector<Bytes> one{ev.input};
        try {
          return dedup::TriageVersions(one, versions).front();
        } catch (const std::invalid_argument&) {
          // crashed the fuzzed version but not version 0
          return dedup::BugLabel::Unknown();
        }
      }
      case TargetFamily::kBranchyCrash:
      case TargetFamily::kSharedCrashPaths:
        if (core::PlantedBug(target, ev.input)) return dedup::BugLabel::FixedBy(1);
        return dedup::BugLabel::Unknown();
      case TargetFamily::kExternalSubprocess:
        return dedup::BugLabel::Unknown();
    }
    return dedup::BugLabel::Unknown();
  };
}

double MetricAt(const TrialRecord& trial, double t, Metric metric,
                const MetricOptions& options) {
  const std::size_t upto = CrashCountAt(trial, t);
  const std::span<const CrashEvent> prefix(trial.crashes.data(), upto);
  switch (metric) {
    case Metric::kRaw:
      return static_cast<double>(upto);
    case Metric::kCoverageUnique: {
      const auto flags = dedup::CoverageUniqueOnline(prefix);
      return static_cast<double>(std::count(flags.begin(), flags.end(), true));
    }
    case Metric::kStackHash: {
      std::set<dedup::HashId> hashes;
      for (const auto& ev : prefix) hashes.insert(dedup::StackHash(ev.trace, options.frames));
      return static_cast<double>(hashes.size());
    }
    case Metric::kGroundTruth: {
      const Labeler labeler = options.labeler ? options.labeler : DefaultLabeler();
      std::set<dedup::BugLabel> bugs;
      for (const auto& ev : prefix) {
        auto label = labeler(trial, ev);
        if (label.kind != dedup::BugLabel::Kind::kUnknown) bugs.insert(label);
      }
      return static_cast<double>(bugs.size());
    }
  }
  return 0.0;
}

ComparisonResult CompareValues(std::span<const double> a, std::span<const double> b,
                               double level) {
  const auto test = stats::MannWhitneyU(a, b);
  const auto ci_a = stats::MedianCi(a, level);
  const auto ci_b = stats::MedianCi(b, level);
  ComparisonResult r;
  r.n_a = a.size();
  r.n_b = b.size();
  r.median_a = ci_a.median;
  r.median_b = ci_b.median;
  r.ci_a = {ci_a.lo, ci_a.hi};
  r.ci_b = {ci_b.lo, ci_b.hi};
  r.u_statistic = test.u_statistic;
  r.p_value = test.p_value;
  r.method = test.method;
  r.a12 = stats::VarghaDelaneyA12(a, b);
  return r;
}

ComparisonResult Compare(std::span<const TrialRecord> trials_a,
                         std::span<const TrialRecord> trials_b, double t,
                         Metric metric, const MetricOptions& options, double level) {
  if (trials_a.empty() || trials_b.empty()) {
    throw std::invalid_argument("compare needs non-empty trial collections");
  }
  const std::string& target = trials_a.front().target_id;
  const std::string& seeds = trials_a.front().seed_config_id;
  for (auto side : {trials_a, trials_b}) {
    for (const auto& tr : side) {
      if (tr.target_id != target || tr.seed_config_id != seeds) {
        throw std::invalid_argument("compared trials differ in target or seed config");
      }
    }
  }
  std::vector<double> a, b;
  for (const auto& tr : trials_a) a.push_back(MetricAt(tr, t, metric, options));
  for (const auto& tr : trials_b) b.push_back(MetricAt(tr, t, metric, options));
  ComparisonResult r = CompareValues(a, b, level);
  r.target_id = target;
  r.seed_config_id = seeds;
  r.fuzzer_a = trials_a.front().fuzzer_id;
  r.fuzzer_b = trials_b.front().fuzzer_id;
  r.metric = metric;
  r.at_time = t;
  return r;
}

}  // namespace fuzzeval::campaign
