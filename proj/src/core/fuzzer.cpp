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

#include "fuzzeval/core/fuzzer.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <stdexcept>
#include <string>

#include "fuzzeval/errors.hpp"
#include "fuzzeval/simd/kernels.hpp"

namespace fuzzeval::core {

std::string_view ModeName(Mode m) {
  return m == Mode::kGreybox ? "greybox" : "blackbox";
}

Mode ParseMode(std::string_view s) {
  if (s == "greybox") return Mode::kGreybox;
  if (s == "blackbox") return Mode::kBlackbox;
  throw std::invalid_argument("unknown mode: " + std::string(s));
}

std::string_view ScheduleName(Schedule s) {
  return s == Schedule::kRoundRobin ? "round-robin" : "rarity";
}

Schedule ParseSchedule(std::string_view s) {
  if (s == "round-robin") return Schedule::kRoundRobin;
  if (s == "rarity") return Schedule::kRarity;
  throw std::invalid_argument("unknown schedule: " + std::string(s));
}

std::vector<Bytes> InitSeedCorpus(const SeedConfig& config) {
  switch (config.kind) {
    case SeedKind::kEmpty:
      return {Bytes{}};
    case SeedKind::kLiteral:
      if (config.literals.empty()) {
        throw ConfigError("seed config '" + config.id + "' has no literals");
      }
      return config.literals;
    case SeedKind::kFiles: {
      if (config.paths.empty()) {
        throw ConfigError("seed config '" + config.id + "' has no files");
      }
      std::vector<Bytes> seeds;
      for (const auto& path : config.paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ConfigError("seed file not found: " + path);
        seeds.emplace_back(std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>());
      }
      return seeds;
    }
  }
  throw std::logic_error("unhandled seed kind");
}

void SeenCoverage::Add(const CoverageProfile& profile) {
  for (const Edge& e : profile) map_[e.MapIndex()] = 1;
}

bool SeenCoverage::HasNew(const CoverageProfile& profile) const {
  return std::any_of(profile.begin(), profile.end(),
                     [&](const Edge& e) { return map_[e.MapIndex()] == 0; });
}

bool SeenCoverage::HasNew(std::span<const std::uint8_t> trace_map) const {
  return simd::HasNewBytes(trace_map, map_);
}

std::size_t SeenCoverage::Merge(std::span<const std::uint8_t> trace_map) {
  return simd::MergeBytes(trace_map, map_);
}

std::size_t SeenCoverage::EdgeCount() const { return simd::CountNonzero(map_); }

bool IsInteresting(const Observation& obs, const SeenCoverage& seen, Mode mode) {
  if (obs.crashed) return true;
  return mode == Mode::kGreybox && seen.HasNew(obs.edges);
}

std::size_t Chooser::Choose(std::span<const QueueEntry> queue) {
  if (queue.empty()) throw std::logic_error("choose called on an empty queue");
  if (schedule_ == Schedule::kRoundRobin) {
    const std::size_t pick = cursor_ % queue.size();
    cursor_ = pick + 1;
    return pick;
  }
  // Rarity: least-chosen entry, lowest index on ties.
  std::size_t best = 0;
  for (std::size_t i = 1; i < queue.size(); ++i) {
    if (queue[i].times_chosen < queue[best].times_chosen) best = i;
  }
  return best;
}

namespace {

// Rarity selection in O(log n) for the fuzz loop, equivalent to
// Chooser::Choose on the same queue.
class RarityIndex {
 public:
  std::size_t Choose(std::vector<QueueEntry>& queue) {
    for (; known_ < queue.size(); ++known_) {
      order_.emplace(queue[known_].times_chosen, known_);
    }
    auto it = order_.begin();
    const std::size_t pick = it->second;
    order_.erase(it);
    order_.emplace(++queue[pick].times_chosen, pick);
    return pick;
  }

 private:
  std::size_t known_ = 0;
  std::set<std::pair<std::uint64_t, std::size_t>> order_;
};

std::size_t UniformIndex(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace

Bytes ApplyMutation(std::span<const std::uint8_t> input, const Mutation& m,
                    std::size_t max_size) {
  Bytes out(input.begin(), input.end());
  const std::size_t n = out.size();
  switch (m.op) {
    case MutationOp::kBitFlip:
      if (n > 0) out[std::min(m.position, n - 1)] ^= std::uint8_t(1u << (m.value & 7));
      break;
    case MutationOp::kByteReplace:
      if (n > 0) out[std::min(m.position, n - 1)] = m.value;
      break;
    case MutationOp::kByteInsert:
      out.insert(out.begin() + static_cast<std::ptrdiff_t>(std::min(m.position, n)),
                 m.value);
      break;
    case MutationOp::kByteDelete:
      if (n > 0) out.erase(out.begin() + static_cast<std::ptrdiff_t>(std::min(m.position, n - 1)));
      break;
    case MutationOp::kTruncate:
      out.resize(std::min(m.position, n));
      break;
  }
  if (out.size() > max_size) out.resize(max_size);
  return out;
}

Mutation DrawMutation(std::span<const std::uint8_t> input, Rng& rng,
                      std::size_t max_size) {
  const std::size_t n = input.size();
  MutationOp ops[kNumMutationOps];
  std::size_t count = 0;
  if (n > 0) {
    ops[count++] = MutationOp::kBitFlip;
    ops[count++] = MutationOp::kByteReplace;
  }
  if (n < max_size) ops[count++] = MutationOp::kByteInsert;
  if (n > 0) {
    ops[count++] = MutationOp::kByteDelete;
    ops[count++] = MutationOp::kTruncate;
  }
  if (count == 0) return Mutation{MutationOp::kTruncate, 0, 0};  // max_size == 0

  Mutation m;
  m.op = ops[UniformIndex(rng, count)];
  switch (m.op) {
    case MutationOp::kBitFlip:
      m.position = UniformIndex(rng, n);
      m.value = static_cast<std::uint8_t>(UniformIndex(rng, 8));
      break;
    case MutationOp::kByteReplace:
      m.position = UniformIndex(rng, n);
      m.value = static_cast<std::uint8_t>(UniformIndex(rng, 256));
      break;
    case MutationOp::kByteInsert:
      m.position = UniformIndex(rng, n + 1);
      m.value = static_cast<std::uint8_t>(UniformIndex(rng, 256));
      break;
    case MutationOp::kByteDelete:
      m.position = UniformIndex(rng, n);
      break;
    case MutationOp::kTruncate:
      m.position = UniformIndex(rng, n);  // new length, strictly shorter
      break;
  }
  return m;
}

Bytes Mutate(std::span<const std::uint8_t> input, Rng& rng, std::size_t max_size) {
  return ApplyMutation(input, DrawMutation(input, rng, max_size), max_size);
}

TrialRecord RunFuzzLoop(const TargetSpec& target, const FuzzerConfig& config,
                        double deadline, std::uint64_t rng_seed) {
  if (!(deadline >= 0.0)) throw std::invalid_argument("deadline must be >= 0");
  if (config.clock == ClockKind::kVirtual && !(config.exec_cost > 0.0)) {
    throw ConfigError("exec_cost must be > 0 for the virtual clock");
  }
  const std::vector<Bytes> seeds = InitSeedCorpus(config.seeds);
  Executor exec(target);
  Rng rng(rng_seed);

  TrialRecord record;
  record.fuzzer_id = config.id;
  record.target_id = target.Id();
  record.seed_config_id = config.seeds.id;
  record.rng_seed = rng_seed;
  record.deadline = deadline;

  const auto wall_start = std::chrono::steady_clock::now();
  auto now = [&]() -> double {
    if (config.clock == ClockKind::kVirtual) {
      return static_cast<double>(record.executions) * config.exec_cost;
    }
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         wall_start)
        .count();
  };
  auto is_done = [&]() {
    if (record.executions == 0 && config.min_one_iteration) return false;
    if (config.max_executions && record.executions >= *config.max_executions) {
      return true;
    }
    return now() >= deadline;
  };

  std::vector<QueueEntry> queue;
  SeenCoverage seen;      // observations that drive isInteresting
  SeenCoverage measured;  // everything executed, for coverage growth

  // Executes one input; returns whether it was interesting.
  auto evaluate = [&](const Bytes& input, bool is_seed) {
    const double at = std::min(now(), deadline);
    auto result = exec.Run(input);
    ++record.executions;
    const auto map = exec.map();
    if (measured.Merge(map) > 0) {
      record.coverage_growth.push_back({at, measured.EdgeCount()});
    }
    if (result.crashed) {
      record.crashes.push_back(CrashEvent{
          at, input,
          CoverageProfile::FromMap(std::vector<std::uint8_t>(map.begin(), map.end())),
          std::move(*result.trace)});
    }
    bool interesting = is_seed || result.crashed;
    if (!interesting && config.mode == Mode::kGreybox) interesting = seen.HasNew(map);
    if (interesting) seen.Merge(map);
    return std::pair{interesting, at};
  };

  for (const Bytes& seed : seeds) {
    if (is_done()) break;
    evaluate(seed, true);
    queue.push_back(QueueEntry{seed, std::nullopt, 0.0, 0});
  }
  // Seeds are the initial queue even when the budget ran out early.
  for (std::size_t i = queue.size(); i < seeds.size(); ++i) {
    queue.push_back(QueueEntry{seeds[i], std::nullopt, 0.0, 0});
  }

  Chooser round_robin(Schedule::kRoundRobin);
  RarityIndex rarity;
  while (!is_done()) {
    std::size_t pick = 0;
    if (config.schedule == Schedule::kRarity) {
      pick = rarity.Choose(queue);
    } else {
      pick = round_robin.Choose(queue);
      ++queue[pick].times_chosen;
    }
    Bytes mutated = Mutate(queue[pick].input, rng, config.max_input_size);
    const auto [interesting, at] = evaluate(mutated, false);
    if (interesting) {
      queue.push_back(QueueEntry{std::move(mutated), pick, at, 0});
    }
  }

  if (record.executions == 0) {
    throw ConfigError("trial executed no inputs (deadline " +
                      std::to_string(deadline) + ")");
  }
  record.wall_seconds = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - wall_start)
                            .count();
  return record;
}

StackTrace SyntheticTrace(std::uint32_t label) {
  return StackTrace{{Frame{"synthetic_bug_" + std::to_string(label), 1},
                     Frame{"simulated_target", 2}}};
}

CoverageProfile SyntheticProfile(std::uint32_t label) {
  return CoverageProfile{Edge{0, 1}, Edge{1, label + 2}};
}

std::optional<std::uint32_t> DecodeSyntheticLabel(const StackTrace& trace) {
  constexpr std::string_view kPrefix = "synthetic_bug_";
  if (trace.frames.size() != 2 || trace.frames[1].unit != "simulated_target") {
    return std::nullopt;
  }
  const std::string& unit = trace.frames[0].unit;
  if (!unit.starts_with(kPrefix)) return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long v = std::stoul(unit.substr(kPrefix.size()), &used);
    if (used != unit.size() - kPrefix.size()) return std::nullopt;
    return static_cast<std::uint32_t>(v);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

TrialRecord SimulatedFuzzer(const StochasticProfile& profile, double deadline,
                            std::uint64_t rng_seed) {
  profile.Validate();
  if (!(deadline >= 0.0)) throw std::invalid_argument("deadline must be >= 0");
  Rng rng(rng_seed);

  std::vector<double> times;
  if (profile.kind == StochasticProfile::Kind::kDeterministicSchedule) {
    for (double t : profile.schedule) {
      if (t <= deadline) times.push_back(t);
    }
  } else if (profile.rate > 0.0) {
    std::exponential_distribution<double> gap(profile.rate);
    for (double t = gap(rng); t <= deadline; t += gap(rng)) times.push_back(t);
  }

  std::vector<std::uint32_t> labels;
  std::vector<double> cumulative;
  double acc = 0.0;
  for (const auto& [label, p] : profile.label_distribution) {
    labels.push_back(label);
    cumulative.push_back(acc += p);
  }
  std::uniform_real_distribution<double> unit(0.0, acc);

  TrialRecord record;
  record.fuzzer_id = "simulated";
  record.target_id = "simulated";
  record.seed_config_id = "none";
  record.rng_seed = rng_seed;
  record.deadline = deadline;
  SeenCoverage measured;
  std::vector<std::uint8_t> trace_map(kEdgeMapSize, 0);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double u = unit(rng);
    std::size_t idx = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    idx = std::min(idx, labels.size() - 1);
    const std::uint32_t label = labels[idx];

    CrashEvent ev;
    ev.at = times[k];
    ev.input = ToBytes("synthetic:" + std::to_string(label) + ":" + std::to_string(k));
    ev.profile = SyntheticProfile(label);
    ev.trace = SyntheticTrace(label);

    std::fill(trace_map.begin(), trace_map.end(), std::uint8_t{0});
    for (const Edge& e : ev.profile) trace_map[e.MapIndex()] = 1;
    if (measured.Merge(trace_map) > 0) {
      record.coverage_growth.push_back({ev.at, measured.EdgeCount()});
    }
    record.crashes.push_back(std::move(ev));
  }
  record.executions = times.size();
  return record;
}

}  // namespace fuzzeval::core
