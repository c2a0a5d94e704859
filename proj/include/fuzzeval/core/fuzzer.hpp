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

// Mutation-based fuzz loop, parameterized by the usual six functions:
//
//   queue <- initSeedCorpus()
//   while not isDone(observations, queue):
//     candidate <- choose(queue, observations)
//     mutated   <- mutate(candidate, observations)
//     observation <- eval(mutated)
//     if isInteresting(observation, observations):
//       queue <- queue + mutated
//       observations <- observations + observation
//
// Greybox mode considers edge coverage when deciding what is interesting;
// blackbox mode only keeps crashing inputs. Every crashing evaluation is
// recorded as a CrashEvent whether or not it was interesting.

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fuzzeval/core/targets.hpp"
#include "fuzzeval/core/types.hpp"

namespace fuzzeval::core {

inline constexpr std::size_t kDefaultMaxInputSize = 4096;

// Deterministic generator used by the fuzz loop and the simulators.
using Rng = std::mt19937_64;

enum class Mode { kGreybox, kBlackbox };
enum class Schedule { kRoundRobin, kRarity };
enum class ClockKind { kVirtual, kWall };

std::string_view ModeName(Mode m);
Mode ParseMode(std::string_view s);
std::string_view ScheduleName(Schedule s);
Schedule ParseSchedule(std::string_view s);

struct FuzzerConfig {
  std::string id = "fuzzer";
  Mode mode = Mode::kGreybox;
  Schedule schedule = Schedule::kRoundRobin;
  SeedConfig seeds{"empty", SeedKind::kEmpty, {}, {}};
  std::optional<std::uint64_t> max_executions;
  std::size_t max_input_size = kDefaultMaxInputSize;
  // Virtual clock: every execution advances trial time by exec_cost
  // seconds, making trials reproducible. Wall clock uses real time.
  ClockKind clock = ClockKind::kVirtual;
  double exec_cost = 1e-4;
  // Execute at least one input even if the deadline is already reached.
  bool min_one_iteration = true;
};

// Throws ConfigError naming the path when a seed file is missing.
std::vector<Bytes> InitSeedCorpus(const SeedConfig& config);

// Union of all edges seen by interesting observations, kept as an exact
// byte map for vectorized comparison.
class SeenCoverage {
 public:
  SeenCoverage() : map_(kEdgeMapSize, 0) {}

  void Add(const CoverageProfile& profile);
  bool HasNew(const CoverageProfile& profile) const;
  // Map-based forms used by the fuzz loop.
  bool HasNew(std::span<const std::uint8_t> trace_map) const;
  std::size_t Merge(std::span<const std::uint8_t> trace_map);
  std::size_t EdgeCount() const;

 private:
  std::vector<std::uint8_t> map_;
};

bool IsInteresting(const Observation& obs, const SeenCoverage& seen, Mode mode);

// Selects the next queue entry. Round-robin keeps a cursor between calls.
class Chooser {
 public:
  explicit Chooser(Schedule schedule) : schedule_(schedule) {}
  // Throws std::logic_error on an empty queue.
  std::size_t Choose(std::span<const QueueEntry> queue);

 private:
  Schedule schedule_;
  std::size_t cursor_ = 0;
};

enum class MutationOp { kBitFlip, kByteReplace, kByteInsert, kByteDelete, kTruncate };
inline constexpr int kNumMutationOps = 5;

// One concrete mutation. `position` is clamped to the legal range for the
// operator; `value` is the replacement/inserted byte, or the bit index
// (0-7) for bit flips; for truncate `position` is the new length.
struct Mutation {
  MutationOp op = MutationOp::kByteInsert;
  std::size_t position = 0;
  std::uint8_t value = 0;
};

Bytes ApplyMutation(std::span<const std::uint8_t> input, const Mutation& m,
                    std::size_t max_size = kDefaultMaxInputSize);

// Draws a legal mutation uniformly over the operators available for this
// input (only insert on empty input; no insert at max size).
Mutation DrawMutation(std::span<const std::uint8_t> input, Rng& rng,
                      std::size_t max_size = kDefaultMaxInputSize);

Bytes Mutate(std::span<const std::uint8_t> input, Rng& rng,
             std::size_t max_size = kDefaultMaxInputSize);

TrialRecord RunFuzzLoop(const TargetSpec& target, const FuzzerConfig& config,
                        double deadline, std::uint64_t rng_seed);

// Encoding of synthetic bug labels into traces and profiles.
StackTrace SyntheticTrace(std::uint32_t label);
CoverageProfile SyntheticProfile(std::uint32_t label);
// Inverse of SyntheticTrace; nullopt for any other trace.
std::optional<std::uint32_t> DecodeSyntheticLabel(const StackTrace& trace);

TrialRecord SimulatedFuzzer(const StochasticProfile& profile, double deadline,
                            std::uint64_t rng_seed);

}  // namespace fuzzeval::core
