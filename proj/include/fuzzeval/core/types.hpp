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

// Domain types shared by every module: coverage profiles, stack traces,
// observations, crash events and trial records.

#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fuzzeval {

using Bytes = std::vector<std::uint8_t>;

Bytes ToBytes(std::string_view s);
std::string ToString(const Bytes& b);

// Basic-block identifiers are bounded so every edge has an exact slot in a
// kEdgeMapSize-byte coverage map.
inline constexpr std::uint32_t kMaxBlockId = 64;
inline constexpr std::size_t kEdgeMapSize =
    static_cast<std::size_t>(kMaxBlockId) * kMaxBlockId;

// A control-flow edge: two basic blocks executed directly in sequence.
struct Edge {
  std::uint32_t from = 0;
  std::uint32_t to = 0;

  auto operator<=>(const Edge&) const = default;

  std::size_t MapIndex() const {
    return static_cast<std::size_t>(from) * kMaxBlockId + to;
  }
  static Edge FromMapIndex(std::size_t index) {
    return Edge{static_cast<std::uint32_t>(index / kMaxBlockId),
                static_cast<std::uint32_t>(index % kMaxBlockId)};
  }
};

// Set of edges exercised by one execution. Stored sorted and unique, so
// equality is set equality.
class CoverageProfile {
 public:
  CoverageProfile() = default;
  CoverageProfile(std::initializer_list<Edge> edges);
  explicit CoverageProfile(std::vector<Edge> edges);

  // Profile from a coverage map of kEdgeMapSize bytes.
  static CoverageProfile FromMap(const std::vector<std::uint8_t>& map);

  bool Contains(const Edge& e) const;
  bool empty() const { return edges_.empty(); }
  std::size_t size() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  auto begin() const { return edges_.begin(); }
  auto end() const { return edges_.end(); }

  bool operator==(const CoverageProfile&) const = default;

 private:
  std::vector<Edge> edges_;
};

// A normalized source location.
struct Frame {
  std::string unit;
  std::uint32_t line = 0;

  auto operator<=>(const Frame&) const = default;
};

// Innermost frame first.
struct StackTrace {
  std::vector<Frame> frames;

  bool operator==(const StackTrace&) const = default;
};

struct Observation {
  bool crashed = false;
  CoverageProfile edges;
  std::optional<StackTrace> trace;  // present iff crashed
  std::int64_t duration_us = 0;     // timing field, not deterministic
};

struct QueueEntry {
  Bytes input;
  std::optional<std::size_t> parent;
  double discovered_at = 0.0;
  std::uint64_t times_chosen = 0;
};

struct CrashEvent {
  double at = 0.0;
  Bytes input;
  CoverageProfile profile;
  StackTrace trace;

  bool operator==(const CrashEvent&) const = default;
};

struct CoveragePoint {
  double time = 0.0;
  std::uint64_t edges = 0;

  bool operator==(const CoveragePoint&) const = default;
};

struct TrialRecord {
  std::string fuzzer_id;
  std::string target_id;
  std::string seed_config_id;
  std::uint32_t trial_index = 0;
  std::uint64_t rng_seed = 0;
  double deadline = 0.0;
  std::vector<CrashEvent> crashes;
  std::vector<CoveragePoint> coverage_growth;
  std::uint64_t executions = 0;
  // Timing field: wall-clock seconds the trial took. Excluded from
  // equality and from determinism comparisons.
  double wall_seconds = 0.0;

  // Equality ignoring timing fields.
  bool SameResults(const TrialRecord& other) const;
};

enum class TargetFamily {
  kBranchyCrash,
  kSharedCrashPaths,
  kVersionedFamily,
  kExternalSubprocess,
};

std::string_view FamilyName(TargetFamily f);
TargetFamily ParseFamily(std::string_view name);

struct TargetSpec {
  TargetFamily family = TargetFamily::kBranchyCrash;
  std::optional<std::uint32_t> version;  // iff kVersionedFamily
  std::optional<std::string> path;       // iff kExternalSubprocess

  static TargetSpec BranchyCrash() { return {TargetFamily::kBranchyCrash}; }
  static TargetSpec SharedCrashPaths() {
    return {TargetFamily::kSharedCrashPaths};
  }
  static TargetSpec Versioned(std::uint32_t v) {
    return {TargetFamily::kVersionedFamily, v, std::nullopt};
  }
  static TargetSpec External(std::string p) {
    return {TargetFamily::kExternalSubprocess, std::nullopt, std::move(p)};
  }

  // Throws std::invalid_argument when the version/path invariants fail.
  void Validate() const;

  // Stable textual id, e.g. "versioned-family@3".
  std::string Id() const;
  static TargetSpec FromId(std::string_view id);

  bool operator==(const TargetSpec&) const = default;
};

enum class SeedKind { kEmpty, kLiteral, kFiles };

struct SeedConfig {
  std::string id;
  SeedKind kind = SeedKind::kEmpty;
  std::vector<Bytes> literals;    // kLiteral
  std::vector<std::string> paths; // kFiles
};

// Synthetic ground truth for simulated fuzzers: bug label -> probability.
// Labels are version indices, reported as fixed-by labels downstream.
struct StochasticProfile {
  enum class Kind { kDeterministicSchedule, kPoisson };
  Kind kind = Kind::kPoisson;
  std::vector<double> schedule;
  double rate = 0.0;
  std::map<std::uint32_t, double> label_distribution{{0, 1.0}};

  void Validate() const;
};

}  // namespace fuzzeval
