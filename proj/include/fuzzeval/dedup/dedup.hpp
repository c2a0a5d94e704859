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

// Crash de-duplication: AFL-style coverage-profile uniqueness, corpus
// minimization, stack hashing, ground-truth labeling by replaying crashes
// across fixed program versions, and a report that scores a heuristic
// clustering against the ground truth.

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fuzzeval/core/types.hpp"

namespace fuzzeval::dedup {

struct BugLabel {
  enum class Kind { kFixedBy, kUnfixed, kUnknown };

  Kind kind = Kind::kUnknown;
  std::optional<std::uint32_t> version;  // iff kFixedBy

  static BugLabel FixedBy(std::uint32_t v) { return {Kind::kFixedBy, v}; }
  static BugLabel Unfixed() { return {Kind::kUnfixed, std::nullopt}; }
  static BugLabel Unknown() { return {Kind::kUnknown, std::nullopt}; }

  // "fixed@4", "unfixed", "unknown".
  std::string ToString() const;
  static BugLabel Parse(std::string_view s);

  auto operator<=>(const BugLabel&) const = default;
};

// Fingerprint of the innermost frames of a trace. The key is an
// unambiguous encoding of the frames, so equal keys mean equal frames.
class HashId {
 public:
  HashId() = default;
  // For clusterings that are not stack hashes (coverage profiles, raw).
  static HashId FromKey(std::string key) { return HashId(std::move(key)); }

  const std::string& key() const { return key_; }
  auto operator<=>(const HashId&) const = default;

 private:
  explicit HashId(std::string key) : key_(std::move(key)) {}
  std::string key_;
};

inline constexpr std::size_t kDefaultStackFrames = 3;

// Hash over the min(n, depth) innermost frames. Throws
// std::invalid_argument on an empty trace or n == 0.
HashId StackHash(const StackTrace& trace, std::size_t n = kDefaultStackFrames);

// Canonical key of a coverage profile.
HashId ProfileKey(const CoverageProfile& profile);

// AFL's unique-crash rule, evaluated in order: a crash is unique if its
// profile has an edge no previous crash had, or lacks an edge that every
// previous crash had. "Previous" means all earlier crashes, unique or not.
// Throws StrategyUnavailable if any profile is empty.
std::vector<bool> CoverageUniqueOnline(std::span<const CoverageProfile> profiles);
std::vector<bool> CoverageUniqueOnline(std::span<const CrashEvent> events);

// Corpus minimization. Phase 1 keeps every input owning an edge no other
// input has. Phase 2 (an extension beyond the plain afl-cmin rule) walks
// the corpus in order and adds inputs that contribute missing edges until
// the retained union equals the corpus union. Returns sorted indices.
std::vector<std::size_t> Cmin(std::span<const CoverageProfile> corpus);

// Ground truth from a crash pattern across versions, oldest first:
// fixed-by v for the first clean version v when every later version is
// clean too; unfixed when the newest version still crashes; unknown when
// the pattern is not monotonic. Throws std::invalid_argument if version 0
// does not crash.
BugLabel LabelFromCrashPattern(std::span<const bool> crashes_by_version);

// crashes(version_index, input)
using CrashOracle =
    std::function<bool(std::size_t, std::span<const std::uint8_t>)>;

std::vector<BugLabel> TriageVersions(std::span<const Bytes> inputs,
                                     std::size_t num_versions,
                                     const CrashOracle& crashes);

// Versions are executed as built-in or external targets, oldest first.
std::vector<BugLabel> TriageVersions(std::span<const Bytes> inputs,
                                     std::span<const TargetSpec> versions);

struct DedupRow {
  BugLabel label;
  std::size_t hashes = 0;
  std::size_t matches = 0;
  std::size_t false_matches = 0;
  std::size_t inputs = 0;
};

struct DedupTable {
  std::vector<DedupRow> rows;  // ordered by label
  std::size_t distinct_hashes = 0;
  std::size_t distinct_bugs = 0;  // distinct fixed-by labels
  // distinct_hashes / distinct_bugs; absent with no fixed-by labels.
  std::optional<double> overcount_factor;
  double non_unique_fraction = 0.0;  // hashes under >1 label / hashes
  std::size_t total_inputs = 0;
};

// labels[i] and hashes[i] describe the same crashing input. A hash
// matches a label iff it occurs under no other label; otherwise it is a
// false match for every label it touches.
DedupTable DedupReport(std::span<const BugLabel> labels,
                       std::span<const HashId> hashes);

}  // namespace fuzzeval::dedup
