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

#include "fuzzeval/core/types.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fuzzeval/core/targets.hpp"

namespace fuzzeval {

Bytes ToBytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

std::string ToString(const Bytes& b) { return std::string(b.begin(), b.end()); }

CoverageProfile::CoverageProfile(std::initializer_list<Edge> edges)
    : CoverageProfile(std::vector<Edge>(edges)) {}

CoverageProfile::CoverageProfile(std::vector<Edge> edges)
    : edges_(std::move(edges)) {
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
}

CoverageProfile CoverageProfile::FromMap(const std::vector<std::uint8_t>& map) {
  CoverageProfile p;
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (map[i] != 0) p.edges_.push_back(Edge::FromMapIndex(i));
  }
  // map order is already sorted (from-major)
  return p;
}

bool CoverageProfile::Contains(const Edge& e) const {
  return std::binary_search(edges_.begin(), edges_.end(), e);
}

bool TrialRecord::SameResults(const TrialRecord& o) const {
  return fuzzer_id == o.fuzzer_id && target_id == o.target_id &&
         seed_config_id == o.seed_config_id && trial_index == o.trial_index &&
         rng_seed == o.rng_seed && deadline == o.deadline &&
         crashes == o.crashes && coverage_growth == o.coverage_growth &&
         executions == o.executions;
}

std::string_view FamilyName(TargetFamily f) {
  switch (f) {
    case TargetFamily::kBranchyCrash:
      return "branchy-crash";
    case TargetFamily::kSharedCrashPaths:
      return "shared-crash-paths";
    case TargetFamily::kVersionedFamily:
      return "versioned-family";
    case TargetFamily::kExternalSubprocess:
      return "external-subprocess";
  }
  return "?";
}

TargetFamily ParseFamily(std::string_view name) {
  for (auto f : {TargetFamily::kBranchyCrash, TargetFamily::kSharedCrashPaths,
                 TargetFamily::kVersionedFamily,
                 TargetFamily::kExternalSubprocess}) {
    if (FamilyName(f) == name) return f;
  }
  throw std::invalid_argument("unknown target family: " + std::string(name));
}

void TargetSpec::Validate() const {
  const bool versioned = family == TargetFamily::kVersionedFamily;
  const bool external = family == TargetFamily::kExternalSubprocess;
  if (versioned != version.has_value()) {
    throw std::invalid_argument(
        "target version must be given iff family is versioned-family");
  }
  if (external != path.has_value()) {
    throw std::invalid_argument(
        "target path must be given iff family is external-subprocess");
  }
  if (versioned && *version >= core::versioned::kNumVersions) {
    throw std::invalid_argument("versioned-family has versions 0.." +
                                std::to_string(core::versioned::kNumVersions - 1));
  }
  if (external && path->empty()) {
    throw std::invalid_argument("external-subprocess target has empty path");
  }
}

std::string TargetSpec::Id() const {
  std::string id(FamilyName(family));
  if (version) id += "@" + std::to_string(*version);
  if (path) id += ":" + *path;
  return id;
}

TargetSpec TargetSpec::FromId(std::string_view id) {
  constexpr std::string_view kExternal = "external-subprocess:";
  if (id.starts_with(kExternal)) {
    return External(std::string(id.substr(kExternal.size())));
  }
  if (const auto at = id.find('@'); at != std::string_view::npos) {
    std::uint32_t v = 0;
    const auto digits = id.substr(at + 1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc() || ptr != digits.data() + digits.size()) {
      throw std::invalid_argument("bad target id: " + std::string(id));
    }
    TargetSpec spec{ParseFamily(id.substr(0, at)), v, std::nullopt};
    spec.Validate();
    return spec;
  }
  TargetSpec spec{ParseFamily(id)};
  spec.Validate();
  return spec;
}

void StochasticProfile::Validate() const {
  if (kind == Kind::kPoisson && !(rate >= 0.0 && std::isfinite(rate))) {
    throw std::invalid_argument("poisson rate must be finite and >= 0");
  }
  if (!std::is_sorted(schedule.begin(), schedule.end())) {
    throw std::invalid_argument("crash schedule must be sorted");
  }
  if (label_distribution.empty()) {
    throw std::invalid_argument("label distribution is empty");
  }
  double total = 0.0;
  for (const auto& [label, p] : label_distribution) {
    if (p < 0.0) throw std::invalid_argument("negative label probability");
    if (label + 2 >= kMaxBlockId) {
      throw std::invalid_argument("synthetic bug label too large: " +
                                  std::to_string(label));
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("label probabilities must sum to 1");
  }
}

}  // namespace fuzzeval
