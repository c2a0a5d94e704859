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

#include "fuzzeval/dedup/dedup.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>

#include "fuzzeval/core/targets.hpp"
#include "fuzzeval/errors.hpp"

namespace fuzzeval::dedup {

std::string BugLabel::ToString() const {
  switch (kind) {
    case Kind::kFixedBy:
      return "fixed@" + std::to_string(*version);
    case Kind::kUnfixed:
      return "unfixed";
    case Kind::kUnknown:
      return "unknown";
  }
  return "unknown";
}

BugLabel BugLabel::Parse(std::string_view s) {
  if (s == "unfixed") return Unfixed();
  if (s == "unknown") return Unknown();
  constexpr std::string_view kPrefix = "fixed@";
  if (s.starts_with(kPrefix)) {
    return FixedBy(static_cast<std::uint32_t>(
        std::stoul(std::string(s.substr(kPrefix.size())))));
  }
  throw std::invalid_argument("bad bug label: " + std::string(s));
}

HashId StackHash(const StackTrace& trace, std::size_t n) {
  if (n == 0) throw std::invalid_argument("stack hash needs n >= 1");
  if (trace.frames.empty()) {
    throw std::invalid_argument("stack hash of an empty trace");
  }
  // length-prefixed units make the encoding injective
  std::string key;
  const std::size_t depth = std::min(n, trace.frames.size());
  for (std::size_t i = 0; i < depth; ++i) {
    const Frame& f = trace.frames[i];
    key += std::to_string(f.unit.size());
    key += ':';
    key += f.unit;
    key += '@';
    key += std::to_string(f.line);
    key += ';';
  }
  return HashId::FromKey(std::move(key));
}

HashId ProfileKey(const CoverageProfile& profile) {
  std::string key;
  for (const Edge& e : profile) {
    key += std::to_string(e.from);
    key += '>';
    key += std::to_string(e.to);
    key += ';';
  }
  return HashId::FromKey(std::move(key));
}

std::vector<bool> CoverageUniqueOnline(std::span<const CoverageProfile> profiles) {
  std::vector<bool> unique;
  unique.reserve(profiles.size());
  std::set<Edge> seen_any;       // edges in some previous crash
  std::vector<Edge> seen_all;    // edges in every previous crash (sorted)
  bool first = true;
  for (const CoverageProfile& p : profiles) {
    if (p.empty()) {
      throw StrategyUnavailable(
          "coverage de-duplication needs coverage profiles; got an empty one");
    }
    bool is_unique = first;
    if (!first) {
      const bool new_edge = std::any_of(
          p.begin(), p.end(), [&](const Edge& e) { return !seen_any.contains(e); });
      const bool missing_common = std::any_of(
          seen_all.begin(), seen_all.end(), [&](const Edge& e) { return !p.Contains(e); });
      is_unique = new_edge || missing_common;
    }
    unique.push_back(is_unique);

    seen_any.insert(p.begin(), p.end());
    if (first) {
      seen_all = p.edges();
    } else {
      std::vector<Edge> kept;
      std::set_intersection(seen_all.begin(), seen_all.end(), p.begin(), p.end(),
                            std::back_inserter(kept));
      seen_all = std::move(kept);
    }
    first = false;
  }
  return unique;
}

std::vector<bool> CoverageUniqueOnline(std::span<const CrashEvent> events) {
  std::vector<CoverageProfile> profiles;
  profiles.reserve(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (i > 0 && events[i].at < events[i - 1].at) {
      throw std::invalid_argument("crash events must be ordered by time");
    }
    profiles.push_back(events[i].profile);
  }
  return CoverageUniqueOnline(std::span<const CoverageProfile>(profiles));
}

std::vector<std::size_t> Cmin(std::span<const CoverageProfile> corpus) {
  std::map<Edge, std::size_t> owners;  // edge -> number of inputs covering it
  for (const CoverageProfile& p : corpus) {
    if (p.empty()) throw std::invalid_argument("cmin needs non-empty profiles");
    for (const Edge& e : p) ++owners[e];
  }

  std::vector<bool> keep(corpus.size(), false);
  std::set<Edge> covered;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const bool owns_unique = std::any_of(
        corpus[i].begin(), corpus[i].end(), [&](const Edge& e) { return owners[e] == 1; });
    if (owns_unique) {
      keep[i] = true;
      covered.insert(corpus[i].begin(), corpus[i].end());
    }
  }
  // Greedy completion, in corpus order.
  for (std::size_t i = 0; i < corpus.size() && covered.size() < owners.size(); ++i) {
    if (keep[i]) continue;
    const bool adds = std::any_of(corpus[i].begin(), corpus[i].end(),
                                  [&](const Edge& e) { return !covered.contains(e); });
    if (adds) {
      keep[i] = true;
      covered.insert(corpus[i].begin(), corpus[i].end());
    }
  }

  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i]) out.push_back(i);
  }
  return out;
}

BugLabel LabelFromCrashPattern(std::span<const bool> crashes) {
  if (crashes.empty() || !crashes[0]) {
    throw std::invalid_argument("input does not crash the first version");
  }
  const auto clean = std::find(crashes.begin(), crashes.end(), false);
  if (clean == crashes.end()) return BugLabel::Unfixed();
  if (std::find(clean, crashes.end(), true) != crashes.end()) {
    return BugLabel::Unknown();
  }
  return BugLabel::FixedBy(static_cast<std::uint32_t>(clean - crashes.begin()));
}

std::vector<BugLabel> TriageVersions(std::span<const Bytes> inputs,
                                     std::size_t num_versions,
                                     const CrashOracle& crashes) {
  if (num_versions == 0) throw std::invalid_argument("no versions to triage against");
  std::vector<BugLabel> labels;
  labels.reserve(inputs.size());
  // std::vector<bool> cannot back a span
  const auto pattern = std::make_unique<bool[]>(num_versions);
  for (const Bytes& input : inputs) {
    for (std::size_t v = 0; v < num_versions; ++v) pattern[v] = crashes(v, input);
    labels.push_back(LabelFromCrashPattern({pattern.get(), num_versions}));
  }
  return labels;
}

std::vector<BugLabel> TriageVersions(std::span<const Bytes> inputs,
                                     std::span<const TargetSpec> versions) {
  std::vector<core::Executor> executors;
  executors.reserve(versions.size());
  for (const TargetSpec& v : versions) executors.emplace_back(v);
  return TriageVersions(inputs, versions.size(),
                        [&](std::size_t v, std::span<const std::uint8_t> in) {
                          return executors[v].Run(in).crashed;
                        });
}

DedupTable DedupReport(std::span<const BugLabel> labels,
                       std::span<const HashId> hashes) {
  if (labels.size() != hashes.size()) {
    throw std::invalid_argument("labels and hashes must cover the same inputs");
  }
  if (labels.empty()) throw std::invalid_argument("dedup report of an empty corpus");

  std::map<BugLabel, std::set<HashId>> hashes_by_label;
  std::map<BugLabel, std::size_t> inputs_by_label;
  std::map<HashId, std::set<BugLabel>> labels_by_hash;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    hashes_by_label[labels[i]].insert(hashes[i]);
    ++inputs_by_label[labels[i]];
    labels_by_hash[hashes[i]].insert(labels[i]);
  }

  DedupTable table;
  for (const auto& [label, hs] : hashes_by_label) {
    DedupRow row;
    row.label = label;
    row.hashes = hs.size();
    for (const HashId& h : hs) {
      if (labels_by_hash[h].size() == 1) {
        ++row.matches;
      } else {
        ++row.false_matches;
      }
    }
    row.inputs = inputs_by_label[label];
    table.rows.push_back(row);
    if (label.kind == BugLabel::Kind::kFixedBy) ++table.distinct_bugs;
  }
  table.distinct_hashes = labels_by_hash.size();
  std::size_t shared = 0;
  for (const auto& [h, ls] : labels_by_hash) shared += ls.size() > 1;
  table.non_unique_fraction =
      static_cast<double>(shared) / static_cast<double>(table.distinct_hashes);
  if (table.distinct_bugs > 0) {
    table.overcount_factor = static_cast<double>(table.distinct_hashes) /
                             static_cast<double>(table.distinct_bugs);
  }
  table.total_inputs = labels.size();
  return table;
}

}  // namespace fuzzeval::dedup
