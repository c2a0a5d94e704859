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

#include <gtest/gtest.h>

#include <memory>
#include <numeric>
#include <random>
#include <set>

#include "fuzzeval/core/targets.hpp"
#include "fuzzeval/dedup/dedup.hpp"
#include "fuzzeval/errors.hpp"

namespace fuzzeval::dedup {
namespace {

using Profiles = std::vector<CoverageProfile>;

// Edge ids for readability.
constexpr Edge kA{1, 2}, kB{2, 3}, kC{3, 4}, kPre{0, 1}, kCrash{9, 10};

TEST(CoverageUnique, IdenticalProfileIsDuplicate) {
  const Profiles p = {{kA, kB}, {kA, kB}};
  EXPECT_EQ(CoverageUniqueOnline(p), (std::vector<bool>{true, false}));
}

TEST(CoverageUnique, TwoInputClassesAreBothUnique) {
  const Profiles p = {{kPre, kA, kCrash}, {kPre, kB, kCrash}};
  EXPECT_EQ(CoverageUniqueOnline(p), (std::vector<bool>{true, true}));
}

TEST(CoverageUnique, MissingAnAlwaysSeenEdgeIsUnique) {
  const Profiles p = {{kA, kB}, {kA, kB, kC}, {kA, kC}};
  EXPECT_EQ(CoverageUniqueOnline(p), (std::vector<bool>{true, true, true}));
}

TEST(CoverageUnique, EmptyProfileMeansStrategyUnavailable) {
  const Profiles p = {{kA}, {}};
  EXPECT_THROW(CoverageUniqueOnline(p), StrategyUnavailable);
}

TEST(CoverageUnique, EventsMustBeOrdered) {
  std::vector<CrashEvent> events(2);
  events[0].at = 2.0;
  events[0].profile = {kA};
  events[1].at = 1.0;
  events[1].profile = {kB};
  EXPECT_THROW(CoverageUniqueOnline(events), std::invalid_argument);
}

TEST(CoverageUnique, FirstAlwaysUniqueAndRepeatsNever) {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 1000; ++rep) {
    Profiles p;
    const int n = 1 + static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) {
      if (!p.empty() && rng() % 3 == 0) {
        p.push_back(p[rng() % p.size()]);
        continue;
      }
      std::vector<Edge> e;
      for (std::uint32_t k = 0; k < 6; ++k) {
        if (rng() % 2) e.push_back({k, k + 1});
      }
      if (e.empty()) e.push_back({0, 1});
      p.push_back(CoverageProfile(e));
    }
    const auto flags = CoverageUniqueOnline(p);
    ASSERT_TRUE(flags[0]);
    for (std::size_t i = 1; i < p.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (p[j] == p[i]) ASSERT_FALSE(flags[i]);
      }
    }
  }
}

// --- cmin ---------------------------------------------------------------------

std::set<Edge> Union(const Profiles& p, const std::vector<std::size_t>& keep) {
  std::set<Edge> u;
  for (auto i : keep) u.insert(p[i].begin(), p[i].end());
  return u;
}

TEST(Cmin, WorkedExamples) {
  EXPECT_EQ(Cmin(Profiles{{kA}}), (std::vector<std::size_t>{0}));
  EXPECT_EQ(Cmin(Profiles{{kA}, {kA, kB}}), (std::vector<std::size_t>{1}));
  EXPECT_EQ(Cmin(Profiles{{kA, kB}, {kB, kC}, {kA, kC}}), (std::vector<std::size_t>{0, 1}));
}

TEST(Cmin, PreservesCoverage) {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 1000; ++rep) {
    Profiles p;
    const int n = 1 + static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) {
      std::vector<Edge> e;
      for (std::uint32_t k = 0; k < 10; ++k) {
        if (rng() % 4 == 0) e.push_back({k, k + 1});
      }
      if (e.empty()) e.push_back({static_cast<std::uint32_t>(rng() % 10), 11});
      p.push_back(CoverageProfile(e));
    }
    std::vector<std::size_t> all(p.size());
    std::iota(all.begin(), all.end(), 0);
    const auto keep = Cmin(p);
    ASSERT_TRUE(std::is_sorted(keep.begin(), keep.end()));
    ASSERT_EQ(Union(p, keep), Union(p, all));
    ASSERT_LE(keep.size(), p.size());
  }
}

// --- stack hash ---------------------------------------------------------------

TEST(StackHash, SharedCrashPathsDependsOnDepth) {
  const auto t = TargetSpec::SharedCrashPaths();
  const auto f = *core::Eval(t, ToBytes("f1")).trace;
  const auto g = *core::Eval(t, ToBytes("g1")).trace;
  EXPECT_EQ(StackHash(f, 3), StackHash(g, 3));
  EXPECT_NE(StackHash(f, 5), StackHash(g, 5));
}

TEST(StackHash, ShortTraceUsesAllFrames) {
  const StackTrace two{{Frame{"a", 1}, Frame{"b", 2}}};
  EXPECT_EQ(StackHash(two, 3), StackHash(two, 2));
  EXPECT_NE(StackHash(two, 3), StackHash(two, 1));
  EXPECT_THROW(StackHash(StackTrace{}, 3), std::invalid_argument);
  EXPECT_THROW(StackHash(two, 0), std::invalid_argument);
}

TEST(StackHash, EqualityIsExactlyFrameEquality) {
  // Names chosen to collide under naive concatenation.
  const StackTrace x{{Frame{"a;b@1", 2}}};
  const StackTrace y{{Frame{"a", 0}, Frame{"b", 12}}};
  const StackTrace z{{Frame{"a:1", 2}}};
  const StackTrace w{{Frame{"a", 12}}};
  EXPECT_NE(StackHash(x), StackHash(y));
  EXPECT_NE(StackHash(z), StackHash(w));
  std::mt19937_64 rng(3);
  const std::vector<std::string> units = {"a", "b", "a:", ":1", "", "b;", "1"};
  for (int rep = 0; rep < 1000; ++rep) {
    auto random_trace = [&] {
      StackTrace t;
      const int depth = 1 + static_cast<int>(rng() % 4);
      for (int i = 0; i < depth; ++i) {
        t.frames.push_back({units[rng() % units.size()], static_cast<std::uint32_t>(rng() % 3)});
      }
      return t;
    };
    const auto s = random_trace();
    const auto u = random_trace();
    const std::size_t n = 1 + rng() % 4;
    const auto top = [n](const StackTrace& t) {
      return std::vector<Frame>(t.frames.begin(),
                                t.frames.begin() + static_cast<std::ptrdiff_t>(
                                                       std::min(n, t.frames.size())));
    };
    ASSERT_EQ(StackHash(s, n) == StackHash(u, n), top(s) == top(u));
  }
}

// --- version triage -----------------------------------------------------------

BugLabel Pattern(std::initializer_list<bool> crashes) {
  const std::vector<char> bytes(crashes.begin(), crashes.end());
  const auto buf = std::make_unique<bool[]>(bytes.size());
  std::copy(bytes.begin(), bytes.end(), buf.get());
  return LabelFromCrashPattern(std::span<const bool>(buf.get(), bytes.size()));
}

TEST(Labels, FromCrashPattern) {
  EXPECT_EQ(Pattern({1, 1, 1, 1, 0, 0, 0, 0, 0}),
            BugLabel::FixedBy(4));
  EXPECT_EQ(Pattern({1, 1, 1}), BugLabel::Unfixed());
  EXPECT_EQ(Pattern({1, 0, 1}), BugLabel::Unknown());
  EXPECT_THROW(Pattern({0, 1}), std::invalid_argument);
}

TEST(Labels, TextRoundTrip) {
  for (const auto& l : {BugLabel::FixedBy(4), BugLabel::Unfixed(), BugLabel::Unknown()}) {
    EXPECT_EQ(BugLabel::Parse(l.ToString()), l);
  }
  EXPECT_EQ(BugLabel::FixedBy(4).ToString(), "fixed@4");
  EXPECT_THROW(BugLabel::Parse("fixed@"), std::invalid_argument);
}

TEST(Triage, OracleOverloadAppliesThePatternRule) {
  // Input byte = first clean version, 0 = never fixed, 255 = flaky.
  const std::vector<Bytes> inputs = {{4}, {0}, {255}};
  const auto labels = TriageVersions(inputs, 9, [](std::size_t v, auto in) {
    if (in[0] == 255) return v != 1;
    return in[0] == 0 || v < in[0];
  });
  EXPECT_EQ(labels, (std::vector<BugLabel>{BugLabel::FixedBy(4), BugLabel::Unfixed(),
                                           BugLabel::Unknown()}));
}

std::vector<TargetSpec> AllVersions() {
  std::vector<TargetSpec> v;
  for (std::uint32_t i = 0; i < core::versioned::kNumVersions; ++i) {
    v.push_back(TargetSpec::Versioned(i));
  }
  return v;
}

TEST(Triage, VersionedFamilyRecoversPlantedBugs) {
  std::mt19937_64 rng(4);
  std::vector<Bytes> inputs;
  std::vector<std::uint32_t> planted;
  for (int i = 0; i < 200; ++i) {
    const std::uint32_t bug = rng() % core::versioned::kNumBugs;
    Bytes in = {static_cast<std::uint8_t>('A' + bug), '!'};
    const std::size_t tail = 1 + rng() % 6;
    for (std::size_t k = 0; k < tail; ++k) in.push_back(static_cast<std::uint8_t>(rng()));
    inputs.push_back(in);
    planted.push_back(bug);
  }
  const auto labels = TriageVersions(inputs, AllVersions());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    EXPECT_EQ(labels[i], BugLabel::FixedBy(core::versioned::kFixVersions[planted[i]]));
  }
}

TEST(Triage, NonCrashingInputIsRejected) {
  const std::vector<Bytes> inputs = {ToBytes("Z!0")};
  EXPECT_THROW(TriageVersions(inputs, AllVersions()), std::invalid_argument);
}

// --- report --------------------------------------------------------------------

TEST(Report, HandCountedExample) {
  const auto x = BugLabel::FixedBy(1), y = BugLabel::FixedBy(2);
  const auto h1 = HashId::FromKey("h1"), h2 = HashId::FromKey("h2");
  const std::vector<BugLabel> labels = {x, x, x, y};
  const std::vector<HashId> hashes = {h1, h1, h2, h2};
  const auto t = DedupReport(labels, hashes);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0].label, x);
  EXPECT_EQ(t.rows[0].hashes, 2u);
  EXPECT_EQ(t.rows[0].matches, 1u);
  EXPECT_EQ(t.rows[0].false_matches, 1u);
  EXPECT_EQ(t.rows[0].inputs, 3u);
  EXPECT_EQ(t.rows[1].hashes, 1u);
  EXPECT_EQ(t.rows[1].matches, 0u);
  EXPECT_EQ(t.rows[1].false_matches, 1u);
  EXPECT_DOUBLE_EQ(t.non_unique_fraction, 0.5);
  EXPECT_EQ(t.distinct_hashes, 2u);
  EXPECT_EQ(t.distinct_bugs, 2u);
  ASSERT_TRUE(t.overcount_factor);
  EXPECT_DOUBLE_EQ(*t.overcount_factor, 1.0);
}

TEST(Report, OneBugOneHash) {
  const std::vector<BugLabel> labels(7, BugLabel::FixedBy(3));
  const std::vector<HashId> hashes(7, HashId::FromKey("h"));
  const auto t = DedupReport(labels, hashes);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].hashes, 1u);
  EXPECT_EQ(t.rows[0].matches, 1u);
  EXPECT_EQ(t.rows[0].false_matches, 0u);
  EXPECT_EQ(t.rows[0].inputs, 7u);
  EXPECT_DOUBLE_EQ(*t.overcount_factor, 1.0);
  EXPECT_THROW(DedupReport({}, {}), std::invalid_argument);
}

TEST(Report, TotalsInvariant) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = 1 + rng() % 40;
    std::vector<BugLabel> labels;
    std::vector<HashId> hashes;
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = rng() % 6;
      labels.push_back(r == 5 ? BugLabel::Unknown()
                              : BugLabel::FixedBy(static_cast<std::uint32_t>(r)));
      hashes.push_back(HashId::FromKey("h" + std::to_string(rng() % 8)));
    }
    const auto t = DedupReport(labels, hashes);
    std::size_t inputs = 0;
    for (const auto& row : t.rows) {
      ASSERT_EQ(row.matches + row.false_matches, row.hashes);
      inputs += row.inputs;
    }
    ASSERT_EQ(inputs, n);
    ASSERT_EQ(t.total_inputs, n);
  }
}

}  // namespace
}  // namespace fuzzeval::dedup
