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

// Every vectorized kernel must agree exactly with the scalar reference.

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "fuzzeval/simd/kernels.hpp"

namespace fuzzeval::simd {
namespace {

std::vector<std::uint8_t> RandomMap(std::mt19937_64& rng, std::size_t n, double density) {
  std::bernoulli_distribution hit(density);
  std::uniform_int_distribution<int> byte(1, 255);
  std::vector<std::uint8_t> m(n, 0);
  for (auto& b : m) {
    if (hit(rng)) b = static_cast<std::uint8_t>(byte(rng));
  }
  return m;
}

// Odd sizes exercise the scalar tails of the vector loops.
constexpr std::size_t kSizes[] = {0, 1, 7, 31, 32, 33, 63, 64, 65, 100, 4095, 4096};

class KernelEquivalence : public ::testing::TestWithParam<Isa> {};

TEST_P(KernelEquivalence, ByteMapKernelsMatchScalar) {
  const KernelTable& ref = Kernels(Isa::kScalar);
  const KernelTable& k = Kernels(GetParam());
  std::mt19937_64 rng(1);
  for (std::size_t n : kSizes) {
    for (double density : {0.0, 0.01, 0.3, 1.0}) {
      for (int rep = 0; rep < 20; ++rep) {
        const auto trace = RandomMap(rng, n, density);
        const auto seen = RandomMap(rng, n, density);
        EXPECT_EQ(k.has_new_bytes(trace, seen), ref.has_new_bytes(trace, seen));
        EXPECT_EQ(k.count_nonzero(trace), ref.count_nonzero(trace));
        auto a = seen;
        auto b = seen;
        EXPECT_EQ(k.merge_bytes(trace, a), ref.merge_bytes(trace, b));
        EXPECT_EQ(a, b);
      }
    }
  }
}

TEST_P(KernelEquivalence, HasNewBytesSeesSingleByteAtEveryPosition) {
  const KernelTable& k = Kernels(GetParam());
  std::vector<std::uint8_t> seen(97, 0);
  for (std::size_t i = 0; i < seen.size(); ++i) {
    std::vector<std::uint8_t> trace(seen.size(), 0);
    trace[i] = 1;
    EXPECT_TRUE(k.has_new_bytes(trace, seen)) << i;
    seen[i] = 3;
    EXPECT_FALSE(k.has_new_bytes(trace, seen)) << i;
    seen[i] = 0;
  }
}

TEST_P(KernelEquivalence, CountLessEqualMatchesScalar) {
  const KernelTable& ref = Kernels(Isa::kScalar);
  const KernelTable& k = Kernels(GetParam());
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> small(0, 4);
  for (std::size_t n : kSizes) {
    for (int rep = 0; rep < 30; ++rep) {
      std::vector<double> v(n);
      for (auto& x : v) x = small(rng) * 0.5;
      for (double pivot : {-1.0, 0.0, 0.5, 1.0, 1.25, 2.0, 9.0}) {
        const auto got = k.count_less_equal(v, pivot);
        const auto want = ref.count_less_equal(v, pivot);
        EXPECT_EQ(got.less, want.less);
        EXPECT_EQ(got.equal, want.equal);
      }
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<double> with_nan = {nan, 1.0, nan, 0.0, 2.0};
  EXPECT_EQ(k.count_less_equal(with_nan, 1.0).less, ref.count_less_equal(with_nan, 1.0).less);
  EXPECT_EQ(k.count_less_equal(with_nan, 1.0).equal, ref.count_less_equal(with_nan, 1.0).equal);
}

TEST_P(KernelEquivalence, AccumulateIsBitIdentical) {
  const KernelTable& ref = Kernels(Isa::kScalar);
  const KernelTable& k = Kernels(GetParam());
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1e6);
  for (std::size_t n : kSizes) {
    std::vector<double> src(n), dst(n);
    for (auto& x : src) x = u(rng);
    for (auto& x : dst) x = u(rng);
    auto a = dst;
    auto b = dst;
    k.accumulate(a, src);
    ref.accumulate(b, src);
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(a[i], b[i]);
  }
}

INSTANTIATE_TEST_SUITE_P(AllIsas, KernelEquivalence, ::testing::ValuesIn(AvailableIsas()),
                         [](const auto& info) { return std::string(IsaName(info.param)); });

TEST(Dispatch, ScalarAlwaysAvailableAndOverrideRoundTrips) {
  const auto isas = AvailableIsas();
  ASSERT_FALSE(isas.empty());
  EXPECT_EQ(isas.front(), Isa::kScalar);
  const Isa original = ActiveIsa();
  OverrideIsa(Isa::kScalar);
  EXPECT_EQ(ActiveIsa(), Isa::kScalar);
  OverrideIsa(std::nullopt);
  EXPECT_EQ(ActiveIsa(), original);
}

TEST(Dispatch, OverridingUnavailableIsaThrows) {
  const auto isas = AvailableIsas();
  for (Isa isa : {Isa::kAvx2, Isa::kNeon}) {
    if (std::find(isas.begin(), isas.end(), isa) == isas.end()) {
      EXPECT_THROW(OverrideIsa(isa), std::invalid_argument);
    }
  }
  OverrideIsa(std::nullopt);
}

}  // namespace
}  // namespace fuzzeval::simd
