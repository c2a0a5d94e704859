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

// AArch64 only. NEON is architecturally mandatory there, so no runtime
// probe is needed beyond the compile-time guard.

#include <arm_neon.h>

#include "fuzzeval/simd/kernels.hpp"

namespace fuzzeval::simd::detail {
namespace {

constexpr std::size_t kBytesPerVec = 16;
constexpr std::size_t kDoublesPerVec = 2;

bool HasNewBytesNeon(std::span<const std::uint8_t> trace,
                     std::span<const std::uint8_t> seen) {
  const std::size_t n = trace.size();
  std::size_t i = 0;
  for (; i + kBytesPerVec <= n; i += kBytesPerVec) {
    const uint8x16_t t = vld1q_u8(trace.data() + i);
    const uint8x16_t s = vld1q_u8(seen.data() + i);
    // trace != 0 && seen == 0
    const uint8x16_t fresh = vandq_u8(vtstq_u8(t, t), vceqzq_u8(s));
    if (vmaxvq_u8(fresh) != 0) return true;
  }
  for (; i < n; ++i) {
    if (trace[i] != 0 && seen[i] == 0) return true;
  }
  return false;
}

std::size_t MergeBytesNeon(std::span<const std::uint8_t> trace,
                           std::span<std::uint8_t> seen) {
  const std::size_t n = trace.size();
  std::size_t added = 0;
  std::size_t i = 0;
  for (; i + kBytesPerVec <= n; i += kBytesPerVec) {
    const uint8x16_t t = vld1q_u8(trace.data() + i);
    if (vmaxvq_u8(t) == 0) continue;
    const uint8x16_t s = vld1q_u8(seen.data() + i);
    const uint8x16_t fresh = vandq_u8(vtstq_u8(t, t), vceqzq_u8(s));
    added += vaddvq_u8(vshrq_n_u8(fresh, 7));
    vst1q_u8(seen.data() + i, vorrq_u8(s, t));
  }
  for (; i < n; ++i) {
    if (trace[i] == 0) continue;
    if (seen[i] == 0) ++added;
    seen[i] |= trace[i];
  }
  return added;
}

std::size_t CountNonzeroNeon(std::span<const std::uint8_t> map) {
  const std::size_t n = map.size();
  std::size_t nonzero = 0;
  std::size_t i = 0;
  for (; i + kBytesPerVec <= n; i += kBytesPerVec) {
    const uint8x16_t v = vld1q_u8(map.data() + i);
    nonzero += vaddvq_u8(vshrq_n_u8(vtstq_u8(v, v), 7));
  }
  for (; i < n; ++i) nonzero += (map[i] != 0);
  return nonzero;
}

LessEqualCounts CountLessEqualNeon(std::span<const double> values,
                                   double pivot) {
  const std::size_t n = values.size();
  const float64x2_t p = vdupq_n_f64(pivot);
  LessEqualCounts c;
  std::size_t i = 0;
  for (; i + kDoublesPerVec <= n; i += kDoublesPerVec) {
    const float64x2_t v = vld1q_f64(values.data() + i);
    c.less += vaddvq_u64(vshrq_n_u64(vcltq_f64(v, p), 63));
    c.equal += vaddvq_u64(vshrq_n_u64(vceqq_f64(v, p), 63));
  }
  for (; i < n; ++i) {
    c.less += (values[i] < pivot);
    c.equal += (values[i] == pivot);
  }
  return c;
}

void AccumulateNeon(std::span<double> dst, std::span<const double> src) {
  const std::size_t n = dst.size();
  std::size_t i = 0;
  for (; i + kDoublesPerVec <= n; i += kDoublesPerVec) {
    vst1q_f64(dst.data() + i,
              vaddq_f64(vld1q_f64(dst.data() + i), vld1q_f64(src.data() + i)));
  }
  for (; i < n; ++i) dst[i] += src[i];
}

}  // namespace

const KernelTable& NeonKernels() {
  static constexpr KernelTable kTable{&HasNewBytesNeon, &MergeBytesNeon,
                                      &CountNonzeroNeon, &CountLessEqualNeon,
                                      &AccumulateNeon};
  return kTable;
}

}  // namespace fuzzeval::simd::detail
