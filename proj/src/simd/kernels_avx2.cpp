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

// Compiled with -mavx2; only reached after a runtime CPU check.

#include <immintrin.h>

#include "fuzzeval/simd/kernels.hpp"

namespace fuzzeval::simd::detail {
namespace {

constexpr std::size_t kBytesPerVec = 32;
constexpr std::size_t kDoublesPerVec = 4;

bool HasNewBytesAvx2(std::span<const std::uint8_t> trace,
                     std::span<const std::uint8_t> seen) {
  const std::size_t n = trace.size();
  const __m256i zero = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + kBytesPerVec <= n; i += kBytesPerVec) {
    const __m256i t = _mm256_loadu_si256(
        reinterpret_cast<const __m256i*>(trace.data() + i));
    const __m256i s = _mm256_loadu_si256(
        reinterpret_cast<const __m256i*>(seen.data() + i));
    // lanes where trace != 0 and seen == 0
    const __m256i t_zero = _mm256_cmpeq_epi8(t, zero);
    const __m256i s_zero = _mm256_cmpeq_epi8(s, zero);
    const __m256i fresh = _mm256_andnot_si256(t_zero, s_zero);
    if (!_mm256_testz_si256(fresh, fresh)) return true;
  }
  for (; i < n; ++i) {
    if (trace[i] != 0 && seen[i] == 0) return true;
  }
  return false;
}

std::size_t MergeBytesAvx2(std::span<const std::uint8_t> trace,
                           std::span<std::uint8_t> seen) {
  const std::size_t n = trace.size();
  const __m256i zero = _mm256_setzero_si256();
  std::size_t added = 0;
  std::size_t i = 0;
  for (; i + kBytesPerVec <= n; i += kBytesPerVec) {
    const __m256i t = _mm256_loadu_si256(
        reinterpret_cast<const __m256i*>(trace.data() + i));
    if (_mm256_testz_si256(t, t)) continue;
    auto* sp = reinterpret_cast<__m256i*>(seen.data() + i);
    const __m256i s = _mm256_loadu_si256(sp);
    const __m256i t_zero = _mm256_cmpeq_epi8(t, zero);
    const __m256i s_zero = _mm256_cmpeq_epi8(s, zero);
    const __m256i fresh = _mm256_andnot_si256(t_zero, s_zero);
    added += static_cast<std::size_t>(
        __builtin_popcount(static_cast<unsigned>(_mm256_movemask_epi8(fresh))));
    _mm256_storeu_si256(sp, _mm256_or_si256(s, t));
  }
  for (; i < n; ++i) {
    if (trace[i] == 0) continue;
    if (seen[i] == 0) ++added;
    seen[i] |= trace[i];
  }
  return added;
}

std::size_t CountNonzeroAvx2(std::span<const std::uint8_t> map) {
  const std::size_t n = map.size();
  const __m256i zero = _mm256_setzero_si256();
  std::size_t zeros = 0;
  std::size_t i = 0;
  for (; i + kBytesPerVec <= n; i += kBytesPerVec) {
    const __m256i v =
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(map.data() + i));
    zeros += static_cast<std::size_t>(__builtin_popcount(
        static_cast<unsigned>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(v, zero)))));
  }
  std::size_t nonzero = i - zeros;
  for (; i < n; ++i) nonzero += (map[i] != 0);
  return nonzero;
}

LessEqualCounts CountLessEqualAvx2(std::span<const double> values,
                                   double pivot) {
  const std::size_t n = values.size();
  const __m256d p = _mm256_set1_pd(pivot);
  LessEqualCounts c;
  std::size_t i = 0;
  for (; i + kDoublesPerVec <= n; i += kDoublesPerVec) {
    const __m256d v = _mm256_loadu_pd(values.data() + i);
    const int lt = _mm256_movemask_pd(_mm256_cmp_pd(v, p, _CMP_LT_OQ));
    const int eq = _mm256_movemask_pd(_mm256_cmp_pd(v, p, _CMP_EQ_OQ));
    c.less += static_cast<std::uint64_t>(__builtin_popcount(lt));
    c.equal += static_cast<std::uint64_t>(__builtin_popcount(eq));
  }
  for (; i < n; ++i) {
    c.less += (values[i] < pivot);
    c.equal += (values[i] == pivot);
  }
  return c;
}

void AccumulateAvx2(std::span<double> dst, std::span<const double> src) {
  const std::size_t n = dst.size();
  std::size_t i = 0;
  for (; i + kDoublesPerVec <= n; i += kDoublesPerVec) {
    const __m256d d = _mm256_loadu_pd(dst.data() + i);
    const __m256d s = _mm256_loadu_pd(src.data() + i);
    _mm256_storeu_pd(dst.data() + i, _mm256_add_pd(d, s));
  }
  for (; i < n; ++i) dst[i] += src[i];
}

}  // namespace

const KernelTable& Avx2Kernels() {
  static constexpr KernelTable kTable{&HasNewBytesAvx2, &MergeBytesAvx2,
                                      &CountNonzeroAvx2, &CountLessEqualAvx2,
                                      &AccumulateAvx2};
  return kTable;
}

}  // namespace fuzzeval::simd::detail
