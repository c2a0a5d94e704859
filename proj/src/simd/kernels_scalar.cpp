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

#include "fuzzeval/simd/kernels.hpp"

namespace fuzzeval::simd::detail {
namespace {

bool HasNewBytesScalar(std::span<const std::uint8_t> trace,
                       std::span<const std::uint8_t> seen) {
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i] != 0 && seen[i] == 0) return true;
  }
  return false;
}

std::size_t MergeBytesScalar(std::span<const std::uint8_t> trace,
                             std::span<std::uint8_t> seen) {
  std::size_t added = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i] == 0) continue;
    if (seen[i] == 0) ++added;
    seen[i] |= trace[i];
  }
  return added;
}

std::size_t CountNonzeroScalar(std::span<const std::uint8_t> map) {
  std::size_t n = 0;
  for (std::uint8_t b : map) n += (b != 0);
  return n;
}

LessEqualCounts CountLessEqualScalar(std::span<const double> values,
                                     double pivot) {
  LessEqualCounts c;
  for (double v : values) {
    c.less += (v < pivot);
    c.equal += (v == pivot);
  }
  return c;
}

void AccumulateScalar(std::span<double> dst, std::span<const double> src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

const KernelTable& ScalarKernels() {
  static constexpr KernelTable kTable{
      &HasNewBytesScalar, &MergeBytesScalar, &CountNonzeroScalar,
      &CountLessEqualScalar, &AccumulateScalar};
  return kTable;
}

}  // namespace fuzzeval::simd::detail
