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

// Data-parallel inner loops used by the fuzz loop and the statistics code.
//
// Every kernel has a scalar reference implementation. Vectorized variants
// (AVX2 on x86-64, NEON on AArch64) are selected once at runtime from the
// CPU features and must produce results identical to the scalar ones; the
// equivalence tests compare each available ISA against the reference.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace fuzzeval::simd {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view IsaName(Isa isa);

// ISAs usable on this machine, scalar first.
std::vector<Isa> AvailableIsas();

// ISA used by the free functions below.
Isa ActiveIsa();

// Forces a specific ISA (tests, benchmarking). nullopt restores automatic
// selection. Throws std::invalid_argument if `isa` is not available.
void OverrideIsa(std::optional<Isa> isa);

struct LessEqualCounts {
  std::uint64_t less = 0;
  std::uint64_t equal = 0;
};

// Function table for one ISA. All spans in a call must have equal length
// unless stated otherwise.
struct KernelTable {
  // True iff some byte is non-zero in `trace` and zero in `seen`.
  bool (*has_new_bytes)(std::span<const std::uint8_t> trace,
                        std::span<const std::uint8_t> seen);
  // seen |= trace. Returns the number of bytes of `seen` that went from
  // zero to non-zero.
  std::size_t (*merge_bytes)(std::span<const std::uint8_t> trace,
                             std::span<std::uint8_t> seen);
  std::size_t (*count_nonzero)(std::span<const std::uint8_t> map);
  // Counts of values strictly below / equal to `pivot`. Lengths free.
  LessEqualCounts (*count_less_equal)(std::span<const double> values,
                                      double pivot);
  // dst[i] += src[i].
  void (*accumulate)(std::span<double> dst, std::span<const double> src);
};

const KernelTable& Kernels(Isa isa);

inline bool HasNewBytes(std::span<const std::uint8_t> trace,
                        std::span<const std::uint8_t> seen) {
  return Kernels(ActiveIsa()).has_new_bytes(trace, seen);
}
inline std::size_t MergeBytes(std::span<const std::uint8_t> trace,
                              std::span<std::uint8_t> seen) {
  return Kernels(ActiveIsa()).merge_bytes(trace, seen);
}
inline std::size_t CountNonzero(std::span<const std::uint8_t> map) {
  return Kernels(ActiveIsa()).count_nonzero(map);
}
inline LessEqualCounts CountLessEqual(std::span<const double> values,
                                      double pivot) {
  return Kernels(ActiveIsa()).count_less_equal(values, pivot);
}
inline void Accumulate(std::span<double> dst, std::span<const double> src) {
  Kernels(ActiveIsa()).accumulate(dst, src);
}

namespace detail {
const KernelTable& ScalarKernels();
#if defined(FUZZEVAL_HAVE_AVX2)
const KernelTable& Avx2Kernels();
#endif
#if defined(FUZZEVAL_HAVE_NEON)
const KernelTable& NeonKernels();
#endif
}  // namespace detail

}  // namespace fuzzeval::simd
