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

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <string>

#include "fuzzeval/simd/kernels.hpp"

namespace fuzzeval::simd {
namespace {

bool CpuHasAvx2() {
#if defined(FUZZEVAL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa DetectBest() {
#if defined(FUZZEVAL_HAVE_NEON)
  return Isa::kNeon;
#else
  return CpuHasAvx2() ? Isa::kAvx2 : Isa::kScalar;
#endif
}

// -1: automatic.
std::atomic<int> g_override{-1};

}  // namespace

std::string_view IsaName(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "unknown";
}

std::vector<Isa> AvailableIsas() {
  std::vector<Isa> out{Isa::kScalar};
#if defined(FUZZEVAL_HAVE_AVX2)
  if (CpuHasAvx2()) out.push_back(Isa::kAvx2);
#endif
#if defined(FUZZEVAL_HAVE_NEON)
  out.push_back(Isa::kNeon);
#endif
  return out;
}

Isa ActiveIsa() {
  static const Isa kBest = DetectBest();
  const int forced = g_override.load(std::memory_order_relaxed);
  return forced < 0 ? kBest : static_cast<Isa>(forced);
}

void OverrideIsa(std::optional<Isa> isa) {
  if (!isa) {
    g_override.store(-1, std::memory_order_relaxed);
    return;
  }
  const auto avail = AvailableIsas();
  if (std::find(avail.begin(), avail.end(), *isa) == avail.end()) {
    throw std::invalid_argument("ISA not available on this CPU: " +
                                std::string(IsaName(*isa)));
  }
  g_override.store(static_cast<int>(*isa), std::memory_order_relaxed);
}

const KernelTable& Kernels(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return detail::ScalarKernels();
#if defined(FUZZEVAL_HAVE_AVX2)
    case Isa::kAvx2:
      return detail::Avx2Kernels();
#endif
#if defined(FUZZEVAL_HAVE_NEON)
    case Isa::kNeon:
      return detail::NeonKernels();
#endif
    default:
      break;
  }
  throw std::invalid_argument("no kernels compiled for ISA " +
                              std::string(IsaName(isa)));
}

}  // namespace fuzzeval::simd
