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

// Toy target suite with planted bugs, plus an adapter for external
// executables.
//
// Built-in targets are small hand-instrumented programs. Each basic block
// reports itself to a TraceContext, which records AFL-style edges
// (previous block, current block) into a byte map and keeps a shadow call
// stack so that crashes produce normalized stack traces.
//
//   branchy-crash       One bug reached through two branches: inputs that
//                       start with 'a' and inputs that do not take
//                       different edges into the same crash().
//   shared-crash-paths  One bug in format(), reached from callers f() and
//                       g(). The failure shows up two frames deeper, in
//                       output(), so traces share output/prepare/format and
//                       differ from the fourth frame on.
//   versioned-family    Four independent bugs selected by the first input
//                       byte, each removed in a later version of the
//                       program. Version v contains bug i iff
//                       v < kFixVersions[i].
//   external-subprocess Any executable; the input file path is argv[1].

#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fuzzeval/core/types.hpp"

namespace fuzzeval::core {

namespace versioned {
inline constexpr std::uint32_t kNumVersions = 8;
inline constexpr std::array<std::uint32_t, 4> kFixVersions{1, 3, 5, 7};
inline constexpr std::uint32_t kNumBugs = kFixVersions.size();
}  // namespace versioned

// Built-in executions abort further evaluation by throwing this; it never
// escapes Executor::Run.
struct TargetCrash {
  StackTrace trace;
};

// Instrumentation sink for built-in targets.
class TraceContext {
 public:
  explicit TraceContext(std::span<std::uint8_t> map) : map_(map) {}

  // Enters basic block `id` (1 <= id < kMaxBlockId).
  void Block(std::uint32_t id);

  // Shadow-stack frame for the lifetime of one call.
  class Scope {
   public:
    Scope(TraceContext& ctx, const char* unit, std::uint32_t line);
    ~Scope();
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;
    // Current line within this frame (the call site or crash site).
    void At(std::uint32_t line);

   private:
    TraceContext& ctx_;
  };

  [[noreturn]] void Crash();

 private:
  std::span<std::uint8_t> map_;
  std::uint32_t prev_ = 0;
  std::vector<Frame> stack_;  // outermost first
};

class Executor {
 public:
  struct Result {
    bool crashed = false;
    std::optional<StackTrace> trace;
    std::int64_t duration_us = 0;
  };

  explicit Executor(TargetSpec target,
                    std::chrono::milliseconds external_timeout =
                        std::chrono::seconds(5));

  // Runs one input. Coverage for the run is left in map(). External
  // targets never produce coverage. Throws ExecutionError when an external
  // target cannot be spawned.
  Result Run(std::span<const std::uint8_t> input);

  std::span<const std::uint8_t> map() const { return map_; }
  const TargetSpec& target() const { return target_; }

 private:
  Result RunExternal(std::span<const std::uint8_t> input);

  TargetSpec target_;
  std::chrono::milliseconds external_timeout_;
  std::vector<std::uint8_t> map_;
};

// Evaluates one input. Deterministic for built-in targets apart from
// duration_us.
Observation Eval(const TargetSpec& target, std::span<const std::uint8_t> input);

// Index of the planted bug an input triggers in the first (oldest) version
// of a built-in target, known by construction. nullopt when the input does
// not crash there or the target is external.
std::optional<std::uint32_t> PlantedBug(const TargetSpec& target,
                                        std::span<const std::uint8_t> input);

// Parses sanitizer stderr. Returns true if it contains an AddressSanitizer
// or UndefinedBehaviorSanitizer error report; frames found in "#N 0x.. in
// func file:line" lines are appended to `frames` with addresses dropped.
bool ParseSanitizerReport(std::string_view stderr_text,
                          std::vector<Frame>* frames);

}  // namespace fuzzeval::core
