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

#pragma once

#include <stdexcept>
#include <string>

namespace fuzzeval {

// Argument errors use std::invalid_argument, programming errors
// std::logic_error. The types below cover the remaining failure classes.

// Bad user-supplied configuration: missing seed files, invalid campaign
// settings, a trial that never executed.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The target could not be executed at all (spawn failure, I/O failure).
// Never used to signal a crash.
class ExecutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A de-duplication strategy cannot be applied to the given data, e.g.
// coverage-based strategies on external targets with no coverage.
class StrategyUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fuzzeval
