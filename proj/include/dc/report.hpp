/*
 * Copyright 2026 The dcmem Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dc {

/// Result of a determinism check on one program. Serialized as `key=value`
/// lines in a fixed key order; list-valued keys repeat once per element.
struct DeterminismReport {
  std::string program;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> runtime_outcomes;  // distinct, sorted
  std::optional<std::vector<std::string>> dc_outcomes;  // unset when not enumerated
  std::optional<std::size_t> sc_outcome_count;
  std::string skipped_reason;  // why enumeration was skipped, if it was

  std::size_t distinct() const { return runtime_outcomes.size(); }
  bool oracle_agrees() const;
  bool pass() const;

  std::string to_text() const;
};

/// Wall-clock comparison of one kernel with and without workspace isolation.
/// Times are medians over `reps` repetitions.
struct BenchReport {
  std::string benchmark;
  std::uint32_t threads = 1;
  std::uint32_t reps = 1;
  std::uint64_t size = 0;
  std::uint32_t rounds = 1;
  double baseline_ms = 0;
  double dc_ms = 0;
  bool checksum_match = true;

  double ratio() const { return baseline_ms > 0 ? dc_ms / baseline_ms : 0; }
  std::string to_text() const;
};

}  // namespace dc
