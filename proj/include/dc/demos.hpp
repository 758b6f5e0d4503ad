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
#include <string>
#include <string_view>
#include <vector>

#include "dc/runtime.hpp"

namespace dc::demos {

/// Fork two children that swap x and y; returns (x, y) after the join.
std::pair<std::int64_t, std::int64_t> swap(const RuntimeOptions& opts, std::int64_t x0 = 1, std::int64_t y0 = 2);

/// Sum of [begin, end) over `threads` members with a sum reduction and a
/// static schedule.
std::int64_t reduce_sum(const RuntimeOptions& opts, std::uint32_t threads = 4, std::int64_t begin = 0,
                        std::int64_t end = 100);

/// Rank r contributes pieces[r] in order to a concatenation reduction.
std::string reduce_concat(const RuntimeOptions& opts, const std::vector<std::vector<std::string>>& pieces);

/// Every iteration of [0, n) appends its index to a shared log inside an
/// ordered region; returns the log.
std::vector<std::int64_t> ordered_log(const RuntimeOptions& opts, std::uint32_t threads = 4, std::int64_t n = 1000,
                                      std::int64_t chunk = 1);

struct TasksResult {
  std::int64_t a = 0;  // 3 * x
  std::int64_t b = 0;  // x + 3
  std::uint64_t reads_checked = 0;
  std::uint64_t snapshot_violations = 0;
};
/// Spawns A then B, writes x after spawning, waits B before A. Task reads
/// are checked against the spawner's write counter at spawn time.
TasksResult tasks(const RuntimeOptions& opts, std::int64_t x0 = 10);

/// Three tasks chained through handles: each waits on its predecessor.
/// Returns the three stage values.
std::vector<std::int64_t> pipeline(const RuntimeOptions& opts, std::int64_t x0 = 5);

/// Two children write x; returns the race payload text.
std::string race(const RuntimeOptions& opts);

const std::vector<std::string>& names();

struct Result {
  int exit_code = 0;
  std::string output;
};
/// Runs a demo by name. Unknown names throw std::invalid_argument.
Result run(std::string_view name, const RuntimeOptions& opts);

}  // namespace dc::demos
