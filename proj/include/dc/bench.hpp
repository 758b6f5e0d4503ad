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

#include "dc/report.hpp"

namespace dc::bench {

struct Config {
  std::string name = "coarse";
  std::uint32_t threads = 4;
  std::uint32_t reps = 5;
  std::uint64_t size = 1u << 19;  // elements across all threads
  std::uint32_t rounds = 4;       // barrier-separated passes
  std::uint32_t work = 8;         // transform iterations per element per pass
};

/// Few rounds over a large array.
Config coarse();
/// Many rounds over a tiny array.
Config fine();

/// `requested`, lowered to DC_MAX_THREADS when that is set to a positive integer.
std::uint32_t thread_cap(std::uint32_t requested);

/// Runs the kernel with plain threads and with the runtime, `reps` times each,
/// and reports the median wall times.
BenchReport run(Config cfg);

}  // namespace dc::bench
