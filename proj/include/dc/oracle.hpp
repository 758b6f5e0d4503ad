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

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dc/errors.hpp"
#include "dc/report.hpp"
#include "dc/script.hpp"

namespace dc::oracle {

/// Program exceeds the exhaustive-mode limits or the state budget.
class LimitError : public Error {
 public:
  using Error::Error;
};

/// Result of one execution of a script, canonically serialized.
///
/// Precedence when several threads fail: an unexpected error, then pairing
/// violations, then data races, then deadlock. Otherwise the outcome is thread
/// 0's final view: globals in name order, then allocated cells in
/// (owner, slot) order.
///
///   final x=2 y=1 [1:1]=7
///   race x{(1,1)|(2,1)}
///   deadlock {1,2}
///   pairing *->(3,1)
struct Outcome {
  enum class Kind { kFinal, kRace, kDeadlock, kPairing, kError };

  Kind kind = Kind::kFinal;
  std::string text;

  const std::string& str() const { return text; }
  friend bool operator<(const Outcome& a, const Outcome& b) { return a.text < b.text; }
  friend bool operator==(const Outcome& a, const Outcome& b) { return a.text == b.text; }
};

struct EnumerateOptions {
  std::size_t max_threads = 4;
  std::size_t max_ops_per_thread = 12;
  /// Budget on distinct states (memoized mode) or explored steps (full mode).
  std::size_t max_states = 5'000'000;
  /// Explore every interleaving without state memoization.
  bool full = false;
  /// If set, this thread only steps when no other thread can.
  std::optional<std::uint32_t> delayed_thread;
};

struct Enumeration {
  std::set<Outcome> outcomes;
  std::size_t states = 0;
};

/// Throws LimitError unless `p` fits the exhaustive-mode limits.
void check_limits(const script::Program& p, const EnumerateOptions& opts = {});

/// All outcomes under deterministic consistency, over every interleaving of
/// whole operations. Writes reach another thread only through a matched
/// release/acquire pair; two causally unordered latest writes to one cell met
/// at an acquire are a race.
Enumeration enumerate_dc(const script::Program& p, const EnumerateOptions& opts = {});

/// All outcomes under sequential consistency: one shared store, atomic
/// reads and writes. Release/acquire only orders execution.
Enumeration enumerate_sc(const script::Program& p, const EnumerateOptions& opts = {});

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::chrono::microseconds max_delay{2000};
};

/// Interprets `p` on the real runtime, one peer thread per script thread.
Outcome run_on_runtime(const script::Program& p, const RunOptions& opts = {});

struct CheckOptions {
  std::uint64_t trials = 100;
  std::uint64_t seed = 0;
  std::chrono::microseconds max_delay{2000};
  EnumerateOptions enumerate;
};

/// Runs `opts.trials` perturbed runtime executions (seeds seed..seed+trials-1)
/// and, when the program fits the limits, both enumerators.
DeterminismReport check_program(const script::Program& p, const CheckOptions& opts = {});

/// 64-bit FNV-1a of the outcome text, as 16 hex digits.
std::string digest(const std::string& text);

}  // namespace dc::oracle
