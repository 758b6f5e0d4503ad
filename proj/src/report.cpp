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

#include "dc/report.hpp"

#include <cstdio>
#include <sstream>

#include "dc/oracle.hpp"

namespace dc {

bool DeterminismReport::oracle_agrees() const {
  if (!dc_outcomes) return true;
  return dc_outcomes->size() == 1 && runtime_outcomes.size() == 1 && dc_outcomes->front() == runtime_outcomes.front();
}

bool DeterminismReport::pass() const { return trials > 0 && distinct() == 1 && oracle_agrees(); }

std::string DeterminismReport::to_text() const {
  std::ostringstream os;
  os << "program=" << program << '\n';
  os << "trials=" << trials << '\n';
  os << "seed=" << seed << '\n';
  os << "distinct_outcomes=" << distinct() << '\n';
  for (const auto& o : runtime_outcomes) os << "outcome=" << o << '\n';
  os << "outcome_digest=" << (distinct() == 1 ? oracle::digest(runtime_outcomes.front()) : "none") << '\n';
  if (dc_outcomes) {
    os << "dc_outcomes=" << dc_outcomes->size() << '\n';
    for (const auto& o : *dc_outcomes) os << "dc_outcome=" << o << '\n';
  } else {
    os << "dc_outcomes=skipped\n";
  }
  if (sc_outcome_count) {
    os << "sc_outcomes=" << *sc_outcome_count << '\n';
  } else {
    os << "sc_outcomes=skipped\n";
  }
  if (!skipped_reason.empty()) os << "skipped_reason=" << skipped_reason << '\n';
  os << "oracle_agrees=" << (dc_outcomes ? (oracle_agrees() ? "true" : "false") : "n/a") << '\n';
  os << "verdict=" << (pass() ? "PASS" : "FAIL") << '\n';
  return os.str();
}

std::string BenchReport::to_text() const {
  auto fixed = [](double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return std::string(buf);
  };
  std::ostringstream os;
  os << "benchmark=" << benchmark << '\n';
  os << "threads=" << threads << '\n';
  os << "reps=" << reps << '\n';
  os << "size=" << size << '\n';
  os << "rounds=" << rounds << '\n';
  os << "baseline_ms=" << fixed(baseline_ms, 3) << '\n';
  os << "dc_ms=" << fixed(dc_ms, 3) << '\n';
  os << "overhead_ratio=" << fixed(ratio(), 4) << '\n';
  os << "checksum_match=" << (checksum_match ? "true" : "false") << '\n';
  return os.str();
}

}  // namespace dc
