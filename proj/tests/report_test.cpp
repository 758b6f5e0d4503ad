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

#include <gtest/gtest.h>

#include "dc/report.hpp"

namespace dc {
namespace {

TEST(DeterminismReport, PassingGolden) {
  DeterminismReport r;
  r.program = "swap";
  r.trials = 100;
  r.seed = 7;
  r.runtime_outcomes = {"final x=2 y=1"};
  r.dc_outcomes = std::vector<std::string>{"final x=2 y=1"};
  r.sc_outcome_count = 3;
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(r.to_text(),
            "program=swap\n"
            "trials=100\n"
            "seed=7\n"
            "distinct_outcomes=1\n"
            "outcome=final x=2 y=1\n"
            "outcome_digest=78750bd2bde8d525\n"
            "dc_outcomes=1\n"
            "dc_outcome=final x=2 y=1\n"
            "sc_outcomes=3\n"
            "oracle_agrees=true\n"
            "verdict=PASS\n");
}

TEST(DeterminismReport, DivergentRunsFail) {
  DeterminismReport r;
  r.program = "p";
  r.trials = 2;
  r.runtime_outcomes = {"final x=1", "final x=2"};
  r.skipped_reason = "too many threads";
  EXPECT_FALSE(r.pass());
  EXPECT_EQ(r.to_text(),
            "program=p\n"
            "trials=2\n"
            "seed=0\n"
            "distinct_outcomes=2\n"
            "outcome=final x=1\n"
            "outcome=final x=2\n"
            "outcome_digest=none\n"
            "dc_outcomes=skipped\n"
            "sc_outcomes=skipped\n"
            "skipped_reason=too many threads\n"
            "oracle_agrees=n/a\n"
            "verdict=FAIL\n");
}

TEST(DeterminismReport, OracleDisagreementFails) {
  DeterminismReport r;
  r.trials = 1;
  r.runtime_outcomes = {"final x=1"};
  r.dc_outcomes = std::vector<std::string>{"final x=2"};
  EXPECT_FALSE(r.oracle_agrees());
  EXPECT_FALSE(r.pass());
  r.dc_outcomes = std::vector<std::string>{"final x=1", "final x=2"};
  EXPECT_FALSE(r.pass());
}

TEST(DeterminismReport, ZeroTrialsFail) {
  DeterminismReport r;
  EXPECT_FALSE(r.pass());
}

TEST(BenchReport, Golden) {
  BenchReport b;
  b.benchmark = "coarse";
  b.threads = 4;
  b.reps = 5;
  b.size = 1024;
  b.rounds = 4;
  b.baseline_ms = 10.0;
  b.dc_ms = 12.5;
  EXPECT_DOUBLE_EQ(b.ratio(), 1.25);
  EXPECT_EQ(b.to_text(),
            "benchmark=coarse\n"
            "threads=4\n"
            "reps=5\n"
            "size=1024\n"
            "rounds=4\n"
            "baseline_ms=10.000\n"
            "dc_ms=12.500\n"
            "overhead_ratio=1.2500\n"
            "checksum_match=true\n");
}

}  // namespace
}  // namespace dc
