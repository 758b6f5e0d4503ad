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

#include <algorithm>
#include <mutex>
#include <numeric>
#include <random>
#include <set>

#include "dc/demos.hpp"
#include "dc/runtime.hpp"

namespace dc {
namespace {

using i64 = std::int64_t;
using namespace std::chrono_literals;

RuntimeOptions perturbed(std::uint64_t seed, std::chrono::microseconds delay = 300us) {
  RuntimeOptions o;
  o.perturbation_seed = seed;
  o.max_delay = delay;
  return o;
}

Globals ints(std::vector<std::pair<std::string, i64>> xs) {
  Globals g;
  for (auto& [n, v] : xs) g.emplace_back(n, Value::of<i64>(v));
  return g;
}

i64 get(const Workspace& ws, const char* n) { return ws.read(ws.layout().at(n)).as<i64>(); }

// ---- fork / join -----------------------------------------------------------

TEST(Fork, ChildrenSeeParentState) {
  Runtime rt;
  std::vector<std::pair<i64, i64>> seen(2);
  rt.run(ints({{"x", 0}, {"y", 0}}), [&](Context& c) {
    c.set<i64>("x", 1);
    c.set<i64>("y", 2);
    auto team = c.fork(2, [&](Context& k) { seen[k.rank()] = {k.get<i64>("x"), k.get<i64>("y")}; });
    c.join(team);
  });
  EXPECT_EQ(seen[0], (std::pair<i64, i64>{1, 2}));
  EXPECT_EQ(seen[1], (std::pair<i64, i64>{1, 2}));
}

TEST(Fork, SingleChildIsSequentialHandoff) {
  Runtime rt;
  auto ws = rt.run(ints({{"x", 4}}), [](Context& c) {
    auto team = c.fork(1, [](Context& k) { k.set<i64>("x", k.get<i64>("x") * 10); });
    c.join(team);
  });
  EXPECT_EQ(get(ws, "x"), 40);
}

TEST(Fork, ChildIdsStableAcrossPerturbedRuns) {
  std::set<std::vector<std::string>> traces;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mutex mu;
    std::vector<std::string> ids;
    Runtime rt(perturbed(seed, 100us));
    rt.run({}, [&](Context& c) {
      auto team = c.fork(3, [&](Context& k) {
        auto inner = k.fork(2, [&](Context& g) {
          std::lock_guard lk(mu);
          ids.push_back(std::to_string(k.rank()) + "/" + std::to_string(g.rank()) + "=" + g.id().str());
        });
        k.join(inner);
      });
      c.join(team);
    });
    std::sort(ids.begin(), ids.end());
    traces.insert(ids);
  }
  ASSERT_EQ(traces.size(), 1u);
  auto ids = *traces.begin();
  EXPECT_EQ(ids.front(), "0/0=1.1");
  EXPECT_EQ(ids.back(), "2/1=3.2");
}

TEST(Join, SwapIsParallelAssignment) {
  EXPECT_EQ(demos::swap({}), (std::pair<i64, i64>{2, 1}));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_EQ(demos::swap(perturbed(seed)), (std::pair<i64, i64>{2, 1}));
  }
}

TEST(Join, DisjointWritesMerge) {
  Runtime rt;
  auto ws = rt.run(ints({{"a", 0}, {"b", 0}}), [](Context& c) {
    auto team = c.fork({[](Context& k) { k.set<i64>("a", 1); }, [](Context& k) { k.set<i64>("b", 2); }});
    c.join(team);
  });
  EXPECT_EQ(get(ws, "a"), 1);
  EXPECT_EQ(get(ws, "b"), 2);
}

TEST(Join, SameCellRaceHasStablePayload) {
  std::set<std::string> payloads;
  for (std::uint64_t seed = 0; seed < 20; ++seed) payloads.insert(demos::race(perturbed(seed)));
  ASSERT_EQ(payloads.size(), 1u);
  EXPECT_EQ(*payloads.begin(), "x{(1,1)|(2,1)}");
}

TEST(Join, ChildErrorPropagates) {
  Runtime rt;
  EXPECT_THROW(rt.run({}, [](Context& c) {
    auto team = c.fork(2, [](Context& k) {
      if (k.rank() == 1) throw ConfigError("boom");
    });
    c.join(team);
  }),
               ConfigError);
}

TEST(Trace, ForkJoinLabelPattern) {
  RuntimeOptions o;
  o.trace = true;
  Runtime rt(o);
  rt.run({}, [](Context& c) {
    auto team = c.fork(2, [](Context&) {});
    c.join(team);
  });
  auto t = rt.trace();
  std::vector<std::string> want{"EVT 0 1 REL 1 1", "EVT 0 1 REL 2 1", "EVT 1 1 ACQ 0 1", "EVT 2 1 ACQ 0 1"};
  for (const auto& w : want) EXPECT_NE(std::find(t.begin(), t.end(), w), t.end()) << w;
  EXPECT_NE(std::find(t.begin(), t.end(), "EVT 0 2 ACQ 1 2"), t.end());
  EXPECT_NE(std::find(t.begin(), t.end(), "EVT 0 2 ACQ 2 2"), t.end());
}

TEST(Trace, LabelTraceIdenticalAcrossPerturbedRuns) {
  std::set<std::vector<std::string>> traces;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RuntimeOptions o = perturbed(seed, 200us);
    o.trace = true;
    Runtime rt(o);
    rt.run(ints({{"s", 0}}), [](Context& c) {
      auto team = c.fork(
          3,
          [](Context& k) {
            k.contribute<i64>("s", k.rank());
            k.barrier();
            auto h = k.spawn([](Context&) {});
            k.taskwait(h);
          },
          {ReductionSpec::sum_i64("s")});
      c.join(team);
    });
    traces.insert(rt.trace());
  }
  EXPECT_EQ(traces.size(), 1u);
}

// ---- allocation --------------------------------------------------------------

TEST(Alloc, AddressesIdenticalAcross100PerturbedRuns) {
  std::set<std::vector<std::string>> seen;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mutex mu;
    std::vector<std::string> addrs;
    Runtime rt(perturbed(seed, 50us));
    rt.run(ints({{"g", 0}}), [&](Context& c) {
      auto root = c.alloc(Value());
      addrs.push_back(root.str());
      auto team = c.fork(3, [&](Context& k) {
        for (int i = 0; i < 2; ++i) {
          auto a = k.alloc(Value::of<int>(i));
          std::lock_guard lk(mu);
          addrs.push_back(a.str());
        }
      });
      c.join(team);
    });
    std::sort(addrs.begin(), addrs.end());
    seen.insert(addrs);
  }
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(*seen.begin(),
            (std::vector<std::string>{"[0:2]", "[1:1]", "[1:2]", "[2:1]", "[2:2]", "[3:1]", "[3:2]"}));
}

// ---- barrier -----------------------------------------------------------------

Globals cells(std::uint32_t n) {
  Globals g;
  for (std::uint32_t i = 0; i < n; ++i) g.emplace_back("c" + std::to_string(i), Value::of<i64>(-1));
  return g;
}

TEST(Barrier, DisjointWritesVisibleToAll) {
  const std::uint32_t n = 4;
  std::vector<std::vector<i64>> seen(n);
  Runtime rt(perturbed(7));
  rt.run(cells(n), [&](Context& c) {
    auto team = c.fork(n, [&](Context& k) {
      k.set<i64>("c" + std::to_string(k.rank()), k.rank() * 10);
      k.barrier();
      for (std::uint32_t i = 0; i < n; ++i) seen[k.rank()].push_back(k.get<i64>("c" + std::to_string(i)));
    });
    c.join(team);
  });
  for (const auto& s : seen) EXPECT_EQ(s, (std::vector<i64>{0, 10, 20, 30}));
}

// Three rounds of random disjoint writes separated by barriers. Returns
// every member's serialized workspace after each barrier.
std::vector<std::string> barrier_states(std::uint32_t n, std::uint64_t seed, bool tree) {
  const std::uint32_t cells_n = 2 * n;
  std::vector<std::string> out(n * 3);
  Runtime rt(perturbed(seed, 50us));
  rt.run(cells(cells_n), [&](Context& c) {
    auto team = c.fork(n, [&](Context& k) {
      std::mt19937_64 rng(seed * 1000 + k.rank());
      for (int round = 0; round < 3; ++round) {
        // Cell ownership rotates per round so every write is disjoint.
        for (std::uint32_t i = 0; i < cells_n; ++i) {
          if ((i + round) % n == k.rank() && rng() % 2) {
            k.set<i64>("c" + std::to_string(i), static_cast<i64>(rng() % 1000));
          }
        }
        if (rng() % 3 == 0) k.alloc(Value::of<i64>(round));
        tree ? k.barrier() : k.barrier_pairwise();
        out[round * n + k.rank()] = k.workspace().serialize();
      }
    });
    c.join(team);
  });
  return out;
}

class BarrierEquivalence : public ::testing::TestWithParam<std::uint32_t> {};

TEST_P(BarrierEquivalence, TreeMatchesPairwise) {
  const auto n = GetParam();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ASSERT_EQ(barrier_states(n, seed, true), barrier_states(n, seed, false)) << "n=" << n << " seed=" << seed;
  }
}

INSTANTIATE_TEST_SUITE_P(Sizes, BarrierEquivalence, ::testing::Values(2u, 3u, 4u, 8u));

std::string barrier_race(std::uint32_t n, bool tree) {
  Runtime rt;
  try {
    rt.run(cells(n), [&](Context& c) {
      auto team = c.fork(n, [&](Context& k) {
        if (k.rank() == 0 || k.rank() == n - 1) k.set<i64>("c0", k.rank());
        tree ? k.barrier() : k.barrier_pairwise();
      });
      c.join(team);
    });
  } catch (const DataRaceError& e) {
    return describe(e.conflicts());
  }
  return {};
}

TEST(Barrier, RacePayloadSameInTreeAndPairwise) {
  for (std::uint32_t n : {2u, 3u, 5u}) {
    auto t = barrier_race(n, true);
    EXPECT_EQ(t, barrier_race(n, false));
    EXPECT_EQ(t, "[0:1]{(1,1)|(" + std::to_string(n) + ",1)}");
  }
}

// ---- ordered -----------------------------------------------------------------

TEST(Ordered, FourIterationsTwoThreads) {
  EXPECT_EQ(demos::ordered_log(perturbed(3), 2, 4, 1), (std::vector<i64>{0, 1, 2, 3}));
}

TEST(Ordered, SingleIteration) { EXPECT_EQ(demos::ordered_log({}, 3, 1, 1), (std::vector<i64>{0})); }

TEST(Ordered, ChainedCounterHasNoRace) {
  Runtime rt(perturbed(11));
  auto ws = rt.run(ints({{"n", 0}}), [](Context& c) {
    auto team = c.fork(3, [](Context& k) {
      auto region = k.ordered_region(0, 12, StaticSchedule{2});
      k.parallel_for(0, 12, StaticSchedule{2}, [&](i64 i) {
        k.ordered(region, i, [&] { k.set<i64>("n", k.get<i64>("n") + 1); });
      });
    });
    c.join(team);
  });
  EXPECT_EQ(get(ws, "n"), 12);
}

TEST(Ordered, SkippedCallDeadlocks) {
  Runtime rt;
  EXPECT_THROW(rt.run({}, [](Context& c) {
    auto team = c.fork(2, [](Context& k) {
      auto region = k.ordered_region(0, 4, StaticSchedule{1});
      k.parallel_for(0, 4, StaticSchedule{1}, [&](i64 i) {
        if (i != 1) k.ordered(region, i, [] {});
      });
    });
    c.join(team);
  }),
               DeadlockError);
}

// ---- reductions --------------------------------------------------------------

TEST(Reduction, SumOfRankPlusOne) {
  Runtime rt(perturbed(5));
  auto ws = rt.run(ints({{"s", 0}}), [](Context& c) {
    auto team = c.fork(4, [](Context& k) { k.contribute<i64>("s", k.rank() + 1); }, {ReductionSpec::sum_i64("s")});
    c.join(team);
  });
  EXPECT_EQ(get(ws, "s"), 10);
}

TEST(Reduction, SumOverRangeIndependentOfTeamSize) {
  for (std::uint32_t n : {1u, 2u, 3u, 4u, 7u}) EXPECT_EQ(demos::reduce_sum(perturbed(n, 50us), n, 0, 100), 4950);
}

TEST(Reduction, MaxWithSentinel) {
  Runtime rt;
  auto ws = rt.run(ints({{"m", std::numeric_limits<i64>::min()}}), [](Context& c) {
    auto team = c.fork(3, [](Context& k) { k.contribute<i64>("m", (k.rank() * 7) % 5); },
                       {ReductionSpec::max_i64("m")});
    c.join(team);
  });
  EXPECT_EQ(get(ws, "m"), 4);
}

struct Scored {
  i64 id;
  double score;
};

TEST(Reduction, ArgmaxOverRecords) {
  Runtime rt;
  Globals g{{"best", Value::of(Scored{-1, -1e300})}};
  auto ws = rt.run(g, [](Context& c) {
    auto team = c.fork(
        4,
        [](Context& k) {
          for (i64 i = 0; i < 5; ++i) {
            i64 id = k.rank() * 5 + i;
            k.contribute<Scored>("best", Scored{id, static_cast<double>((id * 37) % 19)});
          }
        },
        {ReductionSpec::of<Scored>("best", Scored{-1, -1e300},
                                   [](Scored a, Scored b) { return b.score > a.score ? b : a; })});
    c.join(team);
  });
  auto best = ws.read(ws.layout().at("best")).as<Scored>();
  EXPECT_EQ(best.score, 18.0);
  EXPECT_EQ(best.id, 1);
}

TEST(Reduction, ContributionsFoldInOrder) {
  Runtime rt;
  Globals g{{"t", Value()}};
  std::string partial;
  rt.run(g, [&](Context& c) {
    auto team = c.fork(
        1,
        [](Context& k) {
          for (auto s : {"x", "y", "z"}) k.contribute("t", Value::of_string(s));
        },
        {ReductionSpec::concat("t")});
    c.join(team);
    partial = std::string(c.read(c.global("t")).bytes());
  });
  EXPECT_EQ(partial, "xyz");
}

TEST(Reduction, NoContributionsGivesIdentity) {
  Runtime rt;
  auto ws = rt.run(ints({{"s", 0}}), [](Context& c) {
    auto team = c.fork(4, [](Context&) {}, {ReductionSpec::sum_i64("s")});
    c.join(team);
  });
  EXPECT_EQ(get(ws, "s"), 0);
}

TEST(Reduction, ConcatMatchesSequentialFold) {
  std::vector<std::vector<std::string>> pieces{{"a", "1"}, {"b"}, {}, {"d", "2", "3"}};
  std::string want;
  for (const auto& p : pieces) want += std::accumulate(p.begin(), p.end(), std::string());
  for (std::uint64_t seed = 0; seed < 10; ++seed) EXPECT_EQ(demos::reduce_concat(perturbed(seed), pieces), want);
  EXPECT_EQ(demos::reduce_concat({}, {{"a"}, {"b"}, {"c"}, {"d"}}), "abcd");
}

TEST(Reduction, FoldedAtBarrier) {
  Runtime rt;
  std::vector<i64> after(3);
  rt.run(ints({{"s", 100}}), [&](Context& c) {
    auto team = c.fork(
        3,
        [&](Context& k) {
          k.contribute<i64>("s", 1);
          k.barrier();
          after[k.rank()] = k.get<i64>("s");
          k.contribute<i64>("s", 10);
        },
        {ReductionSpec::sum_i64("s")});
    c.join(team);
    EXPECT_EQ(c.get<i64>("s"), 133);
  });
  EXPECT_EQ(after, (std::vector<i64>{103, 103, 103}));
}

TEST(Reduction, RedeclarationIsConfigError) {
  Runtime rt;
  EXPECT_THROW(rt.run(ints({{"s", 0}}), [](Context& c) {
    auto t = c.fork(2, [](Context&) {}, {ReductionSpec::sum_i64("s"), ReductionSpec::max_i64("s")});
    c.join(t);
  }),
               ConfigError);
}

TEST(Reduction, OrdinaryWriteToReductionVariableIsConfigError) {
  Runtime rt;
  EXPECT_THROW(rt.run(ints({{"s", 0}}), [](Context& c) {
    auto t = c.fork(2, [](Context& k) { k.set<i64>("s", 5); }, {ReductionSpec::sum_i64("s")});
    c.join(t);
  }),
               ConfigError);
}

// ---- tasks ----------------------------------------------------------------------

TEST(Tasks, FutureValueAfterTaskwait) {
  Runtime rt;
  rt.run(ints({{"x", 6}}), [](Context& c) {
    Address out = c.alloc(Value::of<i64>(0));
    auto h = c.spawn([out](Context& t) { t.write(out, Value::of<i64>(t.get<i64>("x") * 7)); });
    c.taskwait(h);
    EXPECT_EQ(c.read(out).as<i64>(), 42);
  });
}

TEST(Tasks, SnapshotExcludesPostSpawnWrites) {
  Runtime rt(perturbed(1));
  i64 seen = 0;
  rt.run(ints({{"x", 1}, {"r", 0}}), [&](Context& c) {
    c.set<i64>("x", 2);
    auto h = c.spawn([&](Context& t) {
      seen = t.get<i64>("x");
      t.set<i64>("r", seen);
    });
    c.set<i64>("x", 3);
    c.taskwait(h);
    EXPECT_EQ(c.get<i64>("x"), 3);
    EXPECT_EQ(c.get<i64>("r"), 2);
  });
  EXPECT_EQ(seen, 2);
}

TEST(Tasks, PipelineMatchesSequentialComposition) {
  auto f = [](i64 x) { return x + 1; };
  auto g = [](i64 x) { return x * 2; };
  auto h = [](i64 x) { return x - 5; };
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto s = demos::pipeline(perturbed(seed), 5);
    EXPECT_EQ(s, (std::vector<i64>{f(5), g(f(5)), h(g(f(5)))}));
  }
}

TEST(Tasks, OutOfOrderWait) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto r = demos::tasks(perturbed(seed));
    EXPECT_EQ(r.a, 30);
    EXPECT_EQ(r.b, 13);
    EXPECT_GT(r.reads_checked, 0u);
    EXPECT_EQ(r.snapshot_violations, 0u);
  }
}

TEST(Tasks, ConflictingWriteRacesAtTaskwait) {
  Runtime rt;
  EXPECT_THROW(rt.run(ints({{"x", 0}}), [](Context& c) {
    auto h = c.spawn([](Context& t) { t.set<i64>("x", 1); });
    c.set<i64>("x", 2);
    c.taskwait(h);
  }),
               DataRaceError);
}

TEST(Tasks, DoubleWaitIsPairingError) {
  Runtime rt;
  EXPECT_THROW(rt.run({}, [](Context& c) {
    auto h = c.spawn([](Context&) {});
    c.taskwait(h);
    c.taskwait(h);
  }),
               PairingError);
}

TEST(Tasks, UnwaitedTaskIsConfigError) {
  Runtime rt;
  EXPECT_THROW(rt.run({}, [](Context& c) { c.spawn([](Context&) {}); }), ConfigError);
}

TEST(Tasks, TaskErrorSurfacesAtTaskwait) {
  Runtime rt;
  EXPECT_THROW(rt.run({}, [](Context& c) {
    auto h = c.spawn([](Context&) { throw ConfigError("task failed"); });
    c.taskwait(h);
  }),
               ConfigError);
}

// ---- work sharing ---------------------------------------------------------------

TEST(Schedule, StaticChunks) {
  EXPECT_EQ(static_iterations(0, 8, StaticSchedule{4}, 2, 0), (std::vector<i64>{0, 1, 2, 3}));
  EXPECT_EQ(static_iterations(0, 8, StaticSchedule{4}, 2, 1), (std::vector<i64>{4, 5, 6, 7}));
  EXPECT_EQ(static_iterations(0, 7, StaticSchedule{2}, 3, 0), (std::vector<i64>{0, 1, 6}));
  EXPECT_EQ(static_iterations(0, 10, StaticSchedule{}, 3, 2), (std::vector<i64>{8, 9}));
  EXPECT_EQ(static_owner(0, 8, StaticSchedule{4}, 2, 5), 1u);
  EXPECT_THROW(static_owner(0, 8, StaticSchedule{4}, 2, 8), ConfigError);
}

TEST(Schedule, ParallelForCoversAllCells) {
  Runtime rt(perturbed(2, 50us));
  auto ws = rt.run(cells(8), [](Context& c) {
    auto team = c.fork(2, [](Context& k) {
      k.parallel_for(0, 8, StaticSchedule{4}, [&](i64 i) { k.set<i64>("c" + std::to_string(i), i * i); });
    });
    c.join(team);
  });
  for (i64 i = 0; i < 8; ++i) EXPECT_EQ(ws.read(ws.layout().at("c" + std::to_string(i))).as<i64>(), i * i);
}

TEST(TreeFold, LeftToRightShape) {
  std::vector<Value> leaves;
  for (auto s : {"a", "b", "c", "d", "e"}) leaves.push_back(Value::of_string(s));
  std::string shape;
  auto v = tree_fold(leaves, [](const Value& a, const Value& b) {
    return Value::of_string("(" + std::string(a.bytes()) + std::string(b.bytes()) + ")");
  });
  EXPECT_EQ(v.bytes(), "(((ab)(cd))e)");
}

}  // namespace
}  // namespace dc
