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

#include <thread>

#include "dc/sync.hpp"

namespace dc {
namespace {

using i64 = std::int64_t;

struct Peer {
  Peer(std::uint32_t id, const Globals& g, ChannelRegistry& reg)
      : ws(Workspace::init(ThreadId(id), g)), ep(ws, reg) {
    reg.register_thread(ThreadId(id));
  }
  Workspace ws;
  SyncEndpoint ep;
};

SyncLabel L(std::uint32_t t, std::uint64_t n) { return {ThreadId(t), n}; }

Globals xy() { return {{"x", Value::of<i64>(1)}, {"y", Value::of<i64>(2)}}; }

TEST(Release, DepositsOnLabeledChannel) {
  ChannelRegistry reg;
  Peer t1(1, xy(), reg), t2(2, xy(), reg);
  EXPECT_EQ(t1.ep.next_label(), L(1, 1));
  t1.ws.write(t1.ws.layout().at("x"), Value::of<i64>(5));
  t1.ep.release(L(2, 1));
  EXPECT_EQ(reg.undrained(), 1u);
  t2.ep.acquire(L(1, 1));
  EXPECT_TRUE(reg.consumed(ChannelId{L(1, 1), L(2, 1)}));
  EXPECT_EQ(t2.ws.read(t2.ws.layout().at("x")).as<i64>(), 5);
  EXPECT_EQ(t1.ep.counter(), 1u);
  EXPECT_EQ(t2.ep.counter(), 1u);
}

TEST(Release, EmptyDiffStillSynchronizes) {
  ChannelRegistry reg;
  Peer t1(1, {}, reg), t2(2, {}, reg);
  t1.ep.release(L(2, 1));
  t2.ep.acquire(L(1, 1));
  EXPECT_EQ(reg.undrained(), 0u);
}

TEST(Acquire, BlocksUntilRelease) {
  ChannelRegistry reg;
  Peer t1(1, xy(), reg), t2(2, xy(), reg);
  std::thread th([&] {
    t2.ep.acquire(L(1, 1));
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  t1.ws.write(t1.ws.layout().at("y"), Value::of<i64>(9));
  t1.ep.release(L(2, 1));
  th.join();
  EXPECT_EQ(t2.ws.read(t2.ws.layout().at("y")).as<i64>(), 9);
}

TEST(Pairing, TwoReleasesToOneAcquire) {
  // Deterministic payload regardless of which stray release arrives when.
  for (int order = 0; order < 3; ++order) {
    ChannelRegistry reg;
    Peer t0(0, {}, reg), t1(1, {}, reg), t3(3, {}, reg);
    std::vector<std::string> errors;
    auto rel = [&](Peer& p) {
      try {
        p.ep.release(L(3, 1));
      } catch (const PairingError& e) {
        errors.push_back(e.channel());
      }
    };
    if (order == 0) {
      rel(t0);
      rel(t1);
      try {
        t3.ep.acquire(L(0, 1));
      } catch (const PairingError& e) {
        errors.push_back(e.channel());
      }
    } else if (order == 1) {
      rel(t1);
      try {
        t3.ep.acquire(L(0, 1));
      } catch (const PairingError& e) {
        errors.push_back(e.channel());
      }
      rel(t0);
    } else {
      rel(t0);
      t3.ep.acquire(L(0, 1));
      rel(t1);
    }
    ASSERT_EQ(errors.size(), 1u) << "order " << order;
    EXPECT_EQ(errors[0], "*->(3,1)");
  }
}

TEST(Pairing, AcquireSetAcceptsSeveralReleasers) {
  ChannelRegistry reg;
  Peer t0(0, {}, reg), t1(1, {}, reg), t2(2, {}, reg);
  t0.ep.release(L(2, 1));
  t1.ep.release(L(2, 1));
  std::vector<SyncLabel> from{L(1, 1), L(0, 1)};
  EXPECT_NO_THROW(t2.ep.acquire_set(from));
}

TEST(Deadlock, CrossedAcquiresFailBoth) {
  ChannelRegistry reg;
  Peer t1(1, {}, reg), t2(2, {}, reg);
  std::vector<std::vector<ThreadId>> seen(2);
  std::thread a([&] {
    try {
      t1.ep.acquire(L(2, 2));
    } catch (const DeadlockError& e) {
      seen[0] = e.blocked();
    }
  });
  std::thread b([&] {
    try {
      t2.ep.acquire(L(1, 2));
    } catch (const DeadlockError& e) {
      seen[1] = e.blocked();
    }
  });
  a.join();
  b.join();
  std::vector<ThreadId> both{ThreadId(1), ThreadId(2)};
  EXPECT_EQ(seen[0], both);
  EXPECT_EQ(seen[1], both);
}

TEST(Deadlock, PartnerExitedWithoutReleasing) {
  ChannelRegistry reg;
  Peer t1(1, {}, reg), t2(2, {}, reg);
  reg.thread_exited(ThreadId(2));
  try {
    t1.ep.acquire(L(2, 1));
    FAIL();
  } catch (const DeadlockError& e) {
    EXPECT_EQ(e.blocked(), std::vector<ThreadId>{ThreadId(1)});
  }
}

TEST(Broadcast, SingleLabelForWholeSet) {
  ChannelRegistry reg;
  Peer t0(0, xy(), reg), t1(1, xy(), reg), t2(2, xy(), reg);
  t0.ws.write(t0.ws.layout().at("x"), Value::of<i64>(7));
  std::vector<SyncLabel> to{L(2, 1), L(1, 1)};
  t0.ep.release_set(to);
  EXPECT_EQ(t0.ep.counter(), 1u);
  t1.ep.acquire(L(0, 1));
  t2.ep.acquire(L(0, 1));
  EXPECT_EQ(t1.ws.cells(), t2.ws.cells());
  EXPECT_EQ(t1.ws.read(t1.ws.layout().at("x")).as<i64>(), 7);
  EXPECT_TRUE(t1.ws.knowledge().dominates(t0.ws.knowledge()));
  EXPECT_TRUE(t2.ws.knowledge().dominates(t0.ws.knowledge()));
}

TEST(Broadcast, EquivalentToPairwiseReleases) {
  auto run = [](bool broadcast) {
    ChannelRegistry reg;
    std::vector<std::unique_ptr<Peer>> ps;
    Globals g{{"a", Value()}, {"b", Value()}, {"c", Value()}};
    for (std::uint32_t t = 0; t < 4; ++t) ps.push_back(std::make_unique<Peer>(t, g, reg));
    ps[0]->ws.write(ps[0]->ws.layout().at("a"), Value::of_string("A"));
    std::vector<SyncLabel> to{L(1, 1), L(2, 1), L(3, 1)};
    if (broadcast) {
      ps[0]->ep.release_set(to);
    } else {
      for (const auto& l : to) ps[0]->ep.release(l);
    }
    std::vector<std::string> out;
    for (std::uint32_t t = 1; t < 4; ++t) {
      ps[t]->ep.acquire(SyncLabel{ThreadId(0), broadcast ? 1 : t});
      out.push_back(ps[t]->ws.serialize());
    }
    return out;
  };
  EXPECT_EQ(run(true), run(false));
}

TEST(AcquireSet, DisjointWritesUnion) {
  ChannelRegistry reg;
  Globals g{{"a", Value()}, {"b", Value()}};
  Peer t0(0, g, reg), t1(1, g, reg), t2(2, g, reg);
  t1.ws.write(t1.ws.layout().at("a"), Value::of_string("1"));
  t2.ws.write(t2.ws.layout().at("b"), Value::of_string("2"));
  t1.ep.release(L(0, 1));
  t2.ep.release(L(0, 1));
  std::vector<SyncLabel> from{L(2, 1), L(1, 1)};
  t0.ep.acquire_set(from);
  EXPECT_EQ(t0.ws.read(t0.ws.layout().at("a")).bytes(), "1");
  EXPECT_EQ(t0.ws.read(t0.ws.layout().at("b")).bytes(), "2");
}

TEST(AcquireSet, RaceAmongPartnersIsOrderIndependent) {
  std::vector<std::string> payloads;
  for (int order = 0; order < 2; ++order) {
    ChannelRegistry reg;
    Globals g{{"a", Value()}};
    Peer t0(0, g, reg), t1(1, g, reg), t2(2, g, reg);
    t1.ws.write(t1.ws.layout().at("a"), Value::of_string("1"));
    t2.ws.write(t2.ws.layout().at("a"), Value::of_string("2"));
    if (order == 0) {
      t1.ep.release(L(0, 1));
      t2.ep.release(L(0, 1));
    } else {
      t2.ep.release(L(0, 1));
      t1.ep.release(L(0, 1));
    }
    std::vector<SyncLabel> from{L(1, 1), L(2, 1)};
    try {
      t0.ep.acquire_set(from);
    } catch (const DataRaceError& e) {
      payloads.push_back(describe(e.conflicts()));
    }
  }
  ASSERT_EQ(payloads.size(), 2u);
  EXPECT_EQ(payloads[0], payloads[1]);
  EXPECT_EQ(payloads[0], "[0:1]{(1,1)|(2,1)}");
}

TEST(AcquireSet, EmptyWritesAdvanceKnowledgeOnly) {
  ChannelRegistry reg;
  Peer t0(0, xy(), reg), t1(1, xy(), reg);
  auto before = t0.ws.cells();
  t1.ep.release(L(0, 1));
  std::vector<SyncLabel> from{L(1, 1)};
  t0.ep.acquire_set(from);
  EXPECT_EQ(t0.ws.cells(), before);
}

TEST(Trace, RecordsMatchedPairs) {
  ChannelRegistry reg(true);
  Peer t1(1, {}, reg), t2(2, {}, reg);
  t1.ep.release(L(2, 1));
  t2.ep.acquire(L(1, 1));
  EXPECT_EQ(reg.trace(), (std::vector<std::string>{"EVT 1 1 REL 2 1", "EVT 2 1 ACQ 1 1"}));
}

}  // namespace
}  // namespace dc
