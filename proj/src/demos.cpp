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

#include "dc/demos.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace dc::demos {

namespace {

using i64 = std::int64_t;

Globals ints(std::initializer_list<std::pair<const char*, i64>> xs) {
  Globals g;
  for (const auto& [n, v] : xs) g.emplace_back(n, Value::of<i64>(v));
  return g;
}

std::string label_conflicts(const GlobalLayout& layout, const std::vector<Conflict>& cs) {
  std::string s;
  for (const auto& c : cs) {
    if (!s.empty()) s += ' ';
    s += layout.label(c.address) + "{";
    for (std::size_t i = 0; i < c.writes.size(); ++i) s += (i ? "|" : "") + c.writes[i].str();
    s += "}";
  }
  return s;
}

}  // namespace

std::pair<i64, i64> swap(const RuntimeOptions& opts, i64 x0, i64 y0) {
  Runtime rt(opts);
  auto ws = rt.run(ints({{"x", x0}, {"y", y0}}), [](Context& c) {
    auto team = c.fork({[](Context& k) { k.set<i64>("x", k.get<i64>("y")); },
                        [](Context& k) { k.set<i64>("y", k.get<i64>("x")); }});
    c.join(team);
  });
  const auto& l = ws.layout();
  return {ws.read(l.at("x")).as<i64>(), ws.read(l.at("y")).as<i64>()};
}

i64 reduce_sum(const RuntimeOptions& opts, std::uint32_t threads, i64 begin, i64 end) {
  Runtime rt(opts);
  auto ws = rt.run(ints({{"sum", 0}}), [&](Context& c) {
    auto team = c.fork(
        threads,
        [&](Context& k) { k.parallel_for(begin, end, StaticSchedule{}, [&](i64 i) { k.contribute<i64>("sum", i); }); },
        {ReductionSpec::sum_i64("sum")});
    c.join(team);
  });
  return ws.read(ws.layout().at("sum")).as<i64>();
}

std::string reduce_concat(const RuntimeOptions& opts, const std::vector<std::vector<std::string>>& pieces) {
  Runtime rt(opts);
  Globals g{{"text", Value()}};
  auto ws = rt.run(g, [&](Context& c) {
    auto team = c.fork(
        static_cast<std::uint32_t>(pieces.size()),
        [&](Context& k) {
          for (const auto& p : pieces[k.rank()]) k.contribute("text", Value::of_string(p));
        },
        {ReductionSpec::concat("text")});
    c.join(team);
  });
  return std::string(ws.read(ws.layout().at("text")).bytes());
}

std::vector<i64> ordered_log(const RuntimeOptions& opts, std::uint32_t threads, i64 n, i64 chunk) {
  Runtime rt(opts);
  Globals g{{"log", Value()}};
  auto ws = rt.run(g, [&](Context& c) {
    auto team = c.fork(threads, [&](Context& k) {
      auto region = k.ordered_region(0, n, StaticSchedule{chunk});
      Address log = k.global("log");
      k.parallel_for(0, n, StaticSchedule{chunk}, [&](i64 i) {
        k.ordered(region, i, [&] {
          auto v = k.read(log).as_vector<i64>();
          v.push_back(i);
          k.write(log, Value::of_span<i64>(v));
        });
      });
    });
    c.join(team);
  });
  return ws.read(ws.layout().at("log")).as_vector<i64>();
}

TasksResult tasks(const RuntimeOptions& opts, i64 x0) {
  TasksResult out;
  std::atomic<std::uint64_t> spawn_writes{0};
  std::atomic<std::uint64_t> checked{0}, violations{0};
  RuntimeOptions o = opts;
  o.on_read = [&, user = opts.on_read](const ThreadId& reader, const Address& a, const VersionStamp& s) {
    if (user) user(reader, a, s);
    if (reader.is_root()) return;
    checked.fetch_add(1, std::memory_order_relaxed);
    if (s.writer.is_root() && s.seq > spawn_writes.load()) violations.fetch_add(1, std::memory_order_relaxed);
  };
  Runtime rt(o);
  auto ws = rt.run(ints({{"x", x0}}), [&](Context& c) {
    Address ra = c.alloc(Value::of<i64>(0));
    Address rb = c.alloc(Value::of<i64>(0));
    spawn_writes = c.workspace().write_counter();
    auto ha = c.spawn([ra](Context& t) { t.write(ra, Value::of<i64>(3 * t.get<i64>("x"))); }, "A");
    auto hb = c.spawn([rb](Context& t) { t.write(rb, Value::of<i64>(t.get<i64>("x") + 3)); }, "B");
    c.set<i64>("x", -1);
    c.taskwait(hb);
    c.taskwait(ha);
    out.a = c.read(ra).as<i64>();
    out.b = c.read(rb).as<i64>();
  });
  out.reads_checked = checked.load();
  out.snapshot_violations = violations.load();
  return out;
}

std::vector<i64> pipeline(const RuntimeOptions& opts, i64 x0) {
  Runtime rt(opts);
  std::vector<i64> out;
  rt.run(ints({{"x", x0}}), [&](Context& c) {
    Address s1 = c.alloc(Value::of<i64>(0));
    Address s2 = c.alloc(Value::of<i64>(0));
    Address s3 = c.alloc(Value::of<i64>(0));
    auto h1 = c.spawn([=](Context& t) { t.write(s1, Value::of<i64>(t.get<i64>("x") + 1)); }, "inc");
    auto h2 = c.spawn(
        [=](Context& t) {
          t.taskwait(h1);
          t.write(s2, Value::of<i64>(t.read(s1).as<i64>() * 2));
        },
        "double");
    auto h3 = c.spawn(
        [=](Context& t) {
          t.taskwait(h2);
          t.write(s3, Value::of<i64>(t.read(s2).as<i64>() - 5));
        },
        "sub5");
    c.taskwait(h3);
    out = {c.read(s1).as<i64>(), c.read(s2).as<i64>(), c.read(s3).as<i64>()};
  });
  return out;
}

std::string race(const RuntimeOptions& opts) {
  Runtime rt(opts);
  Globals g = ints({{"x", 0}, {"y", 0}});
  GlobalLayout layout(g);
  try {
    rt.run(g, [](Context& c) {
      auto team = c.fork({[](Context& k) {
                            k.set<i64>("x", 1);
                            k.set<i64>("y", 1);
                          },
                          [](Context& k) { k.set<i64>("x", 2); }});
      c.join(team);
    });
  } catch (const DataRaceError& e) {
    return label_conflicts(layout, e.conflicts());
  }
  return {};
}

const std::vector<std::string>& names() {
  static const std::vector<std::string> kNames = {"swap", "pipeline", "reduce", "ordered", "tasks", "race"};
  return kNames;
}

Result run(std::string_view name, const RuntimeOptions& opts) {
  std::ostringstream os;
  if (name == "swap") {
    auto [x, y] = swap(opts);
    os << "initial x=1 y=2\nfinal x=" << x << " y=" << y << '\n';
    return {0, os.str()};
  }
  if (name == "pipeline") {
    auto s = pipeline(opts);
    os << "x=5\ninc=" << s[0] << "\ndouble=" << s[1] << "\nsub5=" << s[2] << '\n';
    return {0, os.str()};
  }
  if (name == "reduce") {
    os << "sum[0,100)=" << reduce_sum(opts) << '\n';
    os << "concat=" << reduce_concat(opts, {{"a"}, {"b"}, {"c"}, {"d"}}) << '\n';
    return {0, os.str()};
  }
  if (name == "ordered") {
    auto log = ordered_log(opts, 4, 16);
    os << "log=";
    for (std::size_t i = 0; i < log.size(); ++i) os << (i ? "," : "") << log[i];
    os << "\nascending=" << (std::is_sorted(log.begin(), log.end()) ? "true" : "false") << '\n';
    return {0, os.str()};
  }
  if (name == "tasks") {
    auto r = tasks(opts);
    os << "x=10\nA(3*x)=" << r.a << "\nB(x+3)=" << r.b << "\nsnapshot_violations=" << r.snapshot_violations << '\n';
    return {0, os.str()};
  }
  if (name == "race") {
    auto payload = race(opts);
    if (payload.empty()) return {1, "no race detected\n"};
    os << "data race: " << payload << '\n';
    return {3, os.str()};
  }
  throw std::invalid_argument("unknown demo '" + std::string(name) + "'");
}

}  // namespace dc::demos
