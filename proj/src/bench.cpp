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

#include "dc/bench.hpp"

#include <algorithm>
#include <barrier>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>
#include <thread>
#include <vector>

#include "dc/runtime.hpp"

namespace dc::bench {

namespace {

using Clock = std::chrono::steady_clock;

inline double transform(double x, std::uint32_t work) {
  for (std::uint32_t k = 0; k < work; ++k) x = x * 0.999 + std::sin(x) * 0.001 + 1e-6;
  return x;
}

std::vector<double> initial(std::uint64_t n) {
  std::vector<double> v(n);
  for (std::uint64_t i = 0; i < n; ++i) v[i] = static_cast<double>(i % 1024) / 1024.0;
  return v;
}

std::pair<std::uint64_t, std::uint64_t> block(std::uint64_t n, std::uint32_t t, std::uint32_t r) {
  std::uint64_t per = (n + t - 1) / t;
  std::uint64_t lo = std::min<std::uint64_t>(n, per * r);
  return {lo, std::min<std::uint64_t>(n, lo + per)};
}

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double baseline(const Config& c, std::vector<double>& data) {
  auto t0 = Clock::now();
  std::barrier sync(c.threads);
  std::vector<std::thread> pool;
  for (std::uint32_t r = 0; r < c.threads; ++r) {
    pool.emplace_back([&, r] {
      auto [lo, hi] = block(data.size(), c.threads, r);
      for (std::uint32_t round = 0; round < c.rounds; ++round) {
        for (auto i = lo; i < hi; ++i) data[i] = transform(data[i], c.work);
        sync.arrive_and_wait();
      }
    });
  }
  for (auto& t : pool) t.join();
  return ms_since(t0);
}

double with_runtime(const Config& c, std::vector<double>& data) {
  Globals g;
  for (std::uint32_t r = 0; r < c.threads; ++r) {
    auto [lo, hi] = block(data.size(), c.threads, r);
    g.emplace_back("part" + std::to_string(r), Value::of_span<double>(std::span(data).subspan(lo, hi - lo)));
  }
  auto t0 = Clock::now();
  Runtime rt;
  auto ws = rt.run(g, [&](Context& ctx) {
    auto team = ctx.fork(c.threads, [&](Context& k) {
      Address part = k.global("part" + std::to_string(k.rank()));
      for (std::uint32_t round = 0; round < c.rounds; ++round) {
        auto in = k.read(part).view<double>();
        std::string out(in.size() * sizeof(double), '\0');
        auto* o = reinterpret_cast<double*>(out.data());
        for (std::size_t i = 0; i < in.size(); ++i) o[i] = transform(in[i], c.work);
        k.write(part, Value(std::move(out)));
        k.barrier();
      }
    });
    ctx.join(team);
  });
  double elapsed = ms_since(t0);
  for (std::uint32_t r = 0; r < c.threads; ++r) {
    auto [lo, hi] = block(data.size(), c.threads, r);
    auto v = ws.read(ws.layout().at("part" + std::to_string(r))).view<double>();
    std::memcpy(data.data() + lo, v.data(), (hi - lo) * sizeof(double));
  }
  return elapsed;
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  auto n = xs.size();
  return n % 2 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2;
}

}  // namespace

Config coarse() { return Config{}; }

Config fine() {
  Config c;
  c.name = "fine";
  c.size = 256;
  c.rounds = 2000;
  c.work = 2;
  return c;
}

std::uint32_t thread_cap(std::uint32_t requested) {
  if (const char* env = std::getenv("DC_MAX_THREADS")) {
    char* end = nullptr;
    long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) return std::min<std::uint32_t>(requested, static_cast<std::uint32_t>(cap));
  }
  return requested;
}

BenchReport run(Config cfg) {
  cfg.threads = std::max<std::uint32_t>(1, thread_cap(cfg.threads));
  cfg.reps = std::max<std::uint32_t>(1, cfg.reps);
  BenchReport rep;
  rep.benchmark = cfg.name;
  rep.threads = cfg.threads;
  rep.reps = cfg.reps;
  rep.size = cfg.size;
  rep.rounds = cfg.rounds;
  std::vector<double> base_ms, dc_ms;
  for (std::uint32_t i = 0; i < cfg.reps; ++i) {
    auto a = initial(cfg.size);
    auto b = a;
    base_ms.push_back(baseline(cfg, a));
    dc_ms.push_back(with_runtime(cfg, b));
    if (std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) != 0) rep.checksum_match = false;
  }
  rep.baseline_ms = median(base_ms);
  rep.dc_ms = median(dc_ms);
  return rep;
}

}  // namespace dc::bench
