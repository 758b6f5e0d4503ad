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

#include "dc/runtime.hpp"

#include <algorithm>
#include <future>
#include <limits>
#include <mutex>
#include <thread>

namespace dc {

namespace detail {

struct TeamState {
  ThreadId parent;
  std::uint64_t instance = 0;
  std::vector<ThreadId> members;
  std::vector<ReductionSpec> reductions;
  std::vector<Address> reduction_addrs;
  // Written by each member before its death release; read by the parent
  // after draining that release (ordered by the registry lock).
  std::vector<std::exception_ptr> errors;

  void declare(const GlobalLayout& layout, ReductionSpec spec) {
    Address a = layout.at(spec.variable);
    if (std::find(reduction_addrs.begin(), reduction_addrs.end(), a) != reduction_addrs.end()) {
      throw ConfigError("reduction on '" + spec.variable + "' declared twice in one region");
    }
    if (!spec.combine) throw ConfigError("reduction on '" + spec.variable + "' has no combine operator");
    reduction_addrs.push_back(a);
    reductions.push_back(std::move(spec));
  }

  std::optional<std::size_t> reduction_index(const Address& a) const {
    auto it = std::find(reduction_addrs.begin(), reduction_addrs.end(), a);
    if (it == reduction_addrs.end()) return std::nullopt;
    return static_cast<std::size_t>(it - reduction_addrs.begin());
  }

  ConstructKey death_key(std::uint32_t rank) const {
    return ConstructKey{ConstructKey::Kind::kDeath, parent, instance, 0, 0, rank, 0};
  }
  ConstructKey tree_key(ConstructKey::Kind kind, std::uint64_t round, std::uint32_t from,
                        std::uint32_t to) const {
    return ConstructKey{kind, parent, instance, 0, round, from, to};
  }
};

struct TaskState {
  ThreadId id;
  std::exception_ptr error;  // published before the death release
  std::promise<void> done;
  std::shared_future<void> finished = done.get_future().share();

  ConstructKey death_key() const { return ConstructKey{ConstructKey::Kind::kDeath, id, 0, 0, 0, 0, 0}; }
};

// Payload carried along barrier tree edges.
struct TreePayload {
  MergedDiff merged;
  std::vector<Value> partials;
  std::vector<std::optional<std::pair<SyncLabel, SyncLabel>>> labels;  // by rank
};

struct Core {
  explicit Core(RuntimeOptions o) : options(std::move(o)), registry(options.trace) {}

  RuntimeOptions options;
  ChannelRegistry registry;
  std::mutex threads_mu;
  std::vector<std::thread> threads;

  void launch(std::function<void()> f) {
    std::lock_guard lk(threads_mu);
    threads.emplace_back(std::move(f));
  }

  void join_all() {
    for (;;) {
      std::vector<std::thread> batch;
      {
        std::lock_guard lk(threads_mu);
        batch.swap(threads);
      }
      if (batch.empty()) return;
      for (auto& t : batch) t.join();
    }
  }

  static void member_main(std::shared_ptr<Core> core, std::shared_ptr<TeamState> team, std::uint32_t rank,
                          Body body, std::shared_ptr<const GlobalLayout> layout, SyncLabel fork_label) {
    ThreadId id = team->members[rank];
    {
      Context ctx(core, Workspace(id, std::move(layout)), team, rank);
      std::exception_ptr err;
      try {
        ctx.acquire(fork_label);
        body(ctx);
      } catch (...) {
        err = std::current_exception();
      }
      try {
        ctx.finish_tasks();
      } catch (...) {
        if (!err) err = std::current_exception();
      }
      team->errors[rank] = err;
      try {
        auto partials = std::make_shared<const std::vector<Value>>(ctx.partials_);
        ctx.ep_.release_keyed(team->death_key(rank), partials);
      } catch (...) {
        // The parent's join surfaces a missing death release as a deadlock.
      }
    }
    core->registry.thread_exited(id);
  }

  static void task_main(std::shared_ptr<Core> core, std::shared_ptr<TaskState> task, Body body,
                        std::shared_ptr<const GlobalLayout> layout, SyncLabel spawn_label) {
    {
      Context ctx(core, Workspace(task->id, std::move(layout)), nullptr, 0);
      std::exception_ptr err;
      try {
        ctx.acquire(spawn_label);
        body(ctx);
      } catch (...) {
        err = std::current_exception();
      }
      try {
        ctx.finish_tasks();
      } catch (...) {
        if (!err) err = std::current_exception();
      }
      task->error = err;
      try {
        ctx.ep_.release_keyed(task->death_key());
      } catch (...) {
      }
    }
    task->done.set_value();
    core->registry.thread_exited(task->id);
  }
};

}  // namespace detail

ReductionSpec ReductionSpec::sum_i64(std::string variable) {
  return of<std::int64_t>(std::move(variable), 0, [](std::int64_t a, std::int64_t b) { return a + b; });
}

ReductionSpec ReductionSpec::max_i64(std::string variable) {
  return of<std::int64_t>(std::move(variable), std::numeric_limits<std::int64_t>::min(),
                          [](std::int64_t a, std::int64_t b) { return std::max(a, b); });
}

ReductionSpec ReductionSpec::concat(std::string variable) {
  return ReductionSpec{std::move(variable), Value(), [](const Value& a, const Value& b) {
                         std::string s(a.bytes());
                         s.append(b.bytes());
                         return Value(std::move(s));
                       }};
}

namespace {

std::int64_t effective_chunk(std::int64_t begin, std::int64_t end, StaticSchedule s, std::uint32_t n) {
  if (s.chunk > 0) return s.chunk;
  std::int64_t total = std::max<std::int64_t>(end - begin, 0);
  return std::max<std::int64_t>(1, (total + n - 1) / n);
}

}  // namespace

std::uint32_t static_owner(std::int64_t begin, std::int64_t end, StaticSchedule s, std::uint32_t team_size,
                           std::int64_t i) {
  if (team_size == 0) throw ConfigError("static schedule over an empty team");
  if (i < begin || i >= end) throw ConfigError("iteration " + std::to_string(i) + " outside loop range");
  std::int64_t chunk = effective_chunk(begin, end, s, team_size);
  return static_cast<std::uint32_t>(((i - begin) / chunk) % team_size);
}

std::vector<std::int64_t> static_iterations(std::int64_t begin, std::int64_t end, StaticSchedule s,
                                            std::uint32_t team_size, std::uint32_t rank) {
  std::vector<std::int64_t> out;
  if (begin >= end) return out;
  std::int64_t chunk = effective_chunk(begin, end, s, team_size);
  for (std::int64_t c = begin + chunk * rank; c < end; c += chunk * team_size) {
    for (std::int64_t i = c; i < std::min(end, c + chunk); ++i) out.push_back(i);
  }
  return out;
}

Value tree_fold(std::vector<Value> leaves, const std::function<Value(const Value&, const Value&)>& combine) {
  if (leaves.empty()) throw ConfigError("tree_fold over no leaves");
  for (std::size_t s = 1; s < leaves.size(); s <<= 1) {
    for (std::size_t r = 0; r + s < leaves.size(); r += 2 * s) leaves[r] = combine(leaves[r], leaves[r + s]);
  }
  return leaves[0];
}

std::uint32_t Team::size() const { return static_cast<std::uint32_t>(state_->members.size()); }
const ThreadId& Team::member(std::uint32_t rank) const { return state_->members.at(rank); }
std::uint64_t Team::instance() const { return state_->instance; }

std::uint32_t OrderedRegion::owner(std::int64_t i) const {
  return static_owner(begin_, end_, schedule_, team_size_, i);
}

Context::Context(std::shared_ptr<detail::Core> core, Workspace ws, std::shared_ptr<detail::TeamState> team,
                 std::uint32_t rank)
    : core_(std::move(core)),
      ws_(std::move(ws)),
      ep_(ws_, core_->registry, [this] { perturb(); }),
      team_(std::move(team)),
      rank_(rank) {
  if (team_) {
    for (const auto& r : team_->reductions) partials_.push_back(r.identity);
  }
  if (core_->options.perturbation_seed) {
    std::vector<std::uint32_t> seed{static_cast<std::uint32_t>(*core_->options.perturbation_seed),
                                    static_cast<std::uint32_t>(*core_->options.perturbation_seed >> 32)};
    for (auto p : id().path()) seed.push_back(p);
    seed.push_back(static_cast<std::uint32_t>(id().path().size()));
    std::seed_seq seq(seed.begin(), seed.end());
    rng_.seed(seq);
  }
}

Context::~Context() = default;

void Context::perturb() {
  if (!core_->options.perturbation_seed) return;
  auto max = core_->options.max_delay.count();
  if (max <= 0) return;
  std::uniform_int_distribution<std::int64_t> d(0, max);
  std::this_thread::sleep_for(std::chrono::microseconds(d(rng_)));
}

const Value& Context::read(const Address& a) {
  perturb();
  const auto& c = ws_.cell(a);
  if (core_->options.on_read) core_->options.on_read(id(), a, c.stamp);
  return c.value;
}

void Context::write(const Address& a, Value v) {
  perturb();
  if (team_ && team_->reduction_index(a)) {
    throw ConfigError("ordinary write to reduction variable " + ws_.layout().label(a));
  }
  ws_.write(a, std::move(v));
}

Address Context::alloc(Value init) {
  perturb();
  return ws_.alloc(std::move(init));
}

std::uint32_t Context::team_size() const {
  return team_ ? static_cast<std::uint32_t>(team_->members.size()) : 1;
}

Team Context::fork(std::uint32_t n, const Body& body, std::vector<ReductionSpec> reductions) {
  return fork(std::vector<Body>(n, body), std::move(reductions));
}

Team Context::fork(std::vector<Body> bodies, std::vector<ReductionSpec> reductions) {
  if (bodies.empty()) throw ConfigError("fork with no thread bodies");
  auto team = std::make_shared<detail::TeamState>();
  team->parent = id();
  team->instance = ++fork_count_;
  for (auto& r : reductions) team->declare(ws_.layout(), std::move(r));
  std::vector<SyncLabel> births;
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    team->members.push_back(id().child(++spawn_ordinal_));
    births.push_back(SyncLabel{team->members.back(), 1});
  }
  team->errors.resize(bodies.size());
  for (const auto& m : team->members) core_->registry.register_thread(m);

  SyncLabel fork_label = next_label();
  ep_.release_set(births);
  for (std::uint32_t r = 0; r < bodies.size(); ++r) {
    core_->launch([core = core_, team, r, body = std::move(bodies[r]), layout = ws_.layout_ptr(), fork_label] {
      detail::Core::member_main(core, team, r, body, layout, fork_label);
    });
  }
  return Team(team);
}

void Context::join(Team& team) {
  auto& st = *team.state_;
  perturb();
  SyncLabel self = ep_.bump();
  std::vector<Message> deaths;
  for (std::uint32_t r = 0; r < st.members.size(); ++r) {
    deaths.push_back(core_->registry.take(st.death_key(r), self, st.members[r]));
  }
  for (const auto& e : st.errors) {
    if (e) std::rethrow_exception(e);
  }
  MergedDiff merged;
  for (const auto& d : deaths) merged.join(MergedDiff(*d.diff));
  ws_.apply(merged);
  for (std::size_t j = 0; j < st.reductions.size(); ++j) {
    std::vector<Value> leaves;
    for (const auto& d : deaths) {
      leaves.push_back((*std::static_pointer_cast<const std::vector<Value>>(d.attachment))[j]);
    }
    write_reduction_result(st.reductions[j], tree_fold(std::move(leaves), st.reductions[j].combine));
  }
}

void Context::write_reduction_result(const ReductionSpec& spec, const Value& folded) {
  Address a = ws_.layout().at(spec.variable);
  ws_.write(a, spec.combine(ws_.read(a), folded));
}

void Context::barrier() {
  using Kind = ConstructKey::Kind;
  perturb();
  const std::uint64_t round = ++barrier_round_;
  SyncLabel rel = ep_.bump();
  SyncLabel acq = ep_.bump();
  if (!team_) return;
  auto& st = *team_;
  auto& registry = core_->registry;
  const auto n = static_cast<std::uint32_t>(st.members.size());

  // Combine up: rank r absorbs r+s at stride s, keeping leaves in rank order.
  auto up = std::make_shared<detail::TreePayload>();
  up->merged = MergedDiff(ws_.extract_diff());
  up->partials = partials_;
  up->labels.assign(n, std::nullopt);
  up->labels[rank_] = std::make_pair(rel, acq);
  for (std::uint32_t s = 1; s < n; s <<= 1) {
    if (rank_ % (2 * s) != 0) {
      registry.deposit(st.tree_key(Kind::kTreeUp, round, rank_, rank_ - s), Message{rel, nullptr, up});
      break;
    }
    if (rank_ + s >= n) continue;
    Message m = registry.take(st.tree_key(Kind::kTreeUp, round, rank_ + s, rank_), rel, st.members[rank_ + s],
                              false);
    auto q = std::static_pointer_cast<const detail::TreePayload>(m.attachment);
    up->merged.join(q->merged);
    for (std::size_t j = 0; j < up->partials.size(); ++j) {
      up->partials[j] = st.reductions[j].combine(up->partials[j], q->partials[j]);
    }
    for (std::uint32_t r = 0; r < n; ++r) {
      if (q->labels[r]) up->labels[r] = q->labels[r];
    }
  }

  std::shared_ptr<const detail::TreePayload> down;
  std::uint32_t fan = 1;
  if (rank_ == 0) {
    auto d = std::make_shared<detail::TreePayload>();
    d->labels = up->labels;
    if (up->merged.conflicts().empty()) {
      ws_.apply(up->merged);
      for (std::size_t j = 0; j < st.reductions.size(); ++j) {
        write_reduction_result(st.reductions[j], up->partials[j]);
      }
      d->merged = MergedDiff(ws_.extract_diff());
    } else {
      d->merged = std::move(up->merged);
    }
    down = d;
    while (fan < n) fan <<= 1;
  } else {
    fan = rank_ & (~rank_ + 1);
    Message m = registry.take(st.tree_key(Kind::kTreeDown, round, rank_ - fan, rank_), acq,
                              st.members[rank_ - fan], false);
    down = std::static_pointer_cast<const detail::TreePayload>(m.attachment);
  }
  for (std::uint32_t s = fan >> 1; s >= 1; s >>= 1) {
    if (rank_ + s < n) {
      registry.deposit(st.tree_key(Kind::kTreeDown, round, rank_, rank_ + s), Message{acq, nullptr, down});
    }
  }

  if (registry.tracing()) {
    for (std::uint32_t p = 0; p < n; ++p) {
      if (p == rank_ || !down->labels[p]) continue;
      const auto& [prel, pacq] = *down->labels[p];
      registry.record("EVT " + id().str() + " " + std::to_string(rel.seq) + " REL " + pacq.thread.str() + " " +
                      std::to_string(pacq.seq));
      registry.record("EVT " + id().str() + " " + std::to_string(acq.seq) + " ACQ " + prel.thread.str() + " " +
                      std::to_string(prel.seq));
    }
  }

  // Every member applies the same merged state, so a race surfaces
  // identically in all of them; the workspace is untouched on error.
  ws_.apply(down->merged);
  for (std::size_t j = 0; j < partials_.size(); ++j) partials_[j] = st.reductions[j].identity;
}

void Context::barrier_pairwise() {
  if (!team_ || team_->members.size() == 1) {
    perturb();
    ep_.bump();
    ep_.bump();
    ++barrier_round_;
    return;
  }
  if (!team_->reductions.empty()) throw ConfigError("pairwise barrier does not fold reductions");
  const std::uint64_t c = ep_.counter();
  std::vector<SyncLabel> to_acquirers;
  std::vector<SyncLabel> from_releasers;
  for (std::uint32_t p = 0; p < team_->members.size(); ++p) {
    if (p == rank_) continue;
    to_acquirers.push_back(SyncLabel{team_->members[p], c + 2});
    from_releasers.push_back(SyncLabel{team_->members[p], c + 1});
  }
  ++barrier_round_;
  ep_.release_set(to_acquirers);
  ep_.acquire_set(from_releasers);
}

void Context::contribute(std::string_view variable, const Value& v) {
  perturb();
  std::optional<std::size_t> idx;
  if (team_) {
    if (auto a = ws_.layout().find(variable)) idx = team_->reduction_index(*a);
  }
  if (!idx) throw ConfigError("no reduction declared on '" + std::string(variable) + "'");
  partials_[*idx] = team_->reductions[*idx].combine(partials_[*idx], v);
}

void Context::parallel_for(std::int64_t begin, std::int64_t end, StaticSchedule s,
                           const std::function<void(std::int64_t)>& body) {
  for (auto i : static_iterations(begin, end, s, team_size(), rank_)) body(i);
}

OrderedRegion Context::ordered_region(std::int64_t begin, std::int64_t end, StaticSchedule s) {
  OrderedRegion r;
  r.scope_ = team_ ? team_->parent : id();
  r.team_instance_ = team_ ? team_->instance : 0;
  r.ordinal_ = ++region_count_;
  r.begin_ = begin;
  r.end_ = end;
  r.schedule_ = s;
  r.team_size_ = team_size();
  return r;
}

void Context::ordered(const OrderedRegion& region, std::int64_t i, const std::function<void()>& body) {
  if (region.owner(i) != rank_) {
    throw ConfigError("ordered iteration " + std::to_string(i) + " is not owned by rank " + std::to_string(rank_));
  }
  auto key = [&](std::int64_t from) {
    return ConstructKey{ConstructKey::Kind::kOrdered, region.scope_, region.team_instance_, region.ordinal_,
                        static_cast<std::uint64_t>(from - region.begin_), region.owner(from),
                        region.owner(from + 1)};
  };
  if (i > region.begin_) {
    auto prev = region.owner(i - 1);
    if (prev != rank_) {
      Message m = ep_.acquire_keyed(key(i - 1), team_->members[prev]);
      ws_.apply(*m.diff);
    }
  }
  body();
  if (i + 1 < region.end_ && region.owner(i + 1) != rank_) ep_.release_keyed(key(i));
}

TaskHandle Context::spawn(const Body& body, std::string name) {
  auto task = std::make_shared<detail::TaskState>();
  task->id = id().child(++spawn_ordinal_);
  core_->registry.register_thread(task->id);
  SyncLabel label = next_label();
  ep_.release(SyncLabel{task->id, 1});
  core_->launch([core = core_, task, body, layout = ws_.layout_ptr(), label] {
    detail::Core::task_main(core, task, body, layout, label);
  });
  tasks_.push_back(task);
  return TaskHandle(task->id, label, std::move(name), task);
}

void Context::taskwait(const TaskHandle& handle) {
  Message m = ep_.acquire_keyed(handle.state_->death_key(), handle.task());
  if (handle.state_->error) std::rethrow_exception(handle.state_->error);
  ws_.apply(*m.diff);
}

void Context::finish_tasks() {
  auto tasks = std::move(tasks_);
  tasks_.clear();
  std::vector<std::string> orphans;
  for (const auto& t : tasks) {
    t->finished.wait();
    if (!core_->registry.consumed(t->death_key())) orphans.push_back(t->id.str());
  }
  if (!orphans.empty()) {
    std::string list;
    for (const auto& o : orphans) list += (list.empty() ? "" : ",") + o;
    throw ConfigError("task(s) never waited: " + list);
  }
}

Runtime::Runtime(RuntimeOptions options) : options_(std::move(options)) {}

Runtime::~Runtime() {
  if (last_) last_->join_all();
}

Workspace Runtime::run(const Globals& globals, const Body& body) {
  if (last_) last_->join_all();
  auto core = std::make_shared<detail::Core>(options_);
  last_ = core;
  auto layout = std::make_shared<const GlobalLayout>(globals);
  core->registry.register_thread(ThreadId::root());
  std::exception_ptr err;
  std::optional<Workspace> result;
  {
    Context ctx(core, Workspace::init(ThreadId::root(), layout, globals), nullptr, 0);
    try {
      body(ctx);
    } catch (...) {
      err = std::current_exception();
    }
    try {
      ctx.finish_tasks();
    } catch (...) {
      if (!err) err = std::current_exception();
    }
    result.emplace(ctx.take_workspace());
  }
  core->registry.thread_exited(ThreadId::root());
  core->join_all();
  if (err) std::rethrow_exception(err);
  return std::move(*result);
}

std::vector<Runtime::PeerResult> Runtime::run_peers(const Globals& globals, const std::vector<Body>& bodies) {
  if (last_) last_->join_all();
  auto core = std::make_shared<detail::Core>(options_);
  last_ = core;
  auto layout = std::make_shared<const GlobalLayout>(globals);
  const auto n = static_cast<std::uint32_t>(bodies.size());
  std::vector<std::optional<Workspace>> finals(n);
  std::vector<std::exception_ptr> errors(n);
  for (std::uint32_t k = 0; k < n; ++k) core->registry.register_thread(ThreadId(k));
  for (std::uint32_t k = 0; k < n; ++k) {
    core->launch([&, k] {
      {
        Context ctx(core, Workspace::init(ThreadId(k), layout, globals), nullptr, 0);
        try {
          bodies[k](ctx);
        } catch (...) {
          errors[k] = std::current_exception();
        }
        try {
          ctx.finish_tasks();
        } catch (...) {
          if (!errors[k]) errors[k] = std::current_exception();
        }
        finals[k].emplace(ctx.take_workspace());
      }
      core->registry.thread_exited(ThreadId(k));
    });
  }
  core->join_all();
  std::vector<PeerResult> out;
  for (std::uint32_t k = 0; k < n; ++k) out.push_back(PeerResult{std::move(*finals[k]), errors[k]});
  return out;
}

std::vector<std::string> Runtime::trace() const {
  return last_ ? last_->registry.trace() : std::vector<std::string>{};
}

}  // namespace dc
