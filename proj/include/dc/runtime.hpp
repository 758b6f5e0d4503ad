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
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dc/ids.hpp"
#include "dc/store.hpp"
#include "dc/sync.hpp"
#include "dc/value.hpp"

namespace dc {

class Context;
using Body = std::function<void(Context&)>;

struct RuntimeOptions {
  /// When set, every workspace and sync operation is preceded by a seeded
  /// pseudo-random sleep in [0, max_delay]. Each logical thread draws from its
  /// own generator, so a given seed always yields the same delay sequence.
  std::optional<std::uint64_t> perturbation_seed;
  std::chrono::microseconds max_delay{2000};
  /// Record `EVT` sync-event lines (see ChannelRegistry::trace()).
  bool trace = false;
  /// Observes every ordinary read: reader, address, stamp of the value seen.
  std::function<void(const ThreadId&, const Address&, const VersionStamp&)> on_read;
};

/// A generalized reduction: `combine` must be associative; it need not be
/// commutative. Partials are folded over a fixed tree with leaves in rank order.
struct ReductionSpec {
  std::string variable;
  Value identity;
  std::function<Value(const Value&, const Value&)> combine;

  template <class T, class F>
  static ReductionSpec of(std::string variable, T identity, F f) {
    return ReductionSpec{std::move(variable), Value::of<T>(identity),
                         [f](const Value& a, const Value& b) { return Value::of<T>(f(a.as<T>(), b.as<T>())); }};
  }
  static ReductionSpec sum_i64(std::string variable);
  static ReductionSpec max_i64(std::string variable);
  /// Byte-string concatenation: associative, not commutative.
  static ReductionSpec concat(std::string variable);
};

/// Static work-sharing: chunks of `chunk` consecutive iterations dealt to
/// ranks round-robin. chunk == 0 means one contiguous block per rank.
struct StaticSchedule {
  std::int64_t chunk = 0;
};

/// Rank owning iteration `i` of [begin, end) on a team of `team_size`.
std::uint32_t static_owner(std::int64_t begin, std::int64_t end, StaticSchedule s,
                           std::uint32_t team_size, std::int64_t i);
/// Iterations of [begin, end) owned by `rank`, ascending.
std::vector<std::int64_t> static_iterations(std::int64_t begin, std::int64_t end, StaticSchedule s,
                                            std::uint32_t team_size, std::uint32_t rank);

/// Left-to-right combining tree over `leaves` (index = rank): at stride s,
/// leaf r absorbs leaf r+s for every r divisible by 2s.
Value tree_fold(std::vector<Value> leaves,
                const std::function<Value(const Value&, const Value&)>& combine);

namespace detail {
struct Core;
struct TeamState;
struct TaskState;
}  // namespace detail

/// A forked team of threads. Returned by Context::fork, consumed by Context::join.
class Team {
 public:
  std::uint32_t size() const;
  const ThreadId& member(std::uint32_t rank) const;
  std::uint64_t instance() const;

 private:
  friend class Context;
  explicit Team(std::shared_ptr<detail::TeamState> s) : state_(std::move(s)) {}
  std::shared_ptr<detail::TeamState> state_;
};

/// A named task instance; taskwait() on it exactly once.
class TaskHandle {
 public:
  const ThreadId& task() const { return task_; }
  const SyncLabel& spawn_label() const { return spawn_label_; }
  const std::string& name() const { return name_; }

 private:
  friend class Context;
  TaskHandle(ThreadId task, SyncLabel spawn, std::string name, std::shared_ptr<detail::TaskState> s)
      : task_(std::move(task)), spawn_label_(std::move(spawn)), name_(std::move(name)), state_(std::move(s)) {}
  ThreadId task_;
  SyncLabel spawn_label_;
  std::string name_;
  std::shared_ptr<detail::TaskState> state_;
};

/// An `ordered` region over a statically scheduled loop. Every team member
/// must create the same regions in the same order.
class OrderedRegion {
 public:
  std::int64_t begin() const { return begin_; }
  std::int64_t end() const { return end_; }
  std::uint32_t owner(std::int64_t i) const;

 private:
  friend class Context;
  OrderedRegion() = default;
  ThreadId scope_;
  std::uint64_t team_instance_ = 0;
  std::uint64_t ordinal_ = 0;
  std::int64_t begin_ = 0;
  std::int64_t end_ = 0;
  StaticSchedule schedule_;
  std::uint32_t team_size_ = 1;
};

/// A logical thread's handle on the runtime: its private workspace, its sync
/// endpoint, and the high-level deterministic constructs.
class Context {
 public:
  Context(const Context&) = delete;
  Context& operator=(const Context&) = delete;
  ~Context();

  const ThreadId& id() const { return ws_.owner(); }
  const Workspace& workspace() const { return ws_; }
  SyncEndpoint& endpoint() { return ep_; }

  // Ordinary accesses. Only this thread's view is touched.
  Address global(std::string_view name) const { return ws_.layout().at(name); }
  const Value& read(const Address& a);
  void write(const Address& a, Value v);
  Address alloc(Value init);

  template <class T>
  T get(std::string_view name) { return read(global(name)).as<T>(); }
  template <class T>
  void set(std::string_view name, const T& v) { write(global(name), Value::of<T>(v)); }

  // Low-level labeled synchronization.
  SyncLabel next_label() const { return ep_.next_label(); }
  void release(const SyncLabel& partner) { ep_.release(partner); }
  void acquire(const SyncLabel& partner) { ep_.acquire(partner); }
  void release_set(std::span<const SyncLabel> partners) { ep_.release_set(partners); }
  void acquire_set(std::span<const SyncLabel> partners) { ep_.acquire_set(partners); }

  // Fork/join.
  Team fork(std::vector<Body> bodies, std::vector<ReductionSpec> reductions = {});
  Team fork(std::uint32_t n, const Body& body, std::vector<ReductionSpec> reductions = {});
  void join(Team& team);

  // Team-member constructs.
  std::uint32_t rank() const { return rank_; }
  std::uint32_t team_size() const;
  void barrier();
  /// The n^2 logical form of barrier(): broadcast release to every other
  /// member, then acquire-set from every other member, using closed-form
  /// labels. Requires every member to have issued the same number of sync
  /// events so far; reductions are not folded here.
  void barrier_pairwise();
  void contribute(std::string_view variable, const Value& v);
  template <class T>
  void contribute(std::string_view variable, const T& v) { contribute(variable, Value::of<T>(v)); }

  void parallel_for(std::int64_t begin, std::int64_t end, StaticSchedule s,
                    const std::function<void(std::int64_t)>& body);
  OrderedRegion ordered_region(std::int64_t begin, std::int64_t end, StaticSchedule s);
  void ordered(const OrderedRegion& region, std::int64_t i, const std::function<void()>& body);

  // Task objects.
  TaskHandle spawn(const Body& body, std::string name = {});
  void taskwait(const TaskHandle& handle);

 private:
  friend class Runtime;
  friend struct detail::Core;

  Context(std::shared_ptr<detail::Core> core, Workspace ws, std::shared_ptr<detail::TeamState> team,
          std::uint32_t rank);

  void perturb();
  void finish_tasks();
  void write_reduction_result(const ReductionSpec& spec, const Value& folded);
  Workspace take_workspace() { return std::move(ws_); }

  std::shared_ptr<detail::Core> core_;
  Workspace ws_;
  SyncEndpoint ep_;
  std::shared_ptr<detail::TeamState> team_;
  std::uint32_t rank_ = 0;
  std::uint32_t spawn_ordinal_ = 0;
  std::uint64_t fork_count_ = 0;
  std::uint64_t barrier_round_ = 0;
  std::uint64_t region_count_ = 0;
  std::vector<Value> partials_;
  std::vector<std::shared_ptr<detail::TaskState>> tasks_;
  std::mt19937_64 rng_;
};

/// Launches logical threads and owns the channel registry of one run.
class Runtime {
 public:
  explicit Runtime(RuntimeOptions options = {});
  ~Runtime();

  /// Runs `body` as the root thread (id 0) over `globals`; returns the root's
  /// final workspace. Errors escaping the body are rethrown.
  Workspace run(const Globals& globals, const Body& body);

  struct PeerResult {
    Workspace workspace;
    std::exception_ptr error;
  };
  /// Runs `bodies` as flat peer threads 0..n-1, each starting from `globals`
  /// at INITIAL stamps. Peers synchronize with explicit labels.
  std::vector<PeerResult> run_peers(const Globals& globals, const std::vector<Body>& bodies);

  /// Sorted trace of the most recent run (requires options.trace).
  std::vector<std::string> trace() const;
  const RuntimeOptions& options() const { return options_; }

 private:
  RuntimeOptions options_;
  std::shared_ptr<detail::Core> last_;
};

}  // namespace dc
