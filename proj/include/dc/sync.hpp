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

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dc/ids.hpp"
#include "dc/store.hpp"

namespace dc {

/// Channel name for runtime constructs whose partner labels are only known
/// at run time (join, ordered chains, barrier tree edges, taskwait). The key
/// is derived from program structure alone, so it is just as unique and
/// schedule-independent as an explicit (Tr,Nr,Ta,Na) quadruple.
struct ConstructKey {
  enum class Kind : std::uint8_t { kDeath, kOrdered, kTreeUp, kTreeDown };

  Kind kind = Kind::kDeath;
  ThreadId scope;               // team parent / region owner / task thread
  std::uint64_t instance = 0;   // team ordinal within scope
  std::uint64_t region = 0;     // ordered region ordinal within the team
  std::uint64_t step = 0;       // barrier round or ordered iteration
  std::uint32_t from = 0;       // sending rank
  std::uint32_t to = 0;         // receiving rank

  friend auto operator<=>(const ConstructKey&, const ConstructKey&) = default;
  friend bool operator==(const ConstructKey&, const ConstructKey&) = default;
};

using ChannelKey = std::variant<ChannelId, ConstructKey>;

std::string to_string(const ChannelKey& key);

/// What travels on a channel. Immutable once deposited.
struct Message {
  SyncLabel releaser;
  std::shared_ptr<const Diff> diff;
  std::shared_ptr<const void> attachment;  // construct-specific extras
};

/// The only shared mutable structure in the system: single-slot buffered
/// channels, the consumed-channel set, and the wait-for graph of blocked
/// acquirers used for deterministic deadlock diagnosis.
class ChannelRegistry {
 public:
  explicit ChannelRegistry(bool trace = false) : tracing_(trace) {}

  /// Threads must be registered by their spawner before they start, so the
  /// all-blocked check never mistakes a not-yet-started thread for a stuck one.
  void register_thread(const ThreadId& t);
  void thread_exited(const ThreadId& t);

  /// Fills a channel. Never blocks. Throws PairingError if the channel was
  /// already filled or drained, or if it names an acquire that was declared
  /// with a partner set not containing this release.
  void deposit(const ChannelKey& key, Message msg);

  /// Announces the partner set of acquire `self` before it waits. Throws
  /// PairingError if a release outside `partners` already named `self`.
  /// Either side of such a mismatch reports channel `*-><self>`, so the
  /// payload does not depend on arrival order.
  void declare_acquire(const SyncLabel& self, std::span<const SyncLabel> partners);

  /// Drains a channel, blocking until it is filled. `releaser` is the thread
  /// expected to fill it (the wait-for edge). Throws PairingError on a second
  /// drain and DeadlockError when the wait can never be satisfied.
  Message take(const ChannelKey& key, const SyncLabel& self, const ThreadId& releaser,
               bool trace_pair = true);

  bool consumed(const ChannelKey& key) const;
  std::size_t undrained() const;

  bool tracing() const { return tracing_; }
  void record(std::string line);

  /// Sorted `EVT <thread> <seq> REL|ACQ <partner-thread> <partner-seq>` lines.
  std::vector<std::string> trace() const;

 private:
  struct Wait {
    ChannelKey key;
    ThreadId releaser;
  };

  void detect_locked();

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<ChannelKey, Message> slots_;
  std::set<ChannelKey> consumed_;
  std::set<ChannelKey> ever_filled_;
  std::map<SyncLabel, std::set<SyncLabel>> declared_;   // acquire -> partners
  std::map<SyncLabel, std::set<SyncLabel>> named_by_;   // acquire -> releases naming it
  std::set<ThreadId> live_;
  std::set<ThreadId> exited_;
  std::map<ThreadId, Wait> waiting_;
  std::map<ThreadId, std::vector<ThreadId>> doomed_;
  bool tracing_;
  std::vector<std::string> trace_;
};

/// A thread's synchronization endpoint: its workspace, its event counter N,
/// and the registry. Implements the labeled release/acquire primitives.
class SyncEndpoint {
 public:
  SyncEndpoint(Workspace& ws, ChannelRegistry& registry, std::function<void()> before_op = {})
      : ws_(ws), registry_(registry), before_op_(std::move(before_op)) {}

  /// Label the next synchronization event of this thread will carry.
  SyncLabel next_label() const { return {ws_.owner(), counter_ + 1}; }
  std::uint64_t counter() const { return counter_; }

  /// release(Ta,Na): deposit this workspace's diff on (self, partner). Non-blocking.
  void release(const SyncLabel& partner);
  /// acquire(Tr,Nr): block for (partner, self) and apply its diff.
  void acquire(const SyncLabel& partner);
  /// One broadcast event: a single diff deposited for every partner.
  void release_set(std::span<const SyncLabel> partners);
  /// One event: waits for every partner, applies the diffs in ascending
  /// partner order as a single atomic merge.
  void acquire_set(std::span<const SyncLabel> partners);

  /// Construct-keyed variants. Each still consumes exactly one label.
  SyncLabel release_keyed(const ChannelKey& key, std::shared_ptr<const void> attachment = {});
  /// Returns the message without applying it; the caller decides how to merge.
  Message acquire_keyed(const ChannelKey& key, const ThreadId& releaser, bool trace_pair = true);

  /// Consumes a label for a construct event with no channel of its own
  /// (e.g. one half of a barrier round).
  SyncLabel bump() { return {ws_.owner(), ++counter_}; }

  Workspace& workspace() { return ws_; }
  ChannelRegistry& registry() { return registry_; }
  void before_op() {
    if (before_op_) before_op_();
  }

 private:
  Workspace& ws_;
  ChannelRegistry& registry_;
  std::function<void()> before_op_;
  std::uint64_t counter_ = 0;
};

}  // namespace dc
