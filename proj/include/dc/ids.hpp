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

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

namespace dc {

/// Identity of a logical thread.
///
/// A thread id is the spawn path from the root: the root is `0`, the root's
/// k-th spawned thread is `k`, and thread `c`'s k-th spawned thread is `c.k`.
/// Ids therefore depend only on program structure, never on timing, and a
/// flat program (one spawner) gets dense ids 0..n-1 in creation order.
class ThreadId {
 public:
  ThreadId() : path_{0} {}
  explicit ThreadId(std::uint32_t top) : path_{top} {}
  explicit ThreadId(std::vector<std::uint32_t> path);

  static ThreadId root() { return ThreadId(); }

  /// Id of the `ordinal`-th (1-based) thread spawned by this thread.
  ThreadId child(std::uint32_t ordinal) const;

  bool is_root() const { return path_.size() == 1 && path_[0] == 0; }
  const std::vector<std::uint32_t>& path() const { return path_; }

  std::string str() const;

  friend auto operator<=>(const ThreadId&, const ThreadId&) = default;
  friend bool operator==(const ThreadId&, const ThreadId&) = default;

 private:
  std::vector<std::uint32_t> path_;
};

/// A cell in the logically shared store. Allocation `slot` is the owner's
/// per-thread counter, so addresses are never reused and never collide.
struct Address {
  ThreadId owner;
  std::uint64_t slot = 0;

  std::string str() const;
  friend auto operator<=>(const Address&, const Address&) = default;
  friend bool operator==(const Address&, const Address&) = default;
};

/// Names one write event: the `seq`-th write performed by `writer`.
/// seq == 0 is the INITIAL stamp carried by pre-fork global values.
struct VersionStamp {
  ThreadId writer;
  std::uint64_t seq = 0;

  static VersionStamp initial() { return {}; }
  bool is_initial() const { return seq == 0; }

  std::string str() const;
  friend auto operator<=>(const VersionStamp&, const VersionStamp&) = default;
  friend bool operator==(const VersionStamp&, const VersionStamp&) = default;
};

/// (T, N): the N-th synchronization event of thread T.
struct SyncLabel {
  ThreadId thread;
  std::uint64_t seq = 0;

  std::string str() const;
  friend auto operator<=>(const SyncLabel&, const SyncLabel&) = default;
  friend bool operator==(const SyncLabel&, const SyncLabel&) = default;
};

/// (Tr, Nr, Ta, Na): the unique channel pairing a release with its acquire.
struct ChannelId {
  SyncLabel releaser;
  SyncLabel acquirer;

  std::string str() const;
  friend auto operator<=>(const ChannelId&, const ChannelId&) = default;
  friend bool operator==(const ChannelId&, const ChannelId&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const ThreadId& t) { return os << t.str(); }
inline std::ostream& operator<<(std::ostream& os, const Address& a) { return os << a.str(); }
inline std::ostream& operator<<(std::ostream& os, const VersionStamp& s) { return os << s.str(); }
inline std::ostream& operator<<(std::ostream& os, const SyncLabel& l) { return os << l.str(); }
inline std::ostream& operator<<(std::ostream& os, const ChannelId& c) { return os << c.str(); }

}  // namespace dc
