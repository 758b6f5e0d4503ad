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

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dc/errors.hpp"
#include "dc/ids.hpp"
#include "dc/value.hpp"

namespace dc {

/// Named initial values, in declaration order. Duplicates are rejected at init.
using Globals = std::vector<std::pair<std::string, Value>>;

/// Per-thread highest write sequence number causally observed (absent = 0).
class KnowledgeVector {
 public:
  std::uint64_t get(const ThreadId& t) const;
  void raise(const ThreadId& t, std::uint64_t seq);
  void merge(const KnowledgeVector& other);

  /// True if the write named by `s` is in the causal past summarized here.
  bool covers(const VersionStamp& s) const { return s.is_initial() || s.seq <= get(s.writer); }
  bool dominates(const KnowledgeVector& other) const;

  const std::map<ThreadId, std::uint64_t>& entries() const { return entries_; }
  std::string str() const;

  friend bool operator==(const KnowledgeVector&, const KnowledgeVector&) = default;

 private:
  std::map<ThreadId, std::uint64_t> entries_;
};

struct StampedValue {
  VersionStamp stamp;
  Value value;

  friend bool operator==(const StampedValue&, const StampedValue&) = default;
};

/// Maps global names to root-namespace addresses (slots 1..G in name order).
class GlobalLayout {
 public:
  explicit GlobalLayout(const Globals& globals);

  std::optional<Address> find(std::string_view name) const;
  Address at(std::string_view name) const;
  /// Name of a global address, or nullopt for allocated cells.
  std::optional<std::string> name_of(const Address& a) const;
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  /// Address text using global names where possible.
  std::string label(const Address& a) const;

 private:
  std::vector<std::string> names_;  // sorted; names_[i] lives at slot i+1
};

/// Payload of a release: the sender's causal knowledge plus its latest
/// stamped write for every cell it knows.
struct Diff {
  KnowledgeVector sender_knowledge;
  std::map<Address, StampedValue> writes;
};

/// Join of several diffs. Each address keeps the antichain of latest writes
/// that no participant has causally superseded; more than one entry means the
/// writes were concurrent. The join is associative and commutative, so any
/// combining order (tree or linear) yields the same result.
class MergedDiff {
 public:
  MergedDiff() = default;
  explicit MergedDiff(const Diff& d);

  MergedDiff& join(const MergedDiff& other);

  const KnowledgeVector& knowledge() const { return knowledge_; }
  const std::map<Address, std::vector<StampedValue>>& writes() const { return writes_; }

  /// Addresses whose antichain has more than one write, in address order.
  std::vector<Conflict> conflicts() const;

 private:
  KnowledgeVector knowledge_;
  std::map<Address, std::vector<StampedValue>> writes_;
};

/// A thread's private view of the shared store between synchronization events.
///
/// Confined to its owning thread. Foreign writes appear only through apply().
class Workspace {
 public:
  Workspace(ThreadId owner, std::shared_ptr<const GlobalLayout> layout);

  /// Fresh workspace holding every global at its INITIAL stamp.
  /// Throws ConfigError on a duplicate global name.
  static Workspace init(ThreadId owner, const Globals& globals);
  static Workspace init(ThreadId owner, std::shared_ptr<const GlobalLayout> layout,
                        const Globals& globals);

  const ThreadId& owner() const { return owner_; }
  const GlobalLayout& layout() const { return *layout_; }
  const std::shared_ptr<const GlobalLayout>& layout_ptr() const { return layout_; }

  bool contains(const Address& a) const { return cells_.contains(a); }
  const Value& read(const Address& a) const { return cell(a).value; }
  const StampedValue& cell(const Address& a) const;
  VersionStamp write(const Address& a, Value v);
  Address alloc(Value init);

  Diff extract_diff() const;

  /// Integrates a received diff. On concurrent writes throws DataRaceError
  /// naming every conflicting cell and leaves the workspace untouched.
  void apply(const Diff& d);
  void apply(const MergedDiff& m);
  /// Joins several diffs (canonical order given by the caller) and applies
  /// the result atomically.
  void apply_all(std::span<const Diff* const> diffs);

  const KnowledgeVector& knowledge() const { return knowledge_; }
  const std::map<Address, StampedValue>& cells() const { return cells_; }
  std::uint64_t write_counter() const { return write_counter_; }
  std::uint64_t alloc_counter() const { return alloc_counter_; }

  /// Canonical byte serialization of the whole workspace state.
  std::string serialize() const;

  /// Empty string if the structural invariants hold, else a description.
  std::string check_invariants() const;

 private:
  ThreadId owner_;
  std::shared_ptr<const GlobalLayout> layout_;
  std::map<Address, StampedValue> cells_;
  KnowledgeVector knowledge_;
  std::uint64_t write_counter_ = 0;
  std::uint64_t alloc_counter_ = 0;
};

}  // namespace dc
