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

#include "dc/store.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace dc {

std::uint64_t KnowledgeVector::get(const ThreadId& t) const {
  auto it = entries_.find(t);
  return it == entries_.end() ? 0 : it->second;
}

void KnowledgeVector::raise(const ThreadId& t, std::uint64_t seq) {
  if (seq == 0) return;
  auto& e = entries_[t];
  e = std::max(e, seq);
}

void KnowledgeVector::merge(const KnowledgeVector& other) {
  for (const auto& [t, seq] : other.entries_) raise(t, seq);
}

bool KnowledgeVector::dominates(const KnowledgeVector& other) const {
  return std::all_of(other.entries_.begin(), other.entries_.end(),
                     [&](const auto& e) { return get(e.first) >= e.second; });
}

std::string KnowledgeVector::str() const {
  std::string s = "<";
  bool first = true;
  for (const auto& [t, seq] : entries_) {
    if (!first) s += ',';
    first = false;
    s += t.str() + ":" + std::to_string(seq);
  }
  return s + ">";
}

GlobalLayout::GlobalLayout(const Globals& globals) {
  names_.reserve(globals.size());
  for (const auto& g : globals) names_.push_back(g.first);
  std::sort(names_.begin(), names_.end());
  auto dup = std::adjacent_find(names_.begin(), names_.end());
  if (dup != names_.end()) throw ConfigError("duplicate global name '" + *dup + "'");
}

std::optional<Address> GlobalLayout::find(std::string_view name) const {
  auto it = std::lower_bound(names_.begin(), names_.end(), name);
  if (it == names_.end() || *it != name) return std::nullopt;
  return Address{ThreadId::root(), static_cast<std::uint64_t>(it - names_.begin()) + 1};
}

Address GlobalLayout::at(std::string_view name) const {
  if (auto a = find(name)) return *a;
  throw ConfigError("unknown global '" + std::string(name) + "'");
}

std::optional<std::string> GlobalLayout::name_of(const Address& a) const {
  if (!a.owner.is_root() || a.slot == 0 || a.slot > names_.size()) return std::nullopt;
  return names_[a.slot - 1];
}

std::string GlobalLayout::label(const Address& a) const {
  if (auto n = name_of(a)) return *n;
  return a.str();
}

MergedDiff::MergedDiff(const Diff& d) : knowledge_(d.sender_knowledge) {
  for (const auto& [addr, sv] : d.writes) writes_.emplace(addr, std::vector<StampedValue>{sv});
}

namespace {

bool has_stamp(const std::vector<StampedValue>& xs, const VersionStamp& s) {
  return std::any_of(xs.begin(), xs.end(), [&](const StampedValue& x) { return x.stamp == s; });
}

// A write survives the join iff every side that holds the cell and causally
// knows the write still holds it as (one of) its latest writes.
std::vector<StampedValue> join_cell(const std::vector<StampedValue>& a, const KnowledgeVector& ka,
                                    const std::vector<StampedValue>& b, const KnowledgeVector& kb) {
  // A side without the cell has superseded nothing (INITIAL cells included).
  if (a.empty()) return b;
  if (b.empty()) return a;
  std::vector<StampedValue> out;
  for (const auto& x : a) {
    if (!kb.covers(x.stamp) || has_stamp(b, x.stamp)) out.push_back(x);
  }
  for (const auto& y : b) {
    if ((!ka.covers(y.stamp) || has_stamp(a, y.stamp)) && !has_stamp(out, y.stamp)) out.push_back(y);
  }
  std::sort(out.begin(), out.end(),
            [](const StampedValue& l, const StampedValue& r) { return l.stamp < r.stamp; });
  return out;
}

}  // namespace

MergedDiff& MergedDiff::join(const MergedDiff& other) {
  static const std::vector<StampedValue> kNone;
  std::map<Address, std::vector<StampedValue>> out;
  auto ia = writes_.begin();
  auto ib = other.writes_.begin();
  while (ia != writes_.end() || ib != other.writes_.end()) {
    if (ib == other.writes_.end() || (ia != writes_.end() && ia->first < ib->first)) {
      out.emplace_hint(out.end(), ia->first, join_cell(ia->second, knowledge_, kNone, other.knowledge_));
      ++ia;
    } else if (ia == writes_.end() || ib->first < ia->first) {
      out.emplace_hint(out.end(), ib->first, join_cell(kNone, knowledge_, ib->second, other.knowledge_));
      ++ib;
    } else {
      out.emplace_hint(out.end(), ia->first,
                       join_cell(ia->second, knowledge_, ib->second, other.knowledge_));
      ++ia;
      ++ib;
    }
  }
  writes_ = std::move(out);
  knowledge_.merge(other.knowledge_);
  return *this;
}

std::vector<Conflict> MergedDiff::conflicts() const {
  std::vector<Conflict> out;
  for (const auto& [addr, ws] : writes_) {
    if (ws.size() < 2) continue;
    Conflict c{addr, {}};
    for (const auto& w : ws) c.writes.push_back(w.stamp);
    out.push_back(std::move(c));
  }
  return out;
}

Workspace::Workspace(ThreadId owner, std::shared_ptr<const GlobalLayout> layout)
    : owner_(std::move(owner)), layout_(std::move(layout)) {
  // The root thread's namespace starts with the globals.
  if (owner_.is_root()) alloc_counter_ = layout_->size();
}

Workspace Workspace::init(ThreadId owner, const Globals& globals) {
  return init(std::move(owner), std::make_shared<const GlobalLayout>(globals), globals);
}

Workspace Workspace::init(ThreadId owner, std::shared_ptr<const GlobalLayout> layout,
                          const Globals& globals) {
  Workspace ws(std::move(owner), std::move(layout));
  for (const auto& [name, v] : globals) {
    ws.cells_.insert_or_assign(ws.layout_->at(name), StampedValue{VersionStamp::initial(), v});
  }
  return ws;
}

const StampedValue& Workspace::cell(const Address& a) const {
  auto it = cells_.find(a);
  if (it == cells_.end()) throw UnallocatedError(a);
  return it->second;
}

VersionStamp Workspace::write(const Address& a, Value v) {
  auto it = cells_.find(a);
  if (it == cells_.end()) throw UnallocatedError(a);
  VersionStamp s{owner_, ++write_counter_};
  it->second = StampedValue{s, std::move(v)};
  knowledge_.raise(owner_, write_counter_);
  return s;
}

Address Workspace::alloc(Value init) {
  Address a{owner_, ++alloc_counter_};
  VersionStamp s{owner_, ++write_counter_};
  cells_.emplace(a, StampedValue{s, std::move(init)});
  knowledge_.raise(owner_, write_counter_);
  return a;
}

Diff Workspace::extract_diff() const { return Diff{knowledge_, cells_}; }

void Workspace::apply(const Diff& d) { apply(MergedDiff(d)); }

void Workspace::apply(const MergedDiff& m) {
  static const std::vector<StampedValue> kNone;
  std::vector<Conflict> conflicts;
  std::vector<std::pair<Address, StampedValue>> adopt;
  for (const auto& [addr, incoming] : m.writes()) {
    auto it = cells_.find(addr);
    std::vector<StampedValue> local;
    if (it != cells_.end()) local.push_back(it->second);
    auto joined = join_cell(local, knowledge_, incoming, m.knowledge());
    if (joined.size() > 1) {
      Conflict c{addr, {}};
      for (const auto& w : joined) c.writes.push_back(w.stamp);
      conflicts.push_back(std::move(c));
    } else if (joined.size() == 1 && (local.empty() || !(joined[0].stamp == local[0].stamp))) {
      adopt.emplace_back(addr, std::move(joined[0]));
    }
  }
  if (!conflicts.empty()) throw DataRaceError(std::move(conflicts));
  for (auto& [addr, sv] : adopt) cells_.insert_or_assign(addr, std::move(sv));
  knowledge_.merge(m.knowledge());
}

void Workspace::apply_all(std::span<const Diff* const> diffs) {
  MergedDiff m;
  for (const Diff* d : diffs) m.join(MergedDiff(*d));
  apply(m);
}

std::string Workspace::serialize() const {
  std::ostringstream os;
  os << "owner=" << owner_.str() << ";w=" << write_counter_ << ";a=" << alloc_counter_
     << ";k=" << knowledge_.str() << ";";
  for (const auto& [addr, sv] : cells_) {
    auto bytes = sv.value.bytes();
    os << addr.str() << sv.stamp.str() << bytes.size() << ':';
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    os << ';';
  }
  return os.str();
}

std::string Workspace::check_invariants() const {
  if (knowledge_.get(owner_) != write_counter_) return "own knowledge entry != write counter";
  for (const auto& [addr, sv] : cells_) {
    if (!knowledge_.covers(sv.stamp)) return "cell " + addr.str() + " stamp not covered";
  }
  return {};
}

}  // namespace dc
