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

#include "dc/sync.hpp"

#include <algorithm>

namespace dc {

namespace {

const char* kind_name(ConstructKey::Kind k) {
  switch (k) {
    case ConstructKey::Kind::kDeath: return "death";
    case ConstructKey::Kind::kOrdered: return "ordered";
    case ConstructKey::Kind::kTreeUp: return "tree-up";
    case ConstructKey::Kind::kTreeDown: return "tree-down";
  }
  return "?";
}

std::string evt(const SyncLabel& self, const char* op, const SyncLabel& partner) {
  return "EVT " + self.thread.str() + " " + std::to_string(self.seq) + " " + op + " " +
         partner.thread.str() + " " + std::to_string(partner.seq);
}

}  // namespace

std::string to_string(const ChannelKey& key) {
  if (const auto* c = std::get_if<ChannelId>(&key)) return c->str();
  const auto& k = std::get<ConstructKey>(key);
  return std::string(kind_name(k.kind)) + "[" + k.scope.str() + "#" + std::to_string(k.instance) +
         "." + std::to_string(k.region) + " step " + std::to_string(k.step) + " " + std::to_string(k.from) + "->" +
         std::to_string(k.to) + "]";
}

void ChannelRegistry::register_thread(const ThreadId& t) {
  std::lock_guard lk(mu_);
  live_.insert(t);
}

void ChannelRegistry::thread_exited(const ThreadId& t) {
  std::lock_guard lk(mu_);
  live_.erase(t);
  exited_.insert(t);
  waiting_.erase(t);
  detect_locked();
  cv_.notify_all();
}

void ChannelRegistry::deposit(const ChannelKey& key, Message msg) {
  std::lock_guard lk(mu_);
  if (consumed_.contains(key)) throw PairingError(to_string(key), "release after the channel was drained");
  if (ever_filled_.contains(key)) throw PairingError(to_string(key), "channel filled twice");
  if (const auto* c = std::get_if<ChannelId>(&key)) {
    if (auto d = declared_.find(c->acquirer); d != declared_.end() && !d->second.contains(c->releaser)) {
      throw PairingError("*->" + c->acquirer.str(), "release " + c->releaser.str() + " is not a partner");
    }
    named_by_[c->acquirer].insert(c->releaser);
  }
  ever_filled_.insert(key);
  slots_.emplace(key, std::move(msg));
  cv_.notify_all();
}

void ChannelRegistry::declare_acquire(const SyncLabel& self, std::span<const SyncLabel> partners) {
  std::lock_guard lk(mu_);
  auto& set = declared_[self];
  set.insert(partners.begin(), partners.end());
  if (auto n = named_by_.find(self); n != named_by_.end()) {
    for (const auto& r : n->second) {
      if (!set.contains(r)) throw PairingError("*->" + self.str(), "release " + r.str() + " is not a partner");
    }
  }
}

Message ChannelRegistry::take(const ChannelKey& key, const SyncLabel& self, const ThreadId& releaser,
                              bool trace_pair) {
  std::unique_lock lk(mu_);
  if (consumed_.contains(key)) throw PairingError(to_string(key), "channel drained twice");
  for (;;) {
    if (auto it = slots_.find(key); it != slots_.end()) {
      Message m = std::move(it->second);
      slots_.erase(it);
      consumed_.insert(key);
      waiting_.erase(self.thread);
      if (tracing_ && trace_pair) {
        trace_.push_back(evt(m.releaser, "REL", self));
        trace_.push_back(evt(self, "ACQ", m.releaser));
      }
      return m;
    }
    if (auto d = doomed_.find(self.thread); d != doomed_.end()) {
      auto blocked = std::move(d->second);
      doomed_.erase(d);
      waiting_.erase(self.thread);
      throw DeadlockError(std::move(blocked));
    }
    if (!waiting_.contains(self.thread)) {
      waiting_.insert_or_assign(self.thread, Wait{key, releaser});
      detect_locked();
      continue;
    }
    cv_.wait(lk);
  }
}

// Runs under mu_ whenever the wait-for graph may have gained a stuck path:
// a thread started waiting or a thread exited.
void ChannelRegistry::detect_locked() {
  std::map<ThreadId, ThreadId> edges;
  for (const auto& [t, w] : waiting_) {
    if (doomed_.contains(t) || slots_.contains(w.key)) continue;
    edges.emplace(t, w.releaser);
  }
  bool doomed_any = false;

  for (const auto& [t, r] : edges) {
    if (exited_.contains(r)) {
      doomed_.emplace(t, std::vector<ThreadId>{t});
      doomed_any = true;
    }
  }

  // Every blocked thread has one out-edge, so cycles are found by walking.
  std::set<ThreadId> done;
  for (const auto& [start, unused] : edges) {
    if (done.contains(start)) continue;
    std::vector<ThreadId> path;
    std::map<ThreadId, std::size_t> pos;
    ThreadId cur = start;
    for (;;) {
      if (done.contains(cur)) break;
      if (auto p = pos.find(cur); p != pos.end()) {
        std::vector<ThreadId> cycle(path.begin() + static_cast<std::ptrdiff_t>(p->second), path.end());
        std::sort(cycle.begin(), cycle.end());
        for (const auto& c : cycle) {
          if (doomed_.emplace(c, cycle).second) doomed_any = true;
        }
        break;
      }
      auto e = edges.find(cur);
      if (e == edges.end()) break;
      pos.emplace(cur, path.size());
      path.push_back(cur);
      cur = e->second;
    }
    done.insert(path.begin(), path.end());
  }

  if (!doomed_any && !edges.empty()) {
    bool all_blocked = std::all_of(live_.begin(), live_.end(), [&](const ThreadId& t) {
      return edges.contains(t) || doomed_.contains(t);
    });
    if (all_blocked) {
      std::vector<ThreadId> group;
      for (const auto& [t, unused] : edges) group.push_back(t);
      for (const auto& t : group) doomed_.emplace(t, group);
      doomed_any = true;
    }
  }
  if (doomed_any) cv_.notify_all();
}

bool ChannelRegistry::consumed(const ChannelKey& key) const {
  std::lock_guard lk(mu_);
  return consumed_.contains(key);
}

std::size_t ChannelRegistry::undrained() const {
  std::lock_guard lk(mu_);
  return slots_.size();
}

void ChannelRegistry::record(std::string line) {
  std::lock_guard lk(mu_);
  if (tracing_) trace_.push_back(std::move(line));
}

std::vector<std::string> ChannelRegistry::trace() const {
  std::lock_guard lk(mu_);
  auto t = trace_;
  std::sort(t.begin(), t.end());
  return t;
}

void SyncEndpoint::release(const SyncLabel& partner) { release_set(std::span(&partner, 1)); }

void SyncEndpoint::acquire(const SyncLabel& partner) { acquire_set(std::span(&partner, 1)); }

void SyncEndpoint::release_set(std::span<const SyncLabel> partners) {
  before_op();
  SyncLabel self{ws_.owner(), ++counter_};
  auto diff = std::make_shared<const Diff>(ws_.extract_diff());
  std::vector<SyncLabel> sorted(partners.begin(), partners.end());
  std::sort(sorted.begin(), sorted.end());
  for (const auto& p : sorted) registry_.deposit(ChannelId{self, p}, Message{self, diff, {}});
}

void SyncEndpoint::acquire_set(std::span<const SyncLabel> partners) {
  before_op();
  SyncLabel self{ws_.owner(), ++counter_};
  std::vector<SyncLabel> sorted(partners.begin(), partners.end());
  std::sort(sorted.begin(), sorted.end());
  registry_.declare_acquire(self, sorted);
  std::vector<Message> msgs;
  msgs.reserve(sorted.size());
  for (const auto& p : sorted) msgs.push_back(registry_.take(ChannelId{p, self}, self, p.thread));
  std::vector<const Diff*> diffs;
  for (const auto& m : msgs) diffs.push_back(m.diff.get());
  ws_.apply_all(diffs);
}

SyncLabel SyncEndpoint::release_keyed(const ChannelKey& key, std::shared_ptr<const void> attachment) {
  before_op();
  SyncLabel self{ws_.owner(), ++counter_};
  registry_.deposit(key, Message{self, std::make_shared<const Diff>(ws_.extract_diff()),
                                 std::move(attachment)});
  return self;
}

Message SyncEndpoint::acquire_keyed(const ChannelKey& key, const ThreadId& releaser, bool trace_pair) {
  before_op();
  SyncLabel self{ws_.owner(), ++counter_};
  return registry_.take(key, self, releaser, trace_pair);
}

}  // namespace dc
