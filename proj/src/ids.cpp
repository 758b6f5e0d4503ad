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

#include "dc/ids.hpp"

#include <sstream>
#include <stdexcept>

#include "dc/errors.hpp"

namespace dc {

ThreadId::ThreadId(std::vector<std::uint32_t> path) : path_(std::move(path)) {
  if (path_.empty()) throw std::invalid_argument("ThreadId: empty path");
}

ThreadId ThreadId::child(std::uint32_t ordinal) const {
  if (is_root()) return ThreadId(ordinal);
  auto p = path_;
  p.push_back(ordinal);
  return ThreadId(std::move(p));
}

std::string ThreadId::str() const {
  std::string s;
  for (std::size_t i = 0; i < path_.size(); ++i) {
    if (i) s += '.';
    s += std::to_string(path_[i]);
  }
  return s;
}

std::string Address::str() const { return "[" + owner.str() + ":" + std::to_string(slot) + "]"; }

std::string VersionStamp::str() const {
  if (is_initial()) return "(init)";
  return "(" + writer.str() + "," + std::to_string(seq) + ")";
}

std::string SyncLabel::str() const { return "(" + thread.str() + "," + std::to_string(seq) + ")"; }

std::string ChannelId::str() const { return releaser.str() + "->" + acquirer.str(); }

UnallocatedError::UnallocatedError(const Address& addr)
    : Error("unallocated address " + addr.str()), address_(addr) {}

std::string describe(const std::vector<Conflict>& conflicts) {
  std::ostringstream os;
  for (std::size_t i = 0; i < conflicts.size(); ++i) {
    if (i) os << ' ';
    os << conflicts[i].address.str() << '{';
    for (std::size_t j = 0; j < conflicts[i].writes.size(); ++j) {
      if (j) os << '|';
      os << conflicts[i].writes[j].str();
    }
    os << '}';
  }
  return os.str();
}

DataRaceError::DataRaceError(std::vector<Conflict> conflicts)
    : Error("data race on " + describe(conflicts)), conflicts_(std::move(conflicts)) {}

PairingError::PairingError(std::string channel, std::string reason)
    : Error("pairing violation on channel " + channel + ": " + reason), channel_(std::move(channel)) {}

namespace {
std::string blocked_text(const std::vector<ThreadId>& ts) {
  std::string s = "{";
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (i) s += ',';
    s += ts[i].str();
  }
  return s + "}";
}
}  // namespace

DeadlockError::DeadlockError(std::vector<ThreadId> blocked)
    : Error("deadlock: blocked " + blocked_text(blocked)), blocked_(std::move(blocked)) {}

}  // namespace dc
