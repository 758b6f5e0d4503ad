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

#include <stdexcept>
#include <string>
#include <vector>

#include "dc/ids.hpp"

namespace dc {

/// Base class of every error raised by the runtime.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid program setup: duplicate globals, redeclared reductions, orphan tasks.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class UnallocatedError : public Error {
 public:
  explicit UnallocatedError(const Address& addr);
  const Address& address() const { return address_; }

 private:
  Address address_;
};

/// One conflicting cell: the mutually concurrent latest writes to it.
struct Conflict {
  Address address;
  std::vector<VersionStamp> writes;  // sorted ascending, size >= 2

  friend auto operator<=>(const Conflict&, const Conflict&) = default;
  friend bool operator==(const Conflict&, const Conflict&) = default;
};

/// Concurrent writes to the same cell met at an acquire. Conflicts are sorted
/// by address, so the payload is identical on every run of the same program.
class DataRaceError : public Error {
 public:
  explicit DataRaceError(std::vector<Conflict> conflicts);
  const std::vector<Conflict>& conflicts() const { return conflicts_; }

 private:
  std::vector<Conflict> conflicts_;
};

/// A channel was filled twice or drained twice.
class PairingError : public Error {
 public:
  PairingError(std::string channel, std::string reason);
  const std::string& channel() const { return channel_; }

 private:
  std::string channel_;
};

/// Acquirers that can never be satisfied. `blocked` is sorted.
class DeadlockError : public Error {
 public:
  explicit DeadlockError(std::vector<ThreadId> blocked);
  const std::vector<ThreadId>& blocked() const { return blocked_; }

 private:
  std::vector<ThreadId> blocked_;
};

/// Canonical text for a race payload, e.g. `x{(1,1)|(2,1)}`.
std::string describe(const std::vector<Conflict>& conflicts);

}  // namespace dc
