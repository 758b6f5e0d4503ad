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
#include <cstring>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace dc {

/// An opaque, immutable byte string stored in a workspace cell.
///
/// Copies share the underlying buffer, so moving a value through a Diff or
/// across a release/acquire never copies payload bytes. Equality is byte
/// equality; there is no structural interpretation of the contents.
class Value {
 public:
  Value() : bytes_(empty_buffer()) {}
  explicit Value(std::string bytes)
      : bytes_(std::make_shared<const std::string>(std::move(bytes))) {}

  template <class T>
    requires std::is_trivially_copyable_v<T>
  static Value of(const T& v) {
    std::string b(sizeof(T), '\0');
    std::memcpy(b.data(), &v, sizeof(T));
    return Value(std::move(b));
  }

  template <class T>
    requires std::is_trivially_copyable_v<T>
  static Value of_span(std::span<const T> xs) {
    std::string b(xs.size_bytes(), '\0');
    if (!xs.empty()) std::memcpy(b.data(), xs.data(), xs.size_bytes());
    return Value(std::move(b));
  }

  static Value of_string(std::string_view s) { return Value(std::string(s)); }

  template <class T>
    requires std::is_trivially_copyable_v<T>
  T as() const {
    if (bytes_->size() != sizeof(T)) {
      throw std::invalid_argument("dc::Value::as: size mismatch");
    }
    T v;
    std::memcpy(&v, bytes_->data(), sizeof(T));
    return v;
  }

  /// Reinterprets the bytes as an array of T. The size must be a multiple of sizeof(T).
  template <class T>
    requires std::is_trivially_copyable_v<T>
  std::vector<T> as_vector() const {
    if (bytes_->size() % sizeof(T) != 0) {
      throw std::invalid_argument("dc::Value::as_vector: size mismatch");
    }
    std::vector<T> out(bytes_->size() / sizeof(T));
    if (!out.empty()) std::memcpy(out.data(), bytes_->data(), bytes_->size());
    return out;
  }

  /// Zero-copy view; valid as long as this Value (or a copy) is alive.
  template <class T>
    requires std::is_trivially_copyable_v<T>
  std::span<const T> view() const {
    return {reinterpret_cast<const T*>(bytes_->data()), bytes_->size() / sizeof(T)};
  }

  std::string_view bytes() const { return *bytes_; }
  std::size_t size() const { return bytes_->size(); }

  friend bool operator==(const Value& a, const Value& b) {
    return a.bytes_ == b.bytes_ || *a.bytes_ == *b.bytes_;
  }

 private:
  static const std::shared_ptr<const std::string>& empty_buffer() {
    static const auto e = std::make_shared<const std::string>();
    return e;
  }

  std::shared_ptr<const std::string> bytes_;
};

}  // namespace dc
