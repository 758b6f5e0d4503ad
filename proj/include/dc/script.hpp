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
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "dc/errors.hpp"

namespace dc::script {

/// Parse failure with the 1-based source line.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

/// Integer expression over thread locals: constants, locals, + - *, max(a,b),
/// parentheses. Arithmetic wraps modulo 2^64; unset locals read as 0.
class Expr {
 public:
  enum class Op { kConst, kLocal, kAdd, kSub, kMul, kMax };

  static Expr parse(std::string_view text, int line);
  std::int64_t eval(const std::map<std::string, std::int64_t>& locals) const;
  std::string str() const;

 private:
  struct Node {
    Op op = Op::kConst;
    std::int64_t value = 0;
    std::string name;
    std::shared_ptr<const Node> lhs, rhs;
  };
  friend class ExprParser;
  static std::int64_t eval_node(const Node& n, const std::map<std::string, std::int64_t>& locals);
  static std::string str_node(const Node& n);
  std::shared_ptr<const Node> root_;
};

/// A global by name, or `@local` for a cell allocated by this thread.
struct CellRef {
  bool is_ref = false;
  std::string name;
  std::string str() const { return is_ref ? "@" + name : name; }
};

struct Partner {
  std::uint32_t thread = 0;
  std::uint64_t seq = 0;
};

struct ReadOp {
  CellRef cell;
  std::string local;
};
struct WriteOp {
  CellRef cell;
  Expr expr;
};
struct AllocOp {
  std::string local;
};
/// REL/ACQ (one partner) and RELSET/ACQSET (one or more partners).
struct SyncOp {
  bool release = true;
  bool set = false;
  std::vector<Partner> partners;
};

using Op = std::variant<ReadOp, WriteOp, AllocOp, SyncOp>;

struct Program {
  std::string name;
  std::vector<std::pair<std::string, std::int64_t>> globals;  // declaration order
  std::vector<std::vector<Op>> threads;                       // index = thread id

  std::size_t max_ops_per_thread() const;
};

/// Parses the line-oriented script format:
///   GLOBAL <name> <int> / THREAD <k> / READ <cell> <local> / WRITE <cell> <expr>
///   ALLOC <local> / REL <t> <n> / ACQ <t> <n> / RELSET <t:n,...> / ACQSET <t:n,...>
/// `#` starts a comment.
Program parse(std::string_view text, std::string name = "script");

std::string to_text(const Program& p);

/// Bundled witness programs, by name.
const std::vector<std::pair<std::string, std::string>>& builtins();
/// Text of a builtin, or nullptr.
const std::string* find_builtin(std::string_view name);

}  // namespace dc::script
