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

#include "dc/script.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace dc::script {

ParseError::ParseError(int line, const std::string& what)
    : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

class ExprParser {
 public:
  ExprParser(std::string_view s, int line) : s_(s), line_(line) {}

  std::shared_ptr<const Expr::Node> parse_all() {
    auto n = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(s_.substr(pos_)) + "'");
    return n;
  }

 private:
  using NodeP = std::shared_ptr<const Expr::Node>;

  [[noreturn]] void fail(const std::string& m) const { throw ParseError(line_, "bad expression: " + m); }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodeP bin(Expr::Op op, NodeP l, NodeP r) {
    auto n = std::make_shared<Expr::Node>();
    n->op = op;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
  }

  NodeP sum() {
    auto l = product();
    for (;;) {
      if (eat('+')) {
        l = bin(Expr::Op::kAdd, l, product());
      } else if (eat('-')) {
        l = bin(Expr::Op::kSub, l, product());
      } else {
        return l;
      }
    }
  }

  NodeP product() {
    auto l = atom();
    while (eat('*')) l = bin(Expr::Op::kMul, l, atom());
    return l;
  }

  NodeP atom() {
    skip();
    if (pos_ >= s_.size()) fail("missing operand");
    if (eat('(')) {
      auto n = sum();
      if (!eat(')')) fail("missing ')'");
      return n;
    }
    char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-') {
      std::size_t start = pos_;
      if (c == '-') ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      auto text = std::string(s_.substr(start, pos_ - start));
      if (text == "-") fail("dangling '-'");
      auto n = std::make_shared<Expr::Node>();
      n->op = Expr::Op::kConst;
      try {
        n->value = std::stoll(text);
      } catch (const std::exception&) {
        fail("integer out of range: " + text);
      }
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      std::string name(s_.substr(start, pos_ - start));
      if (name == "max") {
        if (!eat('(')) fail("max needs '('");
        auto a = sum();
        if (!eat(',')) fail("max needs two arguments");
        auto b = sum();
        if (!eat(')')) fail("missing ')' after max");
        return bin(Expr::Op::kMax, a, b);
      }
      auto n = std::make_shared<Expr::Node>();
      n->op = Expr::Op::kLocal;
      n->name = std::move(name);
      return n;
    }
    fail(std::string("unexpected '") + c + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_;
};

Expr Expr::parse(std::string_view text, int line) {
  Expr e;
  e.root_ = ExprParser(text, line).parse_all();
  return e;
}

std::int64_t Expr::eval(const std::map<std::string, std::int64_t>& locals) const { return eval_node(*root_, locals); }

std::int64_t Expr::eval_node(const Node& n, const std::map<std::string, std::int64_t>& locals) {
  auto wrap = [](std::uint64_t v) { return static_cast<std::int64_t>(v); };
  switch (n.op) {
    case Op::kConst: return n.value;
    case Op::kLocal: {
      auto it = locals.find(n.name);
      return it == locals.end() ? 0 : it->second;
    }
    case Op::kAdd:
      return wrap(static_cast<std::uint64_t>(eval_node(*n.lhs, locals)) +
                  static_cast<std::uint64_t>(eval_node(*n.rhs, locals)));
    case Op::kSub:
      return wrap(static_cast<std::uint64_t>(eval_node(*n.lhs, locals)) -
                  static_cast<std::uint64_t>(eval_node(*n.rhs, locals)));
    case Op::kMul:
      return wrap(static_cast<std::uint64_t>(eval_node(*n.lhs, locals)) *
                  static_cast<std::uint64_t>(eval_node(*n.rhs, locals)));
    case Op::kMax: return std::max(eval_node(*n.lhs, locals), eval_node(*n.rhs, locals));
  }
  return 0;
}

std::string Expr::str() const { return str_node(*root_); }

std::string Expr::str_node(const Node& n) {
  switch (n.op) {
    case Op::kConst: return std::to_string(n.value);
    case Op::kLocal: return n.name;
    case Op::kAdd: return "(" + str_node(*n.lhs) + "+" + str_node(*n.rhs) + ")";
    case Op::kSub: return "(" + str_node(*n.lhs) + "-" + str_node(*n.rhs) + ")";
    case Op::kMul: return "(" + str_node(*n.lhs) + "*" + str_node(*n.rhs) + ")";
    case Op::kMax: return "max(" + str_node(*n.lhs) + "," + str_node(*n.rhs) + ")";
  }
  return {};
}

std::size_t Program::max_ops_per_thread() const {
  std::size_t m = 0;
  for (const auto& t : threads) m = std::max(m, t.size());
  return m;
}

namespace {

bool is_ident(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::uint64_t parse_uint(const std::string& s, int line, const char* what) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    throw ParseError(line, std::string("expected ") + what + ", got '" + s + "'");
  }
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw ParseError(line, std::string(what) + " out of range: " + s);
  }
}

Partner parse_partner(const std::string& t, const std::string& n, int line) {
  Partner p;
  std::uint64_t thread = parse_uint(t, line, "thread");
  if (thread > 1u << 16) throw ParseError(line, "thread id too large: " + t);
  p.thread = static_cast<std::uint32_t>(thread);
  p.seq = parse_uint(n, line, "sequence number");
  if (p.seq == 0) throw ParseError(line, "sequence numbers start at 1");
  return p;
}

CellRef parse_cell(const std::string& s, int line) {
  CellRef c;
  if (!s.empty() && s[0] == '@') {
    c.is_ref = true;
    c.name = s.substr(1);
  } else {
    c.name = s;
  }
  if (!is_ident(c.name)) throw ParseError(line, "bad cell name '" + s + "'");
  return c;
}

}  // namespace

Program parse(std::string_view text, std::string name) {
  Program p;
  p.name = std::move(name);
  std::set<std::string> global_names;
  std::set<std::uint32_t> seen_threads;
  std::vector<std::set<std::string>> refs;
  long current = -1;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
    std::istringstream ls(raw);
    std::string kw;
    if (!(ls >> kw)) continue;
    std::vector<std::string> args;
    for (std::string a; ls >> a;) args.push_back(a);
    auto need = [&](std::size_t n) {
      if (args.size() != n) {
        throw ParseError(line, kw + " expects " + std::to_string(n) + " argument(s), got " + std::to_string(args.size()));
      }
    };
    auto in_thread = [&]() -> std::vector<Op>& {
      if (current < 0) throw ParseError(line, kw + " outside a THREAD section");
      return p.threads[static_cast<std::size_t>(current)];
    };

    if (kw == "GLOBAL") {
      need(2);
      if (current >= 0) throw ParseError(line, "GLOBAL after the first THREAD section");
      if (!is_ident(args[0])) throw ParseError(line, "bad global name '" + args[0] + "'");
      if (!global_names.insert(args[0]).second) throw ParseError(line, "duplicate global '" + args[0] + "'");
      std::int64_t v;
      try {
        std::size_t used = 0;
        v = std::stoll(args[1], &used);
        if (used != args[1].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError(line, "bad integer '" + args[1] + "'");
      }
      p.globals.emplace_back(args[0], v);
    } else if (kw == "THREAD") {
      need(1);
      auto k = parse_uint(args[0], line, "thread index");
      if (k > 64) throw ParseError(line, "thread index too large");
      if (!seen_threads.insert(static_cast<std::uint32_t>(k)).second) {
        throw ParseError(line, "duplicate THREAD " + args[0]);
      }
      if (p.threads.size() <= k) {
        p.threads.resize(k + 1);
        refs.resize(k + 1);
      }
      current = static_cast<long>(k);
    } else if (kw == "READ") {
      need(2);
      auto& ops = in_thread();
      auto c = parse_cell(args[0], line);
      if (!is_ident(args[1])) throw ParseError(line, "bad local '" + args[1] + "'");
      if (c.is_ref && !refs[current].contains(c.name)) throw ParseError(line, "@" + c.name + " used before ALLOC");
      if (!c.is_ref && !global_names.contains(c.name)) throw ParseError(line, "unknown global '" + c.name + "'");
      ops.push_back(ReadOp{c, args[1]});
    } else if (kw == "WRITE") {
      if (args.size() < 2) throw ParseError(line, "WRITE expects a cell and an expression");
      auto& ops = in_thread();
      auto c = parse_cell(args[0], line);
      if (c.is_ref && !refs[current].contains(c.name)) throw ParseError(line, "@" + c.name + " used before ALLOC");
      if (!c.is_ref && !global_names.contains(c.name)) throw ParseError(line, "unknown global '" + c.name + "'");
      std::string expr;
      for (std::size_t i = 1; i < args.size(); ++i) expr += args[i] + " ";
      ops.push_back(WriteOp{c, Expr::parse(expr, line)});
    } else if (kw == "ALLOC") {
      need(1);
      auto& ops = in_thread();
      if (!is_ident(args[0])) throw ParseError(line, "bad local '" + args[0] + "'");
      refs[current].insert(args[0]);
      ops.push_back(AllocOp{args[0]});
    } else if (kw == "REL" || kw == "ACQ") {
      need(2);
      auto& ops = in_thread();
      ops.push_back(SyncOp{kw == "REL", false, {parse_partner(args[0], args[1], line)}});
    } else if (kw == "RELSET" || kw == "ACQSET") {
      need(1);
      auto& ops = in_thread();
      SyncOp op{kw == "RELSET", true, {}};
      std::istringstream list(args[0]);
      for (std::string item; std::getline(list, item, ',');) {
        auto colon = item.find(':');
        if (colon == std::string::npos) throw ParseError(line, "partner must be <thread>:<seq>, got '" + item + "'");
        op.partners.push_back(parse_partner(item.substr(0, colon), item.substr(colon + 1), line));
      }
      if (op.partners.empty()) throw ParseError(line, kw + " needs at least one partner");
      std::set<std::pair<std::uint32_t, std::uint64_t>> uniq;
      for (const auto& q : op.partners) {
        if (!uniq.emplace(q.thread, q.seq).second) throw ParseError(line, kw + " lists a partner twice");
      }
      ops.push_back(std::move(op));
    } else {
      throw ParseError(line, "unknown keyword '" + kw + "'");
    }
  }
  if (p.threads.empty()) throw ParseError(line, "program has no THREAD section");
  return p;
}

namespace {
std::string partners_text(const std::vector<Partner>& ps) {
  std::string s;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(ps[i].thread) + ":" + std::to_string(ps[i].seq);
  }
  return s;
}
}  // namespace

std::string to_text(const Program& p) {
  std::ostringstream os;
  for (const auto& [n, v] : p.globals) os << "GLOBAL " << n << ' ' << v << '\n';
  for (std::size_t t = 0; t < p.threads.size(); ++t) {
    os << "THREAD " << t << '\n';
    for (const auto& op : p.threads[t]) {
      std::visit(
          [&](const auto& o) {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, ReadOp>) {
              os << "READ " << o.cell.str() << ' ' << o.local << '\n';
            } else if constexpr (std::is_same_v<T, WriteOp>) {
              os << "WRITE " << o.cell.str() << ' ' << o.expr.str() << '\n';
            } else if constexpr (std::is_same_v<T, AllocOp>) {
              os << "ALLOC " << o.local << '\n';
            } else {
              if (o.set) {
                os << (o.release ? "RELSET " : "ACQSET ") << partners_text(o.partners) << '\n';
              } else {
                os << (o.release ? "REL " : "ACQ ") << o.partners[0].thread << ' ' << o.partners[0].seq << '\n';
              }
            }
          },
          op);
    }
  }
  return os.str();
}

}  // namespace dc::script
