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

#include "dc/oracle.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <unordered_set>

#include "dc/runtime.hpp"

namespace dc::oracle {

namespace {

using script::Program;

struct Cell {
  std::uint32_t owner = 0;
  std::uint64_t slot = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
  friend bool operator==(const Cell&, const Cell&) = default;
};

using Label = std::pair<std::uint32_t, std::uint64_t>;  // (thread, sync seq)
using EvId = std::pair<std::uint32_t, std::uint64_t>;   // (writer, write seq)

struct ConflictRec {
  Cell cell;
  std::vector<EvId> writes;
  friend auto operator<=>(const ConflictRec&, const ConflictRec&) = default;
};

struct Failure {
  Outcome::Kind kind = Outcome::Kind::kError;
  std::string text;
  std::vector<ConflictRec> conflicts;
};

// Shared by the enumerators and the runtime driver so outcome text can only
// differ when the underlying results differ.
class Renderer {
 public:
  explicit Renderer(const Program& p) {
    for (const auto& g : p.globals) names_.push_back(g.first);
    std::sort(names_.begin(), names_.end());
  }

  std::size_t globals() const { return names_.size(); }

  Cell global(const std::string& name) const {
    auto it = std::lower_bound(names_.begin(), names_.end(), name);
    return Cell{0, static_cast<std::uint64_t>(it - names_.begin()) + 1};
  }

  std::string cell(const Cell& c) const {
    if (c.owner == 0 && c.slot >= 1 && c.slot <= names_.size()) return names_[c.slot - 1];
    return "[" + std::to_string(c.owner) + ":" + std::to_string(c.slot) + "]";
  }

  static std::string stamp(const EvId& e) {
    return "(" + std::to_string(e.first) + "," + std::to_string(e.second) + ")";
  }

  std::string conflicts(const std::set<ConflictRec>& cs) const {
    std::string s = "race";
    for (const auto& c : cs) {
      s += " " + cell(c.cell) + "{";
      for (std::size_t i = 0; i < c.writes.size(); ++i) s += (i ? "|" : "") + stamp(c.writes[i]);
      s += "}";
    }
    return s;
  }

  // `failures` indexed by thread; `blocked` are threads stuck without failure.
  Outcome combine(const std::vector<std::optional<Failure>>& failures, const std::vector<std::uint32_t>& blocked,
                  const std::map<Cell, std::int64_t>& final_view) const {
    std::set<std::string> errors, pairings;
    std::set<ConflictRec> races;
    std::set<std::uint32_t> stuck(blocked.begin(), blocked.end());
    for (std::size_t t = 0; t < failures.size(); ++t) {
      if (!failures[t]) continue;
      const auto& f = *failures[t];
      switch (f.kind) {
        case Outcome::Kind::kError: errors.insert("thread " + std::to_string(t) + ": " + f.text); break;
        case Outcome::Kind::kPairing: pairings.insert(f.text); break;
        case Outcome::Kind::kRace: races.insert(f.conflicts.begin(), f.conflicts.end()); break;
        case Outcome::Kind::kDeadlock: stuck.insert(static_cast<std::uint32_t>(t)); break;
        case Outcome::Kind::kFinal: break;
      }
    }
    auto joined = [](const std::string& head, const std::set<std::string>& xs) {
      std::string s = head;
      for (const auto& x : xs) s += " " + x;
      return s;
    };
    if (!errors.empty()) return {Outcome::Kind::kError, joined("error", errors)};
    if (!pairings.empty()) return {Outcome::Kind::kPairing, joined("pairing", pairings)};
    if (!races.empty()) return {Outcome::Kind::kRace, conflicts(races)};
    if (!stuck.empty()) {
      std::string s = "deadlock {";
      bool first = true;
      for (auto t : stuck) {
        s += (first ? "" : ",") + std::to_string(t);
        first = false;
      }
      return {Outcome::Kind::kDeadlock, s + "}"};
    }
    std::string s = "final";
    for (const auto& [c, v] : final_view) s += " " + cell(c) + "=" + std::to_string(v);
    return {Outcome::Kind::kFinal, s};
  }

 private:
  std::vector<std::string> names_;
};

std::string pairing_text(const Label& acquirer) {
  return "*->(" + std::to_string(acquirer.first) + "," + std::to_string(acquirer.second) + ")";
}

// ---------------------------------------------------------------------------
// Exhaustive interpreter

struct Event {
  Cell cell;
  std::int64_t value = 0;
  std::vector<EvId> past;  // sorted: everything the writer knew when writing
};

struct Thread {
  std::size_t pc = 0;
  bool arrived = false;  // announced the acquire at pc, now waiting on it
  std::uint64_t sync = 0;
  std::uint64_t writes = 0;
  std::uint64_t allocs = 0;
  std::map<std::string, std::int64_t> locals;
  std::map<std::string, Cell> refs;
  std::set<EvId> known;
  std::vector<Event> events;  // events[i] is write seq i+1
  std::optional<Failure> failure;
};

struct State {
  std::vector<Thread> threads;
  std::map<std::pair<Label, Label>, std::set<EvId>> channels;  // filled, not yet drained
  std::map<Label, std::set<Label>> declared;  // acquire -> partner releases
  std::map<Label, std::set<Label>> named_by;  // acquire -> releases naming it
  std::map<Cell, std::int64_t> store;  // SC only
};

enum class Model { kDc, kSc };

class Explorer {
 public:
  Explorer(const Program& p, const EnumerateOptions& opts, Model model)
      : p_(p), opts_(opts), model_(model), render_(p) {}

  Enumeration run() {
    check_limits(p_, opts_);
    State s;
    s.threads.resize(p_.threads.size());
    s.threads[0].allocs = render_.globals();
    for (const auto& [name, v] : p_.globals) s.store[render_.global(name)] = v;
    dfs(std::move(s));
    result_.states = states_;
    return std::move(result_);
  }

 private:
  const Event& event(const State& s, const EvId& e) const { return s.threads[e.first].events[e.second - 1]; }

  // Latest writes to `c` among `known`: those no other known write to `c` has in its past.
  std::vector<EvId> maximal(const State& s, const std::set<EvId>& known, const Cell& c) const {
    std::vector<EvId> on;
    for (const auto& e : known) {
      if (event(s, e).cell == c) on.push_back(e);
    }
    std::vector<EvId> out;
    for (const auto& e : on) {
      bool superseded = std::any_of(on.begin(), on.end(), [&](const EvId& o) {
        const auto& past = event(s, o).past;
        return o != e && std::binary_search(past.begin(), past.end(), e);
      });
      if (!superseded) out.push_back(e);
    }
    return out;
  }

  std::int64_t dc_value(const State& s, const Thread& t, const Cell& c) const {
    auto m = maximal(s, t.known, c);
    if (m.empty()) {
      auto it = s.store.find(c);  // initial global value
      return it == s.store.end() ? 0 : it->second;
    }
    return event(s, m.front()).value;
  }

  Cell resolve(const Thread& t, const script::CellRef& ref) const {
    if (ref.is_ref) return t.refs.at(ref.name);
    return render_.global(ref.name);
  }

  bool enabled(const State& s, std::uint32_t k) const {
    const auto& t = s.threads[k];
    if (t.failure || t.pc >= p_.threads[k].size()) return false;
    const auto* sync = std::get_if<script::SyncOp>(&p_.threads[k][t.pc]);
    if (!sync || sync->release || !t.arrived) return true;
    Label self{k, t.sync + 1};
    return std::all_of(sync->partners.begin(), sync->partners.end(), [&](const script::Partner& q) {
      return s.channels.contains({Label{q.thread, q.seq}, self});
    });
  }

  void write_event(State& s, std::uint32_t k, const Cell& c, std::int64_t v) {
    auto& t = s.threads[k];
    if (model_ == Model::kSc) {
      s.store[c] = v;
      return;
    }
    Event e{c, v, std::vector<EvId>(t.known.begin(), t.known.end())};
    t.events.push_back(std::move(e));
    t.known.insert(EvId{k, ++t.writes});
  }

  void step(State& s, std::uint32_t k) {
    auto& t = s.threads[k];
    const auto& op = p_.threads[k][t.pc++];
    if (const auto* r = std::get_if<script::ReadOp>(&op)) {
      Cell c = resolve(t, r->cell);
      t.locals[r->local] = model_ == Model::kSc ? s.store.at(c) : dc_value(s, t, c);
    } else if (const auto* w = std::get_if<script::WriteOp>(&op)) {
      write_event(s, k, resolve(t, w->cell), w->expr.eval(t.locals));
    } else if (const auto* a = std::get_if<script::AllocOp>(&op)) {
      Cell c{k, ++t.allocs};
      t.refs[a->local] = c;
      write_event(s, k, c, 0);
    } else {
      const auto& sync = std::get<script::SyncOp>(op);
      std::vector<Label> partners;
      for (const auto& q : sync.partners) partners.emplace_back(q.thread, q.seq);
      std::sort(partners.begin(), partners.end());
      if (!sync.release && !t.arrived) {
        // Arrival: the acquire announces its partners, then waits.
        --t.pc;
        t.arrived = true;
        Label self{k, t.sync + 1};
        auto& mine = s.declared[self];
        mine.insert(partners.begin(), partners.end());
        for (const auto& r : s.named_by[self]) {
          if (!mine.contains(r)) {
            t.failure = Failure{Outcome::Kind::kPairing, pairing_text(self), {}};
            return;
          }
        }
        return;
      }
      Label self{k, ++t.sync};
      if (sync.release) {
        for (const auto& q : partners) {
          if (auto d = s.declared.find(q); d != s.declared.end() && !d->second.contains(self)) {
            t.failure = Failure{Outcome::Kind::kPairing, pairing_text(q), {}};
            return;
          }
          s.named_by[q].insert(self);
          s.channels.emplace(std::make_pair(self, q), model_ == Model::kDc ? t.known : std::set<EvId>{});
        }
        return;
      }
      t.arrived = false;
      std::set<EvId> merged = t.known;
      for (const auto& q : partners) {
        auto it = s.channels.find({q, self});
        merged.insert(it->second.begin(), it->second.end());
        s.channels.erase(it);
      }
      if (model_ == Model::kSc) return;
      std::set<Cell> cells;
      for (const auto& e : merged) cells.insert(event(s, e).cell);
      std::vector<ConflictRec> conflicts;
      for (const auto& c : cells) {
        auto m = maximal(s, merged, c);
        if (m.size() > 1) conflicts.push_back(ConflictRec{c, std::move(m)});
      }
      if (!conflicts.empty()) {
        t.failure = Failure{Outcome::Kind::kRace, {}, std::move(conflicts)};
        return;
      }
      t.known = std::move(merged);
    }
  }

  Outcome finish(const State& s) const {
    std::vector<std::optional<Failure>> failures;
    std::vector<std::uint32_t> blocked;
    for (std::uint32_t k = 0; k < s.threads.size(); ++k) {
      const auto& t = s.threads[k];
      failures.push_back(t.failure);
      if (!t.failure && t.pc < p_.threads[k].size()) blocked.push_back(k);
    }
    std::map<Cell, std::int64_t> view;
    if (model_ == Model::kSc) {
      view = s.store;
    } else {
      const auto& t0 = s.threads[0];
      for (std::size_t g = 1; g <= render_.globals(); ++g) {
        Cell c{0, g};
        view[c] = dc_value(s, t0, c);
      }
      for (const auto& e : t0.known) {
        const Cell& c = event(s, e).cell;
        if (!view.contains(c)) view[c] = dc_value(s, t0, c);
      }
    }
    return render_.combine(failures, blocked, view);
  }

  static void put(std::string& out, std::uint64_t v) { out.append(reinterpret_cast<const char*>(&v), sizeof v); }

  static void put_ids(std::string& out, const auto& ids) {
    put(out, ids.size());
    for (const auto& e : ids) {
      put(out, e.first);
      put(out, e.second);
    }
  }

  // Refs are omitted: they are a function of the program counter.
  std::string encode(const State& s) const {
    std::string out;
    for (const auto& t : s.threads) {
      put(out, t.pc);
      put(out, t.arrived);
      put(out, t.sync);
      if (t.failure) {
        out += t.failure->text;
        for (const auto& c : t.failure->conflicts) {
          put(out, c.cell.owner);
          put(out, c.cell.slot);
          put_ids(out, c.writes);
        }
      }
      out += '\1';
      put(out, t.locals.size());
      for (const auto& [n, v] : t.locals) {
        out += n;
        out += '\0';
        put(out, static_cast<std::uint64_t>(v));
      }
      put_ids(out, t.known);
      put(out, t.events.size());
      for (const auto& e : t.events) {
        put(out, static_cast<std::uint64_t>(e.value));
        put_ids(out, e.past);
      }
    }
    put(out, s.channels.size());
    for (const auto& [id, payload] : s.channels) {
      put(out, id.first.first);
      put(out, id.first.second);
      put(out, id.second.first);
      put(out, id.second.second);
      put_ids(out, payload);
    }
    for (const auto* m : {&s.declared, &s.named_by}) {
      put(out, m->size());
      for (const auto& [l, rs] : *m) {
        put(out, l.first);
        put(out, l.second);
        put_ids(out, rs);
      }
    }
    for (const auto& [c, v] : s.store) {
      put(out, c.owner);
      put(out, c.slot);
      put(out, static_cast<std::uint64_t>(v));
    }
    return out;
  }

  void dfs(State s) {
    if (!opts_.full && !visited_.insert(encode(s)).second) return;
    if (++states_ > opts_.max_states) {
      throw LimitError("state budget of " + std::to_string(opts_.max_states) + " exceeded");
    }
    std::vector<std::uint32_t> ready;
    for (std::uint32_t k = 0; k < s.threads.size(); ++k) {
      if (enabled(s, k)) ready.push_back(k);
    }
    if (opts_.delayed_thread && ready.size() > 1) {
      std::erase(ready, *opts_.delayed_thread);
    }
    if (ready.empty()) {
      result_.outcomes.insert(finish(s));
      return;
    }
    for (std::size_t i = 0; i < ready.size(); ++i) {
      if (i + 1 == ready.size()) {
        step(s, ready[i]);
        dfs(std::move(s));
      } else {
        State next = s;
        step(next, ready[i]);
        dfs(std::move(next));
      }
    }
  }

  const Program& p_;
  EnumerateOptions opts_;
  Model model_;
  Renderer render_;
  std::unordered_set<std::string> visited_;
  std::size_t states_ = 0;
  Enumeration result_;
};

}  // namespace

void check_limits(const Program& p, const EnumerateOptions& opts) {
  if (p.threads.size() > opts.max_threads) {
    throw LimitError("program has " + std::to_string(p.threads.size()) + " threads; the limit is " +
                     std::to_string(opts.max_threads));
  }
  if (p.max_ops_per_thread() > opts.max_ops_per_thread) {
    throw LimitError("a thread has " + std::to_string(p.max_ops_per_thread()) + " ops; the limit is " +
                     std::to_string(opts.max_ops_per_thread));
  }
}

Enumeration enumerate_dc(const Program& p, const EnumerateOptions& opts) {
  return Explorer(p, opts, Model::kDc).run();
}

Enumeration enumerate_sc(const Program& p, const EnumerateOptions& opts) {
  return Explorer(p, opts, Model::kSc).run();
}

Outcome run_on_runtime(const Program& p, const RunOptions& opts) {
  Renderer render(p);
  Globals globals;
  for (const auto& [name, v] : p.globals) globals.emplace_back(name, Value::of<std::int64_t>(v));

  std::vector<Body> bodies;
  for (std::uint32_t k = 0; k < p.threads.size(); ++k) {
    bodies.push_back([&ops = p.threads[k]](Context& ctx) {
      std::map<std::string, std::int64_t> locals;
      std::map<std::string, Address> refs;
      auto resolve = [&](const script::CellRef& c) { return c.is_ref ? refs.at(c.name) : ctx.global(c.name); };
      for (const auto& op : ops) {
        if (const auto* r = std::get_if<script::ReadOp>(&op)) {
          locals[r->local] = ctx.read(resolve(r->cell)).as<std::int64_t>();
        } else if (const auto* w = std::get_if<script::WriteOp>(&op)) {
          ctx.write(resolve(w->cell), Value::of<std::int64_t>(w->expr.eval(locals)));
        } else if (const auto* a = std::get_if<script::AllocOp>(&op)) {
          refs[a->local] = ctx.alloc(Value::of<std::int64_t>(0));
        } else {
          const auto& sync = std::get<script::SyncOp>(op);
          std::vector<SyncLabel> partners;
          for (const auto& q : sync.partners) partners.push_back(SyncLabel{ThreadId(q.thread), q.seq});
          if (sync.release) {
            ctx.release_set(partners);
          } else {
            ctx.acquire_set(partners);
          }
        }
      }
    });
  }

  RuntimeOptions ro;
  ro.perturbation_seed = opts.seed;
  ro.max_delay = opts.max_delay;
  Runtime rt(ro);
  auto results = rt.run_peers(globals, bodies);

  auto to_cell = [](const Address& a) { return Cell{a.owner.path().front(), a.slot}; };
  std::vector<std::optional<Failure>> failures(results.size());
  for (std::size_t k = 0; k < results.size(); ++k) {
    if (!results[k].error) continue;
    try {
      std::rethrow_exception(results[k].error);
    } catch (const PairingError& e) {
      failures[k] = Failure{Outcome::Kind::kPairing, e.channel(), {}};
    } catch (const DataRaceError& e) {
      Failure f{Outcome::Kind::kRace, {}, {}};
      for (const auto& c : e.conflicts()) {
        ConflictRec rec{to_cell(c.address), {}};
        for (const auto& s : c.writes) rec.writes.emplace_back(s.writer.path().front(), s.seq);
        f.conflicts.push_back(std::move(rec));
      }
      failures[k] = std::move(f);
    } catch (const DeadlockError&) {
      failures[k] = Failure{Outcome::Kind::kDeadlock, {}, {}};
    } catch (const std::exception& e) {
      failures[k] = Failure{Outcome::Kind::kError, e.what(), {}};
    }
  }
  std::map<Cell, std::int64_t> view;
  for (const auto& [addr, sv] : results[0].workspace.cells()) view[to_cell(addr)] = sv.value.as<std::int64_t>();
  return render.combine(failures, {}, view);
}

DeterminismReport check_program(const Program& p, const CheckOptions& opts) {
  DeterminismReport r;
  r.program = p.name;
  r.trials = opts.trials;
  r.seed = opts.seed;
  std::set<std::string> seen;
  for (std::uint64_t i = 0; i < opts.trials; ++i) {
    seen.insert(run_on_runtime(p, RunOptions{opts.seed + i, opts.max_delay}).text);
  }
  r.runtime_outcomes.assign(seen.begin(), seen.end());
  try {
    auto dc = enumerate_dc(p, opts.enumerate);
    std::vector<std::string> texts;
    for (const auto& o : dc.outcomes) texts.push_back(o.text);
    r.dc_outcomes = std::move(texts);
    r.sc_outcome_count = enumerate_sc(p, opts.enumerate).outcomes.size();
  } catch (const LimitError& e) {
    r.skipped_reason = e.what();
  }
  return r;
}

std::string digest(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dc::oracle
