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

#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dc/bench.hpp"
#include "dc/demos.hpp"
#include "dc/oracle.hpp"
#include "dc/script.hpp"

namespace dc::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

script::Program load(const std::string& source) {
  std::filesystem::path path(source);
  if (std::filesystem::is_regular_file(path)) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return script::parse(ss.str(), path.stem().string());
  }
  if (const auto* text = script::find_builtin(source)) return script::parse(*text, source);
  throw UsageError("no such script file or builtin: " + source);
}

}  // namespace

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deterministic-consistency runtime: demos, determinism checks, oracle, benchmark", "dcrun"};
  app.require_subcommand(1);

  std::string demo_name;
  std::optional<std::uint64_t> demo_seed;
  std::int64_t demo_delay = 2000;
  auto* demo = app.add_subcommand("demo", "Run a bundled demo program");
  demo->add_option("name", demo_name, "swap|pipeline|reduce|ordered|tasks|race")->required();
  demo->add_option("--seed", demo_seed, "Enable seeded perturbation");
  demo->add_option("--delay-us", demo_delay, "Maximum injected delay per operation")->check(CLI::NonNegativeNumber);

  std::string check_src;
  oracle::CheckOptions check_opts;
  std::int64_t check_delay = 2000;
  auto* check = app.add_subcommand("check", "Determinism trials plus oracle enumeration for a script");
  check->add_option("script", check_src, "Script file or builtin name")->required();
  check->add_option("--trials", check_opts.trials, "Perturbed runtime runs")->check(CLI::PositiveNumber);
  check->add_option("--seed", check_opts.seed, "First perturbation seed");
  check->add_option("--delay-us", check_delay, "Maximum injected delay per operation")->check(CLI::NonNegativeNumber);
  check->add_option("--max-states", check_opts.enumerate.max_states, "Enumeration state budget");

  std::string oracle_src, mode = "dc";
  oracle::EnumerateOptions enum_opts;
  std::optional<std::uint32_t> delayed;
  auto* orc = app.add_subcommand("oracle", "List every outcome of a script under DC or SC");
  orc->add_option("script", oracle_src, "Script file or builtin name")->required();
  orc->add_option("--mode", mode, "dc or sc")->check(CLI::IsMember({"dc", "sc"}));
  orc->add_option("--max-states", enum_opts.max_states, "Enumeration state budget");
  orc->add_flag("--full", enum_opts.full, "Explore every interleaving without memoization");
  orc->add_option("--delay-thread", delayed, "Only step this thread when no other thread can");

  bench::Config bcfg = bench::coarse();
  bool fine = false;
  auto* bench_cmd = app.add_subcommand("bench", "Overhead of workspace isolation on a synthetic kernel");
  bench_cmd->add_flag("--fine", fine, "Fine-grained preset: many rounds over a tiny array");
  bench_cmd->add_option("--threads", bcfg.threads, "Worker threads")->check(CLI::PositiveNumber);
  auto* reps_opt = bench_cmd->add_option("--reps", bcfg.reps, "Repetitions")->check(CLI::PositiveNumber);
  auto* size_opt = bench_cmd->add_option("--size", bcfg.size, "Elements")->check(CLI::PositiveNumber);
  auto* rounds_opt = bench_cmd->add_option("--rounds", bcfg.rounds, "Barrier rounds")->check(CLI::PositiveNumber);
  auto* work_opt = bench_cmd->add_option("--work", bcfg.work, "Transform iterations per element")
                       ->check(CLI::PositiveNumber);

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*demo) {
      RuntimeOptions ro;
      ro.perturbation_seed = demo_seed;
      ro.max_delay = std::chrono::microseconds(demo_delay);
      const auto& names = demos::names();
      if (std::find(names.begin(), names.end(), demo_name) == names.end()) {
        err << "error: unknown demo '" << demo_name << "'\n";
        return kUsage;
      }
      auto r = demos::run(demo_name, ro);
      out << r.output;
      return r.exit_code;
    }
    if (*check) {
      check_opts.max_delay = std::chrono::microseconds(check_delay);
      auto report = oracle::check_program(load(check_src), check_opts);
      out << report.to_text();
      return report.pass() ? kOk : kFail;
    }
    if (*orc) {
      auto p = load(oracle_src);
      enum_opts.delayed_thread = delayed;
      auto e = mode == "dc" ? oracle::enumerate_dc(p, enum_opts) : oracle::enumerate_sc(p, enum_opts);
      out << "program=" << p.name << "\nmode=" << mode << "\nstates=" << e.states << "\noutcomes=" << e.outcomes.size()
          << '\n';
      for (const auto& o : e.outcomes) out << "outcome=" << o.text << '\n';
      return kOk;
    }
    if (*bench_cmd) {
      if (fine) {
        auto f = bench::fine();
        f.threads = bcfg.threads;
        if (reps_opt->count()) f.reps = bcfg.reps;
        if (size_opt->count()) f.size = bcfg.size;
        if (rounds_opt->count()) f.rounds = bcfg.rounds;
        if (work_opt->count()) f.work = bcfg.work;
        bcfg = f;
      }
      out << bench::run(bcfg).to_text();
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const script::ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const oracle::LimitError& e) {
    err << "limit exceeded: " << e.what() << "\n";
    return kLimit;
  }
  return kUsage;
}

}  // namespace dc::cli
