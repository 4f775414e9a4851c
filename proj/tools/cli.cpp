/*
 * Copyright 2026 The scopesim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cli.hpp"

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scopesim/config.hpp"
#include "scopesim/engine.hpp"
#include "scopesim/experiment.hpp"
#include "scopesim/graph.hpp"
#include "scopesim/report.hpp"
#include "scopesim/verifier.hpp"

namespace scopesim::cli {

namespace {

/// Input that parsed as flags but cannot be used.
class BadInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> scenario_names() {
  std::vector<std::string> v;
  for (auto s : kAllScenarios) v.emplace_back(to_string(s));
  return v;
}

std::vector<Scenario> to_scenarios(const std::vector<std::string>& names) {
  std::vector<Scenario> out;
  for (const auto& n : names) {
    if (n == "all") {
      out.assign(std::begin(kAllScenarios), std::end(kAllScenarios));
      continue;
    }
    auto s = parse_scenario(n);
    if (!s) throw BadInput("unknown scenario '" + n + "'");
    out.push_back(*s);
  }
  return out;
}

struct Common {
  std::string graph_file;
  std::string config_file;
  double imbalance = 0.9;
  bool check_invariants = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--graph", c.graph_file, "DIMACS shortest-path graph (default: built-in 30x30 grid)");
  cmd->add_option("--config", c.config_file, "key=value configuration file");
  cmd->add_option("--imbalance", c.imbalance, "share of tasks placed on deque 0")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_flag("--check-invariants", c.check_invariants, "verify cache invariants after every event");
}

Config load_base(const Common& c) {
  Config cfg = c.config_file.empty() ? default_config() : load_config_file(c.config_file);
  if (auto errors = validate_config(cfg); !errors.empty()) throw ConfigError(errors.front());
  return cfg;
}

std::optional<Graph> load_graph(const Common& c, const std::vector<std::string>& workloads) {
  bool needed = false;
  for (const auto& w : workloads) needed = needed || w != "mutex";
  if (!needed) return std::nullopt;
  if (c.graph_file.empty()) return make_grid_graph(30, 30, 100, 7);
  try {
    return load_dimacs_file(c.graph_file);
  } catch (const std::exception& e) {
    throw BadInput(e.what());
  }
}

int cmd_run(const Common& c, const std::string& scenario, const std::string& workload, std::uint32_t cus,
            std::uint64_t seed, const std::string& trace_file, std::ostream& out, std::ostream& err) {
  Config base = load_base(c);
  auto graph = load_graph(c, {workload});
  EngineOptions o;
  o.check_invariants = c.check_invariants;
  o.trace = !trace_file.empty();
  Experiment e{to_scenarios({scenario}).front(), workload, cus, seed, c.imbalance};
  ExperimentResult r = run_experiment(e, graph ? &*graph : nullptr, base, o);
  if (o.trace) {
    std::ofstream t(trace_file);
    if (!t) throw BadInput("cannot write trace file " + trace_file);
    for (const auto& line : r.trace) t << line << '\n';
  }
  out << format_csv({r.record});
  if (!r.correct) {
    err << "result check failed\n";
    return kExitCheckFailed;
  }
  return kExitOk;
}

int cmd_sweep(const Common& c, const std::vector<std::string>& scenarios, const std::vector<std::string>& workloads,
              const std::vector<std::uint32_t>& cus, const std::vector<std::uint64_t>& seeds, bool report,
              std::ostream& out, std::ostream& err) {
  Config base = load_base(c);
  auto graph = load_graph(c, workloads);
  auto scen = to_scenarios(scenarios);
  EngineOptions o;
  o.check_invariants = c.check_invariants;
  std::vector<RunRecord> rows;
  bool all_correct = true;
  for (const auto& w : workloads) {
    for (auto n : cus) {
      for (auto seed : seeds) {
        for (auto s : scen) {
          ExperimentResult r = run_experiment(Experiment{s, w, n, seed, c.imbalance}, graph ? &*graph : nullptr, base, o);
          if (!r.correct) {
            err << "result check failed: " << csv_row(r.record) << '\n';
            all_correct = false;
          }
          rows.push_back(r.record);
        }
      }
    }
  }
  sort_records(rows);
  out << format_csv(rows);
  if (report) {
    std::istringstream rep(sweep_report(rows));
    out << '\n';
    for (std::string line; std::getline(rep, line);) out << (line.empty() ? "#" : "# " + line) << '\n';
  }
  return all_correct ? kExitOk : kExitCheckFailed;
}

int cmd_litmus(const std::string& mode, std::uint64_t schedules, std::uint64_t seed,
               const std::vector<std::string>& scenarios, bool check_invariants, std::uint64_t max_schedules,
               std::ostream& out) {
  auto scen = to_scenarios(scenarios);
  VerifyMode m = mode == "exhaustive" ? VerifyMode::Exhaustive : VerifyMode::Sample;
  VerifierOptions opts;
  opts.check_invariants = check_invariants;
  opts.max_schedules = max_schedules;
  bool pass = true;
  for (const auto& p : litmus_corpus()) {
    std::optional<std::set<Outcome>> oracle;
    if (p.drf) oracle = sc_oracle(p, opts);
    for (auto s : scen) {
      Verdict v = verify(p, s, m, schedules, seed, oracle, opts);
      out << format_verdict(v);
      if (!v.pass && !v.detail.empty()) out << ' ' << v.detail;
      out << '\n';
      pass = pass && v.pass;
    }
  }
  return pass ? kExitOk : kExitLitmusFail;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discrete-event simulator of scoped synchronization with remote scope promotion", "scopesim"};
  app.require_subcommand(1);

  auto names = scenario_names();
  auto with_all = names;
  with_all.emplace_back("all");
  const std::vector<std::string> workload_names{"sssp", "prk", "mutex"};

  Common rc;
  std::string scenario = "srsp", workload = "sssp", trace_file;
  std::uint32_t cus = 16;
  std::uint64_t seed = 1;
  auto* run = app.add_subcommand("run", "run one experiment and print one CSV row");
  run->add_option("--scenario", scenario, "baseline|scope|steal|rsp|srsp")
      ->check(CLI::IsMember(names))
      ->capture_default_str();
  run->add_option("--workload", workload, "sssp|prk|mutex")->check(CLI::IsMember(workload_names))->capture_default_str();
  run->add_option("--cus", cus, "compute units")->check(CLI::Range(1u, 1024u))->capture_default_str();
  run->add_option("--seed", seed, "seed of the broadcast hop jitter")->capture_default_str();
  run->add_option("--trace", trace_file, "write the event trace to this file");
  add_common(run, rc);

  Common sc;
  std::vector<std::string> sweep_scen{"all"}, sweep_work{"sssp", "prk"};
  std::vector<std::uint32_t> sweep_cus{4, 8, 16};
  std::vector<std::uint64_t> sweep_seeds{1, 2, 3};
  bool no_report = false;
  auto* sweep = app.add_subcommand("sweep", "run every scenario x workload x cus x seed combination");
  sweep->add_option("--scenarios", sweep_scen, "scenario list or 'all'")
      ->delimiter(',')
      ->check(CLI::IsMember(with_all))
      ->capture_default_str();
  sweep->add_option("--workloads", sweep_work, "workload list")
      ->delimiter(',')
      ->check(CLI::IsMember(workload_names))
      ->capture_default_str();
  sweep->add_option("--cus", sweep_cus, "CU counts")->delimiter(',')->check(CLI::Range(1u, 1024u))->capture_default_str();
  sweep->add_option("--seeds", sweep_seeds, "seeds")->delimiter(',')->capture_default_str();
  sweep->add_flag("--no-report", no_report, "print only the CSV rows");
  add_common(sweep, sc);

  std::string mode = "exhaustive";
  std::uint64_t schedules = 1000, lseed = 1;
  std::vector<std::string> lit_scen{"baseline", "rsp", "srsp"};
  bool lit_inv = false;
  std::uint64_t max_schedules = VerifierOptions{}.max_schedules;
  auto* litmus = app.add_subcommand("litmus", "check the litmus corpus");
  litmus->add_option("--mode", mode, "exhaustive|sample")
      ->check(CLI::IsMember({"exhaustive", "sample"}))
      ->capture_default_str();
  litmus->add_option("--schedules", schedules, "schedules per program in sample mode")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  litmus->add_option("--seed", lseed, "sampling seed")->capture_default_str();
  litmus->add_option("--scenarios", lit_scen, "scenario list or 'all'")
      ->delimiter(',')
      ->check(CLI::IsMember(with_all))
      ->capture_default_str();
  litmus->add_flag("--check-invariants", lit_inv, "verify cache invariants after every event");
  litmus->add_option("--max-schedules", max_schedules, "exhaustive mode gives up beyond this many schedules")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitBadFlags;
  }

  try {
    if (*run) return cmd_run(rc, scenario, workload, cus, seed, trace_file, out, err);
    if (*sweep) return cmd_sweep(sc, sweep_scen, sweep_work, sweep_cus, sweep_seeds, !no_report, out, err);
    return cmd_litmus(mode, schedules, lseed, lit_scen, lit_inv, max_schedules, out);
  } catch (const BadInput& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kExitBadFlags;
  } catch (const ConfigError& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Deadlock& e) {
    err << "deadlock: " << e.what() << '\n';
    return kExitDeadlock;
  } catch (const StateSpaceTooLarge& e) {
    err << "state space too large: " << e.what() << '\n';
    return kExitTooLarge;
  }
}

}  // namespace scopesim::cli
