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

// Acceptance checks: prints one "criterion N: PASS|FAIL" line per criterion
// and exits nonzero when any fails. Every simulation runs with the cache
// invariant checks enabled; criterion 8 fails if any of them fired.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "scopesim/experiment.hpp"
#include "scopesim/report.hpp"
#include "scopesim/verifier.hpp"
#include "scopesim/workloads.hpp"

using namespace scopesim;

namespace {

int violations = 0;
bool all_pass = true;

EngineOptions checked_options() {
  EngineOptions o;
  o.check_invariants = true;
  return o;
}

const Graph& default_graph() {
  static const Graph g = load_dimacs_file(std::string(SCOPESIM_SOURCE_DIR) + "/data/grid30.gr");
  return g;
}

RunRecord run_checked(Scenario s, const std::string& workload, std::uint32_t cus, std::uint64_t seed,
                      std::ostringstream& detail, bool& ok) {
  Experiment e{s, workload, cus, seed, 0.9};
  auto r = run_experiment(e, &default_graph(), default_config(), checked_options());
  if (!r.correct) {
    ok = false;
    detail << " incorrect result " << csv_row(r.record) << ';';
  }
  return r.record;
}

std::string fmt(double v, int prec = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

/// Runs one criterion, timing it and turning exceptions into a FAIL.
void criterion(int n, double budget_s, const std::function<bool(std::ostringstream&)>& body) {
  std::ostringstream detail;
  bool ok = false;
  auto t0 = std::chrono::steady_clock::now();
  try {
    ok = body(detail);
  } catch (const ProtocolError& e) {
    ++violations;
    detail << " invariant violation: " << e.what();
  } catch (const std::exception& e) {
    detail << " error: " << e.what();
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && secs > budget_s) {
    ok = false;
    detail << " over time budget of " << fmt(budget_s, 0) << " s;";
  }
  all_pass &= ok;
  std::cout << "criterion " << n << ": " << (ok ? "PASS" : "FAIL") << " (" << fmt(secs, 1) << " s)"
            << detail.str() << std::endl;
}

bool has_stale(const std::set<Outcome>& outs) {
  for (const auto& o : outs) {
    auto f = o.find("flag");
    auto d = o.find("data");
    if (f != o.end() && f->second == 1 && d != o.end() && d->second == 0) return true;
  }
  return false;
}

}  // namespace

int main() {
  // 1. Direction of the cycle comparison on an imbalanced shortest-path run.
  criterion(1, 60, [](std::ostringstream& d) {
    bool ok = true;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      auto steal = run_checked(Scenario::StealOnly, "sssp", 16, seed, d, ok);
      auto rsp = run_checked(Scenario::RSP, "sssp", 16, seed, d, ok);
      auto srsp = run_checked(Scenario::SRSP, "sssp", 16, seed, d, ok);
      d << " seed " << seed << ": srsp=" << srsp.stats.cycles << " rsp=" << rsp.stats.cycles
        << " steal=" << steal.stats.cycles << ';';
      ok &= srsp.stats.cycles < rsp.stats.cycles && srsp.stats.cycles < steal.stats.cycles;
    }
    return ok;
  });

  // 2. Flush+invalidate work per remote operation as the CU count grows.
  criterion(2, 60, [](std::ostringstream& d) {
    bool ok = true;
    const std::vector<double> xs{4, 8, 16};
    for (auto s : {Scenario::RSP, Scenario::SRSP}) {
      std::vector<double> ys;
      for (double x : xs) {
        double sum = 0;
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
          sum += per_remote_op(run_checked(s, "mutex", static_cast<std::uint32_t>(x), seed, d, ok).stats);
        }
        ys.push_back(sum / 3);
      }
      auto fit = linear_fit(xs, ys);
      d << ' ' << to_string(s) << ": per-op " << fmt(ys[0], 2) << '/' << fmt(ys[1], 2) << '/' << fmt(ys[2], 2)
        << " slope=" << fmt(fit.slope) << " r2=" << fmt(fit.r2) << ';';
      if (s == Scenario::RSP) {
        ok &= fit.slope > 0 && fit.r2 > 0.9;
      } else {
        // Fitted change across the whole range within 10% of the 4-CU value.
        double change = std::fabs(fit.slope) * (xs.back() - xs.front());
        d << " change=" << fmt(change / ys[0]) << ';';
        ok &= change <= 0.1 * ys[0];
      }
    }
    return ok;
  });

  // 3. L2 accesses of the selective protocol never exceed the naive one.
  criterion(3, 0, [](std::ostringstream& d) {
    bool ok = true;
    std::uint64_t pairs = 0;
    for (const std::string w : {"sssp", "prk", "mutex"}) {
      for (std::uint32_t cus : {4u, 8u, 16u}) {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
          auto rsp = run_checked(Scenario::RSP, w, cus, seed, d, ok);
          auto srsp = run_checked(Scenario::SRSP, w, cus, seed, d, ok);
          ++pairs;
          bool good = w == "mutex" ? srsp.stats.l2_accesses < rsp.stats.l2_accesses
                                   : srsp.stats.l2_accesses <= rsp.stats.l2_accesses;
          if (!good) {
            ok = false;
            d << " violation " << w << " cus=" << cus << " seed=" << seed << " srsp=" << srsp.stats.l2_accesses
              << " rsp=" << rsp.stats.l2_accesses << ';';
          }
        }
      }
    }
    d << ' ' << pairs << " pairs compared;";
    return ok;
  });

  // 4 and 5 share the exhaustive runs.
  std::map<std::string, std::map<Scenario, std::set<Outcome>>> sets;
  criterion(4, 300, [&](std::ostringstream& d) {
    bool ok = true;
    std::uint64_t schedules = 0;
    for (const auto& p : litmus_corpus()) {
      std::optional<std::set<Outcome>> oracle;
      if (p.drf) oracle = sc_oracle(p);
      for (auto s : {Scenario::Baseline, Scenario::RSP, Scenario::SRSP}) {
        auto v = verify(p, s, VerifyMode::Exhaustive, 0, 0, oracle);
        schedules += v.schedules;
        sets[p.name][s] = v.set.outcomes();
        if (!v.pass) {
          ok = false;
          d << ' ' << format_verdict(v) << ' ' << v.detail << ';';
        }
      }
    }
    for (auto s : {Scenario::Baseline, Scenario::RSP, Scenario::SRSP}) {
      if (has_stale(sets["mp_remote"][s])) {
        ok = false;
        d << " stale outcome in mp_remote under " << to_string(s) << ';';
      }
      if (!has_stale(sets["stale_read_negative"][s])) {
        ok = false;
        d << " stale_read_negative lacks the stale outcome under " << to_string(s) << ';';
      }
    }
    d << ' ' << litmus_corpus().size() << " programs, " << schedules << " schedules;";
    return ok;
  });

  criterion(5, 0, [&](std::ostringstream& d) {
    if (sets.empty()) {
      d << " no exhaustive results;";
      return false;
    }
    bool ok = true;
    for (const auto& [name, by] : sets) {
      auto rsp = by.find(Scenario::RSP);
      auto srsp = by.find(Scenario::SRSP);
      if (rsp == by.end() || srsp == by.end() || rsp->second != srsp->second) {
        ok = false;
        d << " sets differ for " << name << ';';
      }
    }
    d << ' ' << sets.size() << " programs compared;";
    return ok;
  });

  // 6. One owner and three remote thieves, sampled.
  criterion(6, 0, [](std::ostringstream& d) {
    bool ok = true;
    auto p = asym_mutex(200, 3);
    VerifierOptions opts;
    // 800 critical sections need far more steps than a litmus-sized program.
    opts.max_steps = 1'000'000;
    for (auto s : {Scenario::RSP, Scenario::SRSP}) {
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto set = sample(p, s, 500, seed, opts);
        for (const auto& o : set.outcomes()) {
          auto c = o.find("counter");
          if (c == o.end() || c->second != 800) {
            ok = false;
            d << ' ' << to_string(s) << " seed " << seed << ": " << format_outcome(o) << ';';
          }
        }
      }
    }
    d << " 2 scenarios x 5 seeds x 500 schedules;";
    return ok;
  });

  // 7. Kernel results against the sequential reference on the bundled graph.
  criterion(7, 0, [](std::ostringstream& d) {
    bool ok = true;
    for (const std::string w : {"sssp", "prk"}) {
      for (auto s : kAllScenarios) run_checked(s, w, 16, 1, d, ok);
    }
    d << ' ' << default_graph().n << " vertices, 2 kernels x 5 scenarios;";
    return ok;
  });

  criterion(8, 0, [](std::ostringstream& d) {
    d << ' ' << violations << " invariant violations;";
    return violations == 0;
  });

  // 9. Repeated runs are bit-identical.
  criterion(9, 0, [](std::ostringstream& d) {
    bool ok = true;
    EngineOptions o = checked_options();
    o.trace = true;
    for (const std::string w : {"sssp", "mutex"}) {
      Experiment e{Scenario::SRSP, w, 8, 2, 0.9};
      auto a = run_experiment(e, &default_graph(), default_config(), o);
      auto b = run_experiment(e, &default_graph(), default_config(), o);
      bool same = csv_row(a.record) == csv_row(b.record) && a.trace == b.trace;
      d << ' ' << w << ": " << a.trace.size() << " trace lines" << (same ? "" : " differ") << ';';
      ok &= same;
    }
    auto s1 = sample(sb_remote(), Scenario::SRSP, 200, 9);
    auto s2 = sample(sb_remote(), Scenario::SRSP, 200, 9);
    ok &= s1.counts == s2.counts;
    return ok;
  });

  return all_pass ? 0 : 1;
}
