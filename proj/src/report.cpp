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

#include "scopesim/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace scopesim {

namespace {

using GroupKey = std::pair<std::string, std::uint32_t>;  // workload, cus
// seed -> scenario -> stats
using Group = std::map<std::uint64_t, std::map<Scenario, Stats>>;

std::map<GroupKey, Group> group(const std::vector<RunRecord>& rows) {
  std::map<GroupKey, Group> g;
  for (const auto& r : rows) g[{r.workload, r.cus}][r.seed][r.scenario] = r.stats;
  return g;
}

std::vector<Scenario> present(const std::vector<RunRecord>& rows) {
  std::vector<Scenario> out;
  for (auto s : kAllScenarios) {
    if (std::any_of(rows.begin(), rows.end(), [s](const RunRecord& r) { return r.scenario == s; })) {
      out.push_back(s);
    }
  }
  return out;
}

using Metric = double (*)(const Stats&);

double cycles_of(const Stats& s) { return static_cast<double>(s.cycles); }
double l2_of(const Stats& s) { return static_cast<double>(s.l2_accesses); }
double overhead_of(const Stats& s) { return static_cast<double>(s.blocks_flushed + s.blocks_invalidated); }
double stall_of(const Stats& s) { return static_cast<double>(s.cu_stall_cycles); }

/// Geometric mean over seeds of num(X) / num(ref), or of ref/X when
/// `inverse`; nullopt when no seed has both with a non-zero denominator.
std::optional<double> ratio(const Group& g, Scenario x, Scenario ref, Metric m, bool inverse) {
  std::vector<double> vs;
  for (const auto& [seed, by] : g) {
    auto a = by.find(x), b = by.find(ref);
    if (a == by.end() || b == by.end()) continue;
    double num = inverse ? m(b->second) : m(a->second);
    double den = inverse ? m(a->second) : m(b->second);
    if (den <= 0 || num <= 0) continue;
    vs.push_back(num / den);
  }
  if (vs.empty()) return std::nullopt;
  return geomean(vs);
}

std::string cell(std::optional<double> v) {
  std::ostringstream os;
  if (v) {
    os << std::fixed << std::setprecision(3) << *v;
  } else {
    os << "n/a";
  }
  return os.str();
}

void relative_table(std::ostream& os, const std::string& title, const std::map<GroupKey, Group>& groups,
                    const std::vector<Scenario>& scen, Metric m, bool inverse,
                    std::map<Scenario, std::vector<double>>* collect) {
  os << title << "\n";
  os << std::left << std::setw(10) << "workload" << std::setw(6) << "cus";
  for (auto s : scen) os << std::setw(10) << to_string(s);
  os << "\n";
  std::map<Scenario, std::vector<double>> all;
  for (const auto& [key, g] : groups) {
    os << std::setw(10) << key.first << std::setw(6) << key.second;
    for (auto s : scen) {
      auto v = ratio(g, s, Scenario::Baseline, m, inverse);
      if (v) all[s].push_back(*v);
      os << std::setw(10) << cell(v);
    }
    os << "\n";
  }
  os << std::setw(16) << "geomean";
  for (auto s : scen) {
    std::optional<double> v;
    if (!all[s].empty()) v = geomean(all[s]);
    os << std::setw(10) << cell(v);
  }
  os << "\n\n";
  if (collect) *collect = std::move(all);
}

}  // namespace

std::string csv_row(const RunRecord& r) {
  std::ostringstream os;
  const Stats& s = r.stats;
  os << to_string(r.scenario) << ',' << r.workload << ',' << r.cus << ',' << r.seed << ',' << s.cycles << ','
     << s.l2_accesses << ',' << s.blocks_flushed << ',' << s.blocks_invalidated << ',' << s.steals_succeeded
     << ',' << s.cu_stall_cycles;
  return os.str();
}

void sort_records(std::vector<RunRecord>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const RunRecord& a, const RunRecord& b) {
    return std::tie(a.workload, a.cus, a.seed, a.scenario) < std::tie(b.workload, b.cus, b.seed, b.scenario);
  });
}

std::string format_csv(const std::vector<RunRecord>& rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : rows) out += csv_row(r) + '\n';
  return out;
}

std::vector<RunRecord> parse_csv(std::string_view text) {
  std::vector<RunRecord> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (header) {
      if (line != kCsvHeader) throw std::invalid_argument("unexpected CSV header");
      header = false;
      continue;
    }
    std::vector<std::string> f;
    std::istringstream ls(line);
    for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
    if (f.size() != 10) throw std::invalid_argument("CSV row with " + std::to_string(f.size()) + " fields");
    auto scen = parse_scenario(f[0]);
    if (!scen) throw std::invalid_argument("unknown scenario '" + f[0] + "'");
    RunRecord r;
    r.scenario = *scen;
    r.workload = f[1];
    try {
      r.cus = static_cast<std::uint32_t>(std::stoul(f[2]));
      r.seed = std::stoull(f[3]);
      r.stats.cycles = std::stoull(f[4]);
      r.stats.l2_accesses = std::stoull(f[5]);
      r.stats.blocks_flushed = std::stoull(f[6]);
      r.stats.blocks_invalidated = std::stoull(f[7]);
      r.stats.steals_succeeded = std::stoull(f[8]);
      r.stats.cu_stall_cycles = std::stoull(f[9]);
    } catch (const std::logic_error&) {
      throw std::invalid_argument("bad number in CSV row '" + line + "'");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

double per_remote_op(const Stats& s) {
  std::uint64_t ops = s.remote_acquires + s.remote_releases;
  if (ops == 0) return 0;
  return static_cast<double>(s.blocks_flushed + s.blocks_invalidated) / static_cast<double>(ops);
}

LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw std::invalid_argument("linear fit needs two points");
  double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0) throw std::invalid_argument("linear fit needs two distinct x values");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

double geomean(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("geometric mean of nothing");
  double acc = 0;
  for (double v : values) {
    if (!(v > 0)) throw std::invalid_argument("geometric mean of a non-positive value");
    acc += std::log(v);
  }
  return std::exp(acc / static_cast<double>(values.size()));
}

std::string sweep_report(const std::vector<RunRecord>& rows) {
  std::ostringstream os;
  auto groups = group(rows);
  auto scen = present(rows);

  std::map<Scenario, std::vector<double>> speedups;
  relative_table(os, "speedup over baseline (cycles)", groups, scen, cycles_of, true, &speedups);
  relative_table(os, "l2 accesses relative to baseline", groups, scen, l2_of, false, nullptr);

  bool both = std::count(scen.begin(), scen.end(), Scenario::RSP) && std::count(scen.begin(), scen.end(), Scenario::SRSP);
  if (both) {
    os << "srsp overhead relative to rsp\n";
    os << std::left << std::setw(10) << "workload" << std::setw(6) << "cus" << std::setw(12) << "flush+inv"
       << std::setw(10) << "l2" << std::setw(10) << "stall" << "\n";
    for (const auto& [key, g] : groups) {
      os << std::setw(10) << key.first << std::setw(6) << key.second;
      os << std::setw(12) << cell(ratio(g, Scenario::SRSP, Scenario::RSP, overhead_of, false));
      os << std::setw(10) << cell(ratio(g, Scenario::SRSP, Scenario::RSP, l2_of, false));
      os << std::setw(10) << cell(ratio(g, Scenario::SRSP, Scenario::RSP, stall_of, false)) << "\n";
    }
    os << "\n";
  }

  // Per remote operation, averaged over seeds, then fitted over CU counts.
  std::map<std::pair<std::string, Scenario>, std::map<std::uint32_t, std::vector<double>>> per;
  for (const auto& r : rows) {
    if (!uses_remote_ops(r.scenario)) continue;
    if (r.stats.remote_acquires + r.stats.remote_releases == 0) continue;
    per[{r.workload, r.scenario}][r.cus].push_back(per_remote_op(r.stats));
  }
  if (!per.empty()) {
    os << "flush+invalidate per remote operation\n";
    for (const auto& [key, by_cus] : per) {
      os << std::left << std::setw(10) << key.first << std::setw(6) << to_string(key.second);
      std::vector<double> xs, ys;
      for (const auto& [cus, vs] : by_cus) {
        double mean = 0;
        for (double v : vs) mean += v;
        mean /= static_cast<double>(vs.size());
        xs.push_back(cus);
        ys.push_back(mean);
        os << " cus=" << cus << ':' << std::fixed << std::setprecision(2) << mean;
      }
      if (xs.size() >= 2) {
        LinearFit f = linear_fit(xs, ys);
        double change = ys.front() > 0 ? f.slope * (xs.back() - xs.front()) / ys.front() : 0;
        os << std::setprecision(3) << " slope=" << f.slope << " r2=" << f.r2 << " change=" << change;
      }
      os << "\n";
    }
    os << "\n";
  }

  if (!speedups.empty()) {
    os << "mean speedup over baseline\n";
    double top = 0;
    for (const auto& [s, vs] : speedups) top = std::max(top, geomean(vs));
    for (auto s : scen) {
      auto it = speedups.find(s);
      if (it == speedups.end()) continue;
      double v = geomean(it->second);
      auto len = static_cast<int>(std::lround(top > 0 ? 40.0 * v / top : 0));
      os << std::left << std::setw(10) << to_string(s) << '|' << std::string(static_cast<std::size_t>(len), '#')
         << ' ' << std::fixed << std::setprecision(3) << v << "\n";
    }
  }
  return os.str();
}

}  // namespace scopesim
