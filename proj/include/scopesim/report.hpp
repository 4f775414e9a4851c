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

/**
 * @file report.hpp
 * @brief CSV rows and the comparison report of a sweep.
 *
 * Relative metrics use Baseline as the denominator; protocol overhead uses
 * RSP. Ratios are averaged over seeds with a geometric mean.
 */

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "scopesim/experiment.hpp"

namespace scopesim {

inline constexpr std::string_view kCsvHeader =
    "scenario,workload,cus,seed,cycles,l2_accesses,blocks_flushed,blocks_invalidated,steals_succeeded,"
    "cu_stall_cycles";

std::string csv_row(const RunRecord& r);

/// Sorts by (workload, cus, seed, scenario) so output order never depends
/// on execution order.
void sort_records(std::vector<RunRecord>& rows);

/// Header line plus one line per record, in the given order.
std::string format_csv(const std::vector<RunRecord>& rows);

/// Reads the columns written by format_csv, skipping blank and '#' lines;
/// other counters stay zero.
/// Throws std::invalid_argument on a malformed line.
std::vector<RunRecord> parse_csv(std::string_view text);

/// (blocks_flushed + blocks_invalidated) / (remote acquires + releases);
/// zero without remote operations.
double per_remote_op(const Stats& s);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  /// Coefficient of determination; 1 when every y is equal.
  double r2 = 1;
};
/// Least squares over at least two distinct x values.
LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys);

double geomean(const std::vector<double>& values);

/// Speedup and relative L2 accesses over Baseline, overhead against RSP,
/// flush+invalidate per remote operation with a fit over CU counts, and a
/// text bar chart of the mean speedups.
std::string sweep_report(const std::vector<RunRecord>& rows);

}  // namespace scopesim
