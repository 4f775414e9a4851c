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
 * @file experiment.hpp
 * @brief One simulation run of a named workload, checked for correctness.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scopesim/config.hpp"
#include "scopesim/engine.hpp"
#include "scopesim/graph.hpp"
#include "scopesim/lowering.hpp"

namespace scopesim {

/// "sssp", "prk" or "mutex".
bool is_workload_name(const std::string& name);

struct Experiment {
  Scenario scenario = Scenario::SRSP;
  std::string workload = "sssp";
  std::uint32_t cus = 16;
  std::uint64_t seed = 1;
  /// Share of tasks placed on deque 0, the same in every scenario.
  double imbalance = 0.9;
};

struct RunRecord {
  Scenario scenario = Scenario::SRSP;
  std::string workload;
  std::uint32_t cus = 0;
  std::uint64_t seed = 0;
  Stats stats;
};

struct ExperimentResult {
  RunRecord record;
  /// Kernel output equals the sequential reference and every task ran
  /// once, or the mutex counter matches the sections entered.
  bool correct = false;
  std::vector<std::string> trace;
};

/**
 * Runs one experiment on top of `base` (num_cus and seed are replaced) and
 * `options` (scenario is replaced). Graph workloads need `graph`. Throws
 * ConfigError, Deadlock or std::invalid_argument.
 */
ExperimentResult run_experiment(const Experiment& e, const Graph* graph, const Config& base,
                                const EngineOptions& options);

}  // namespace scopesim
