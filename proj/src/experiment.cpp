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

#include "scopesim/experiment.hpp"

#include <stdexcept>

#include "scopesim/workloads.hpp"

namespace scopesim {

bool is_workload_name(const std::string& name) { return name == "mutex" || parse_kernel(name).has_value(); }

ExperimentResult run_experiment(const Experiment& e, const Graph* graph, const Config& base,
                                const EngineOptions& options) {
  Config c = base;
  c.num_cus = e.cus;
  c.seed = e.seed;
  if (auto errors = validate_config(c); !errors.empty()) throw ConfigError(errors.front());
  EngineOptions o = options;
  o.scenario = e.scenario;

  ExperimentResult out;
  out.record = RunRecord{e.scenario, e.workload, e.cus, e.seed, {}};
  if (e.workload == "mutex") {
    MutexWorkload w({});
    RunResult r = run(w, c, o);
    out.record.stats = r.stats;
    out.correct = w.counter(r.memory) == w.expected_counter();
    out.trace = std::move(r.trace);
    return out;
  }
  auto kernel = parse_kernel(e.workload);
  if (!kernel) throw std::invalid_argument("unknown workload '" + e.workload + "'");
  if (graph == nullptr) throw std::invalid_argument("graph workload without a graph");
  KernelWorkload::Params p;
  p.kernel = *kernel;
  p.imbalance = e.imbalance;
  KernelWorkload w(*graph, p);
  RunResult r = run(w, c, o);
  out.record.stats = r.stats;
  out.correct = w.results(r.memory) == w.reference() && w.tasks_conserved();
  out.trace = std::move(r.trace);
  return out;
}

}  // namespace scopesim
