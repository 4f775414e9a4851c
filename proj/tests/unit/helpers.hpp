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

// Test helpers: run small hand-written agent programs on the engine.

#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "scopesim/engine.hpp"

namespace scopesim::testing {

using Program = std::function<Task<void>(Agent&)>;

/// Agents on CUs 0..agents-1 run `program`; `init` seeds memory.
class ScriptWorkload final : public Workload {
 public:
  ScriptWorkload(std::uint32_t agents, Program program, std::vector<std::pair<Address, std::uint64_t>> init = {})
      : agents_(agents), program_(std::move(program)), init_(std::move(init)) {}

  std::string name() const override { return "script"; }
  std::uint32_t agent_count(const Config&) const override { return agents_; }
  void initialize(Engine& engine) override {
    for (const auto& [a, v] : init_) engine.poke(a, v);
  }
  Task<void> program(Agent& agent) override { return program_(agent); }

 private:
  std::uint32_t agents_;
  Program program_;
  std::vector<std::pair<Address, std::uint64_t>> init_;
};

inline Config small_config(std::uint32_t cus) {
  Config c = default_config();
  c.num_cus = cus;
  return c;
}

inline EngineOptions options_for(Scenario s, bool trace = false) {
  EngineOptions o;
  o.scenario = s;
  o.check_invariants = true;
  o.trace = trace;
  return o;
}

}  // namespace scopesim::testing
