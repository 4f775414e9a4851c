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
 * @file verifier.hpp
 * @brief Outcome enumeration for litmus programs.
 *
 * Schedules pick which agent issues its next operation; every operation,
 * including a whole remote acquire or release, is one atomic step of the
 * stepped engine. A failed CAS retry is not scheduled again until another
 * agent has made a non-retry step, unless nothing else can run, which keeps
 * spin loops finite without hiding any outcome a retry could produce.
 */

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "scopesim/config.hpp"
#include "scopesim/engine.hpp"
#include "scopesim/litmus.hpp"

namespace scopesim {

class StateSpaceTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RaceDetected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct VerifierOptions {
  /// num_cus is replaced by the program's agent count.
  Config config = default_config();
  bool check_invariants = true;
  std::uint64_t max_schedules = 1'000'000;
  /// Longer schedules end with the outcome {livelock=1}.
  std::uint32_t max_steps = 4096;
};

/// Outcome multiset over the explored schedules.
struct OutcomeSet {
  std::map<Outcome, std::uint64_t> counts;
  std::uint64_t schedules = 0;

  std::set<Outcome> outcomes() const;
};

/// Every schedule. Throws StateSpaceTooLarge beyond max_schedules.
OutcomeSet exhaustive(const LitmusProgram& program, Scenario scenario, const VerifierOptions& opts = {});

/// `n` uniformly random schedules; a pure function of its arguments.
OutcomeSet sample(const LitmusProgram& program, Scenario scenario, std::uint64_t n, std::uint64_t seed,
                  const VerifierOptions& opts = {});

/**
 * Outcomes of interleaving whole synchronization-delimited segments on a
 * sequentially consistent memory. Synchronization follows reads-from
 * between a release and an acquire whose scopes both cover the two agents,
 * or where either side is remote. Throws RaceDetected on two conflicting
 * accesses, at least one plain, that are not ordered by happens-before.
 */
std::set<Outcome> sc_oracle(const LitmusProgram& program, const VerifierOptions& opts = {});

/// Scenario whose lowering runs the program; stealing programs use the
/// stealing variant of the baseline lowering, which is otherwise identical.
Scenario lowering_scenario(const LitmusProgram& program, Scenario scenario);

enum class VerifyMode : std::uint8_t { Exhaustive, Sample };

struct Verdict {
  std::string program;
  Scenario scenario = Scenario::SRSP;
  std::uint64_t schedules = 0;
  std::size_t outcomes = 0;
  bool pass = false;
  std::string detail;
  OutcomeSet set;
};

/**
 * Runs one program and judges it: every outcome allowed, the required
 * outcome seen (exhaustive mode), and for data-race-free programs every
 * outcome within `oracle`. StateSpaceTooLarge propagates.
 */
Verdict verify(const LitmusProgram& program, Scenario scenario, VerifyMode mode, std::uint64_t schedules,
               std::uint64_t seed, const std::optional<std::set<Outcome>>& oracle,
               const VerifierOptions& opts = {});

/// "name scenario schedules outcomes PASS|FAIL"
std::string format_verdict(const Verdict& v);

}  // namespace scopesim
