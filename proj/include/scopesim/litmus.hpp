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
 * @file litmus.hpp
 * @brief Small concurrent programs with a declared set of allowed outcomes.
 *
 * Agent i runs on CU i as work-group i. Synchronizing accesses carry their
 * own scope and remoteness; the scenario lowering decides what reaches the
 * caches. Programs stay within 4 agents and 8 operations per agent, not
 * counting failed CAS retries.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "scopesim/agent.hpp"
#include "scopesim/coro.hpp"

namespace scopesim {

/// Named final values: agent registers plus observed memory words.
using Outcome = std::map<std::string, std::uint64_t>;

/// "k1=v1 k2=v2" in key order.
std::string format_outcome(const Outcome& o);

struct LitmusProgram {
  std::string name;
  std::uint32_t agents = 2;
  /// Initial 8-byte words; everything else starts at zero.
  std::vector<std::pair<Address, std::uint64_t>> init;
  /// Final memory words that become part of the outcome.
  std::vector<std::pair<std::string, Address>> observed;
  std::function<Task<void>(Agent&)> body;
  std::function<bool(const Outcome&)> allowed;
  /// At least one explored outcome must satisfy this (exhaustive mode).
  std::function<bool(const Outcome&)> required;
  /// Data-race-free under its own synchronization.
  bool drf = true;
  /// Uses thief-side deque operations.
  bool needs_stealing = false;
};

/// Stores `data`, then publishes `flag` with a work-group release. The
/// reader warms the data block, acquires `flag` remotely and loads `data`
/// only when the flag is set.
LitmusProgram mp_remote();
/// Mirror image: the remote side releases, the owner acquires at
/// work-group scope after warming both blocks.
LitmusProgram mp_remote_release();
/// Store buffering between a work-group agent and a remote agent.
LitmusProgram sb_remote();
/// One owner and `thieves` remote thieves each enter a critical section
/// `k` times and increment a shared counter with plain accesses.
LitmusProgram asym_mutex(std::uint32_t k, std::uint32_t thieves = 1);
/// Owner pop racing one thief steal on a one-element deque.
LitmusProgram deque_race();
/// Message passing with plain loads and no acquire: the reader may see the
/// flag but keep a stale cached copy of the data.
LitmusProgram stale_read_negative();

std::vector<LitmusProgram> litmus_corpus();

}  // namespace scopesim
