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
 * @file lowering.hpp
 * @brief Evaluation scenarios and the lowering of synchronization intents
 *        into concrete scoped memory operations.
 */

#pragma once

#include <optional>
#include <stdexcept>
#include <string_view>

#include "scopesim/types.hpp"

namespace scopesim {

enum class Scenario : std::uint8_t { Baseline, ScopeOnly, StealOnly, RSP, SRSP };

inline constexpr Scenario kAllScenarios[] = {Scenario::Baseline, Scenario::ScopeOnly,
                                             Scenario::StealOnly, Scenario::RSP, Scenario::SRSP};

/// CLI spelling: baseline, scope, steal, rsp, srsp.
std::string_view to_string(Scenario s);
std::optional<Scenario> parse_scenario(std::string_view name);

inline bool stealing_enabled(Scenario s) { return s != Scenario::Baseline && s != Scenario::ScopeOnly; }
inline bool uses_remote_ops(Scenario s) { return s == Scenario::RSP || s == Scenario::SRSP; }

enum class SyncRole : std::uint8_t { OwnerPop, ThiefSteal, OwnerPush, LitmusOp };

struct SyncIntent {
  SyncRole role;
  MemoryOp op;  // template; scope and remoteness are replaced by lowering
};

class StealingDisabled : public std::runtime_error {
 public:
  StealingDisabled() : std::runtime_error("stealing is disabled in this scenario") {}
};

/**
 * Scope assignment per scenario:
 *  - Baseline, StealOnly: device scope everywhere
 *  - ScopeOnly: work-group scope everywhere
 *  - RSP, SRSP: owners use work-group scope, thieves use remote device scope
 * LitmusOp templates keep their own scope under RSP/SRSP. A relaxed template
 * never becomes remote. Thief intents throw StealingDisabled where stealing is off.
 */
MemoryOp lower_sync(Scenario s, const SyncIntent& intent);

}  // namespace scopesim
