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

#include "scopesim/lowering.hpp"

namespace scopesim {

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::Baseline: return "baseline";
    case Scenario::ScopeOnly: return "scope";
    case Scenario::StealOnly: return "steal";
    case Scenario::RSP: return "rsp";
    case Scenario::SRSP: return "srsp";
  }
  return "?";
}

std::optional<Scenario> parse_scenario(std::string_view name) {
  for (auto s : kAllScenarios) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

MemoryOp lower_sync(Scenario s, const SyncIntent& intent) {
  const MemoryOp& t = intent.op;
  if (!t.atomic()) return t;
  if (intent.role == SyncRole::ThiefSteal && !stealing_enabled(s)) throw StealingDisabled();

  switch (s) {
    case Scenario::Baseline:
    case Scenario::StealOnly: return t.with_scope(Scope::Device, false);
    case Scenario::ScopeOnly: return t.with_scope(Scope::WorkGroup, false);
    case Scenario::RSP:
    case Scenario::SRSP:
      switch (intent.role) {
        case SyncRole::OwnerPop:
        case SyncRole::OwnerPush: return t.with_scope(Scope::WorkGroup, false);
        case SyncRole::ThiefSteal:
          return t.with_scope(Scope::Device, t.ordering() != Ordering::Relaxed);
        case SyncRole::LitmusOp: return t;
      }
  }
  return t;
}

}  // namespace scopesim
