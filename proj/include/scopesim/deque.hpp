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
 * @file deque.hpp
 * @brief Array-based work deque in simulated memory.
 *
 * Head and tail share one 64-bit control word (head in the upper half), so
 * every state change is a single CAS and the owner/thief race on the last
 * element is resolved by whichever CAS lands first. The owner works at the
 * tail, thieves at the head. Every synchronizing access is issued as a
 * SyncIntent so the scenario decides its scope and remoteness.
 */

#pragma once

#include <cstdint>
#include <algorithm>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "scopesim/agent.hpp"
#include "scopesim/coro.hpp"
#include "scopesim/types.hpp"

namespace scopesim {

/// Block-aligned bump allocator for simulated memory regions.
class MemoryLayout {
 public:
  explicit MemoryLayout(std::uint32_t block_size, std::uint64_t base = 0x10000)
      : block_size_(block_size), next_(base) {}
  /// Region of `bytes` starting on a fresh block.
  Address alloc(std::uint64_t bytes);
  std::uint64_t end() const { return next_; }

 private:
  std::uint64_t block_size_;
  std::uint64_t next_;
};

/// Writes one 8-byte word of initial memory.
using Poke = std::function<void(Address, std::uint64_t)>;

constexpr std::uint64_t pack_ctrl(std::uint32_t head, std::uint32_t tail) {
  return (static_cast<std::uint64_t>(head) << 32) | tail;
}
constexpr std::uint32_t ctrl_head(std::uint64_t c) { return static_cast<std::uint32_t>(c >> 32); }
constexpr std::uint32_t ctrl_tail(std::uint64_t c) { return static_cast<std::uint32_t>(c); }

struct DequeLayout {
  Address ctrl;   // alone in its block
  Address slots;  // capacity 8-byte task words
  std::uint32_t capacity = 0;
  std::uint32_t owner = 0;

  Address slot(std::uint32_t i) const { return Address{slots.value + 8ull * i}; }
};

DequeLayout allocate_deque(MemoryLayout& layout, std::uint32_t capacity, std::uint32_t owner);
/// Stores `tasks` with head 0 and tail tasks.size().
void init_deque(const DequeLayout& d, const std::vector<std::uint32_t>& tasks, const Poke& poke);

enum class DequeStatus : std::uint8_t { Task, Empty, Conflict };

struct DequeResult {
  DequeStatus status = DequeStatus::Empty;
  std::uint32_t task = 0;
  /// Every task claimed by a batch steal, `task` first.
  std::vector<std::uint32_t> batch;
  /// Control word seen by a failed steal; a good hint for the next attempt.
  std::uint64_t observed = 0;
};

/// Owner side; retries its CAS until it wins or the deque is empty.
Task<DequeResult> deque_pop_tail(Agent& agent, const DequeLayout& d);
/// Owner side; appends `tasks` at the tail in one publishing CAS. An empty
/// deque whose head overshot the tail is normalized by the same CAS.
/// Conflict means the array is full.
Task<DequeResult> deque_push_tail(Agent& agent, const DequeLayout& d, std::vector<std::uint32_t> tasks);
/// Thief side: reads the control word with a device-scope probe (or takes
/// `hint`), then claims up to `max_batch` tasks at the head with one remote
/// acquire-release add on the head half and reads their slots. The batch is
/// capped at 1/`divisor` of the visible tasks (at least one). A claim past
/// the tail is trimmed and the head restored with CAS; nothing claimed
/// reports Empty.
Task<DequeResult> deque_steal_head(Agent& agent, const DequeLayout& d,
                                   std::optional<std::uint64_t> hint = std::nullopt,
                                   std::uint32_t max_batch = 1, std::uint32_t divisor = 1);

}  // namespace scopesim
