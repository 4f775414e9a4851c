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
 * @file l2_cache.hpp
 * @brief Shared L2: backing store for every L1, device-scope atomic unit,
 *        per-block lock table for remote acquires and broadcast bookkeeping.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "scopesim/config.hpp"
#include "scopesim/l1_cache.hpp"
#include "scopesim/sfifo.hpp"
#include "scopesim/types.hpp"

namespace scopesim {

/// Identifies the in-flight request holding an L2 block lock. 0 is "nobody".
using LockOwner = std::uint64_t;
constexpr LockOwner kNoOwner = 0;

enum class BroadcastKind : std::uint8_t { SelectiveFlush, SelectiveInvalidate, FullFlush, FullInvalidate };
std::string_view to_string(BroadcastKind k);

/// CUs that receive a broadcast: everyone but the origin, except that a
/// selective invalidate also reaches the origin's own L1.
std::vector<CuId> broadcast_targets(BroadcastKind kind, CuId origin, std::uint32_t num_cus);

class NotOwner : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

struct AtomicLogEntry {
  Tick tick = 0;
  CuId cu = 0;
  OpKind kind = OpKind::AtomicLoad;
  Address addr;
  std::uint64_t old_value = 0;
  std::uint64_t new_value = 0;
};

class L2Cache {
 public:
  struct FetchResult {
    bool blocked = false;
    bool was_resident = false;
    BlockBytes data{};
  };

  struct AtomicResult {
    bool blocked = false;
    bool was_resident = false;
    std::uint64_t old_value = 0;
  };

  enum class LockResult : std::uint8_t { Ok, AlreadyLocked };

  struct Counters {
    std::uint64_t fetches = 0;
    std::uint64_t writebacks = 0;
    std::uint64_t atomics = 0;
    std::uint64_t total() const { return fetches + writebacks + atomics; }
  };

  using Waiter = std::function<void()>;

  explicit L2Cache(const Config& config);

  bool resident(BlockAddr block) const;

  FetchResult fetch_block(BlockAddr block, LockOwner requester);
  void writeback(const Writeback& wb);
  AtomicResult execute_atomic(const MemoryOp& op, LockOwner requester, Tick tick = 0);

  LockResult lock_block(BlockAddr block, LockOwner owner);
  /// Returns the requests parked on the block, in arrival order, for re-issue.
  std::vector<Waiter> unlock_block(BlockAddr block, LockOwner owner);
  bool locked_by_other(BlockAddr block, LockOwner requester) const;
  void wait_for_unlock(BlockAddr block, Waiter w);
  std::size_t locked_count() const { return locks_.size(); }

  std::uint64_t begin_broadcast(BroadcastKind kind, std::optional<Address> addr, CuId origin,
                                std::uint32_t expected_acks);
  /// Records one ack; true exactly once, when the last expected ack arrives.
  bool ack(std::uint64_t broadcast_id);
  std::size_t pending_broadcasts() const { return broadcasts_.size(); }

  /// Writes every dirty L2 block to memory and empties the sFIFO.
  void flush_to_memory();
  /// Coherent read through L2 and memory, no statistics.
  std::uint64_t peek(Address addr, std::uint32_t size) const;
  /// Initializes memory directly; only valid before simulation starts.
  void poke(Address addr, std::uint32_t size, std::uint64_t value);

  const Counters& counters() const { return counters_; }
  const SFifo& sfifo() const { return sfifo_; }
  const std::vector<AtomicLogEntry>& atomic_log() const { return atomic_log_; }
  void set_atomic_logging(bool on) { log_atomics_ = on; }
  /// "tick cu op addr old new" per executed atomic.
  std::string format_atomic_log() const;

  /// Memory contents after flush_to_memory(), sorted by block address.
  std::map<std::uint64_t, BlockBytes> memory_image() const;

  void check_invariants() const;

 private:
  struct Line {
    BlockAddr block;
    BlockBytes data{};
    bool valid = false;
    bool dirty = false;
    std::uint64_t lru = 0;
  };
  struct Lock {
    LockOwner owner = kNoOwner;
    std::vector<Waiter> waiters;
  };
  struct Broadcast {
    BroadcastKind kind;
    std::optional<Address> addr;
    CuId origin;
    std::uint32_t outstanding;
  };

  Line* lookup(BlockAddr block);
  const Line* lookup(BlockAddr block) const;
  Line& ensure_resident(BlockAddr block, bool& was_resident);
  void write_memory(const Line& line);
  BlockBytes read_memory(BlockAddr block) const;
  std::uint32_t set_of(BlockAddr block) const { return static_cast<std::uint32_t>(block.value % sets_); }

  std::uint32_t block_size_;
  std::uint32_t sets_;
  std::uint32_t ways_;
  std::vector<Line> lines_;
  std::uint64_t lru_clock_ = 0;
  SFifo sfifo_;
  std::unordered_map<std::uint64_t, BlockBytes> memory_;
  std::unordered_map<BlockAddr, Lock> locks_;
  std::map<std::uint64_t, Broadcast> broadcasts_;
  std::uint64_t next_broadcast_id_ = 1;
  Counters counters_;
  bool log_atomics_ = false;
  std::vector<AtomicLogEntry> atomic_log_;
};

}  // namespace scopesim
