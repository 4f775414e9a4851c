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
 * @file sfifo.hpp
 * @brief Bounded FIFO of dirty-block records driving cache flushes.
 *
 * Records are numbered with absolute sequence numbers. Because drains only
 * remove prefixes and overflow evicts the oldest record, the live records are
 * always the contiguous range [head_seq, next_seq), so a handle is live exactly
 * when its sequence number falls inside that range.
 */

#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "scopesim/types.hpp"

namespace scopesim {

enum class RecordKind : std::uint8_t { DataWrite, AtomicWrite };

struct SFifoRecord {
  BlockAddr block;
  RecordKind kind = RecordKind::DataWrite;
  std::uint64_t seq = 0;
  bool operator==(const SFifoRecord&) const = default;
};

struct RecordHandle {
  std::uint64_t seq = 0;
  auto operator<=>(const RecordHandle&) const = default;
};

class SFifo {
 public:
  struct EnqueueResult {
    RecordHandle handle;
    /// Oldest record pushed out by a full FIFO; the owner must write it back.
    std::optional<SFifoRecord> evicted;
  };

  explicit SFifo(std::uint32_t capacity);

  EnqueueResult enqueue(BlockAddr block, RecordKind kind);

  /// Removes every record up to and including `h`. Returns nullopt when the
  /// handle is stale (already drained or evicted, hence already written back).
  std::optional<std::vector<SFifoRecord>> drain_until(RecordHandle h);

  std::vector<SFifoRecord> drain_all();

  bool is_live(RecordHandle h) const { return h.seq >= head_seq_ && h.seq < next_seq_; }

  std::uint32_t capacity() const { return capacity_; }
  std::size_t size() const { return queue_.size(); }
  bool empty() const { return queue_.empty(); }
  std::uint64_t head_seq() const { return head_seq_; }
  std::uint64_t next_seq() const { return next_seq_; }
  const std::deque<SFifoRecord>& records() const { return queue_; }

  /// True when some live record names `block`.
  bool covers(BlockAddr block) const;

  // Conservation bookkeeping: enqueued == evicted + drained + size().
  std::uint64_t total_enqueued() const { return enqueued_; }
  std::uint64_t total_evicted() const { return evicted_; }
  std::uint64_t total_drained() const { return drained_; }

 private:
  std::uint32_t capacity_;
  std::deque<SFifoRecord> queue_;
  std::uint64_t head_seq_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t enqueued_ = 0;
  std::uint64_t evicted_ = 0;
  std::uint64_t drained_ = 0;
};

}  // namespace scopesim
