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
 * @file l1_cache.hpp
 * @brief Per-CU write-combining L1 data cache with sFIFO, LR-TBL and PA-TBL.
 *
 * The cache is purely functional: it never models time. The engine decides
 * when an operation happens and supplies fetched block contents; the cache
 * reports which blocks must be written back to L2.
 */

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scopesim/config.hpp"
#include "scopesim/sfifo.hpp"
#include "scopesim/types.hpp"

namespace scopesim {

constexpr std::uint32_t kMaxBlockSize = 64;
using BlockBytes = std::array<std::uint8_t, kMaxBlockSize>;

/// Masked block contents travelling from a cache to the next level.
struct Writeback {
  BlockAddr block;
  BlockBytes data{};
  std::uint64_t mask = 0;
};

using Fetcher = std::function<BlockBytes(BlockAddr)>;

/// Little-endian value access into block bytes.
std::uint64_t read_bytes(const BlockBytes& data, std::uint32_t offset, std::uint32_t size);
void write_bytes(BlockBytes& data, std::uint32_t offset, std::uint32_t size, std::uint64_t value);
std::uint64_t byte_mask(std::uint32_t offset, std::uint32_t size);

struct CacheBlock {
  BlockAddr block;
  BlockBytes data{};
  std::uint64_t valid_mask = 0;  // bytes holding meaningful data
  std::uint64_t dirty_mask = 0;
  std::uint64_t lru = 0;
  bool valid() const { return valid_mask != 0; }
};

/// Synchronization address -> handle of the sFIFO record of its latest local release.
class LrTbl {
 public:
  explicit LrTbl(std::uint32_t capacity) : capacity_(capacity) {}

  /// Live handle for `addr`; a dead entry is pruned and reported as absent.
  std::optional<RecordHandle> lookup(Address addr, const SFifo& fifo);
  void upsert(Address addr, RecordHandle h, const SFifo& fifo);
  void erase(Address addr);
  void clear() { entries_.clear(); }

  std::size_t size() const { return entries_.size(); }
  std::uint32_t capacity() const { return capacity_; }
  const std::vector<std::pair<Address, RecordHandle>>& entries() const { return entries_; }

 private:
  std::uint32_t capacity_;
  std::vector<std::pair<Address, RecordHandle>> entries_;
};

/// Addresses whose next local acquire must be promoted to device scope.
class PaTbl {
 public:
  explicit PaTbl(std::uint32_t capacity) : capacity_(capacity) {}

  bool contains(Address addr) const;
  /// Overflow sets the sticky promote_all flag instead of dropping the address.
  void insert(Address addr);
  void clear() {
    entries_.clear();
    promote_all_ = false;
  }

  bool promote_all() const { return promote_all_; }
  std::size_t size() const { return entries_.size(); }
  std::uint32_t capacity() const { return capacity_; }
  const std::vector<Address>& entries() const { return entries_; }

 private:
  std::uint32_t capacity_;
  std::vector<Address> entries_;
  bool promote_all_ = false;
};

/// Which selective-flush responders record the address in their PA-TBL.
enum class PaRecordPolicy : std::uint8_t {
  /// Only an L1 whose LR-TBL held a live entry.
  HitOnly,
  /// Every responder, including those answering miss. Needed once an LR-TBL
  /// entry can die through sFIFO overflow while the L1 keeps a clean copy of
  /// the synchronization variable.
  AllResponders,
};

class DirtyBlocksPresent : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

class L1Cache {
 public:
  struct LoadResult {
    std::uint64_t value = 0;
    bool hit = false;
    std::vector<Writeback> writebacks;
  };

  struct StoreResult {
    std::optional<RecordHandle> enqueued;
    bool hit = false;
    std::vector<Writeback> writebacks;
  };

  struct AtomicResult {
    std::uint64_t value = 0;  // old value
    bool hit = false;
    bool wrote = false;
    std::optional<RecordHandle> enqueued;
    std::vector<Writeback> writebacks;
  };

  enum class AcquireDecision : std::uint8_t { Local, Promoted };

  struct AcquireResult {
    AcquireDecision decision = AcquireDecision::Local;
    AtomicResult atomic;  // meaningful only for Local
  };

  struct SelectiveFlushResult {
    bool hit = false;
    std::size_t drained = 0;
    std::vector<Writeback> writebacks;
  };

  L1Cache(const Config& config, CuId cu, PaRecordPolicy policy = PaRecordPolicy::AllResponders);

  CuId cu() const { return cu_; }

  /// True when [addr, addr+size) can be served without a fetch.
  bool present(Address addr, std::uint32_t size) const;
  bool needs_promotion(Address addr) const { return patbl_.contains(addr); }

  /// Installs fetched contents; bytes dirtied locally are kept.
  std::vector<Writeback> fill(BlockAddr block, const BlockBytes& bytes);

  LoadResult load(Address addr, std::uint32_t size, const Fetcher& fetch);
  /// Write-allocate without fetch; enqueues the block on its clean->dirty transition.
  StoreResult store(Address addr, std::uint32_t size, std::uint64_t value);

  /// Work-group scope atomic without acquire semantics. Release orderings
  /// record the write in the sFIFO and LR-TBL.
  AtomicResult local_atomic(const MemoryOp& op, const Fetcher& fetch);
  AtomicResult local_release_atomic(const MemoryOp& op, const Fetcher& fetch);
  /// Promoted when the PA-TBL names op.addr; the caller then runs full_flush,
  /// full_invalidate and executes the atomic at L2. No state changes in that case.
  AcquireResult local_acquire_atomic(const MemoryOp& op, const Fetcher& fetch);

  SelectiveFlushResult handle_selective_flush(Address addr);
  void handle_selective_invalidate(Address addr);
  std::vector<Writeback> full_flush();
  /// Returns the number of valid blocks dropped.
  std::size_t full_invalidate();

  /// Throws ProtocolError on dirty-coverage or LR-TBL liveness violations.
  void check_invariants() const;

  /// One line per valid block: "set way blockaddr dirtymask(hex)".
  std::string dump() const;

  const SFifo& sfifo() const { return sfifo_; }
  const LrTbl& lrtbl() const { return lrtbl_; }
  const PaTbl& patbl() const { return patbl_; }
  LrTbl& lrtbl() { return lrtbl_; }
  std::size_t dirty_block_count() const;
  std::size_t valid_block_count() const;
  const CacheBlock* find(BlockAddr block) const;

 private:
  CacheBlock* lookup(BlockAddr block);
  CacheBlock& allocate(BlockAddr block, std::vector<Writeback>& writebacks);
  CacheBlock& ensure_present(Address addr, std::uint32_t size, const Fetcher& fetch, bool& hit,
                             std::vector<Writeback>& writebacks);
  void enqueue(BlockAddr block, RecordKind kind, std::optional<RecordHandle>& handle,
               std::vector<Writeback>& writebacks);
  void write_back_if_dirty(BlockAddr block, std::vector<Writeback>& out);
  AtomicResult execute_local(const MemoryOp& op, const Fetcher& fetch, bool record_release);
  std::uint32_t set_of(BlockAddr block) const { return static_cast<std::uint32_t>(block.value % sets_); }

  CuId cu_;
  std::uint32_t block_size_;
  std::uint32_t sets_;
  std::uint32_t ways_;
  PaRecordPolicy policy_;
  std::vector<CacheBlock> blocks_;  // sets_ * ways_, set-major
  std::uint64_t lru_clock_ = 0;
  SFifo sfifo_;
  LrTbl lrtbl_;
  PaTbl patbl_;
};

}  // namespace scopesim
