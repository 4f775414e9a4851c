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

#include "scopesim/l1_cache.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace scopesim {

std::uint64_t read_bytes(const BlockBytes& data, std::uint32_t offset, std::uint32_t size) {
  std::uint64_t v = 0;
  for (std::uint32_t i = 0; i < size; ++i) v |= std::uint64_t{data[offset + i]} << (8 * i);
  return v;
}

void write_bytes(BlockBytes& data, std::uint32_t offset, std::uint32_t size, std::uint64_t value) {
  for (std::uint32_t i = 0; i < size; ++i) data[offset + i] = static_cast<std::uint8_t>(value >> (8 * i));
}

std::uint64_t byte_mask(std::uint32_t offset, std::uint32_t size) {
  std::uint64_t bits = size >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << size) - 1);
  return bits << offset;
}

// ---------------------------------------------------------------------------
// LR-TBL / PA-TBL

std::optional<RecordHandle> LrTbl::lookup(Address addr, const SFifo& fifo) {
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == addr; });
  if (it == entries_.end()) return std::nullopt;
  if (!fifo.is_live(it->second)) {
    entries_.erase(it);
    return std::nullopt;
  }
  return it->second;
}

void LrTbl::upsert(Address addr, RecordHandle h, const SFifo& fifo) {
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == addr; });
  if (it != entries_.end()) {
    it->second = h;
    return;
  }
  std::erase_if(entries_, [&](const auto& e) { return !fifo.is_live(e.second); });
  // Every remaining entry names a distinct live record, so this cannot trip
  // while capacity equals the sFIFO capacity.
  if (entries_.size() >= capacity_) throw ProtocolError("LR-TBL overflow with only live entries");
  entries_.emplace_back(addr, h);
}

void LrTbl::erase(Address addr) {
  std::erase_if(entries_, [&](const auto& e) { return e.first == addr; });
}

bool PaTbl::contains(Address addr) const {
  return promote_all_ || std::find(entries_.begin(), entries_.end(), addr) != entries_.end();
}

void PaTbl::insert(Address addr) {
  if (std::find(entries_.begin(), entries_.end(), addr) != entries_.end()) return;
  if (entries_.size() >= capacity_) {
    promote_all_ = true;
    return;
  }
  entries_.push_back(addr);
}

// ---------------------------------------------------------------------------
// L1Cache

L1Cache::L1Cache(const Config& config, CuId cu, PaRecordPolicy policy)
    : cu_(cu),
      block_size_(config.block_size),
      sets_(config.l1_sets()),
      ways_(config.l1_ways),
      policy_(policy),
      blocks_(static_cast<std::size_t>(config.l1_sets()) * config.l1_ways),
      sfifo_(config.l1_sfifo_capacity),
      lrtbl_(config.l1_sfifo_capacity),
      patbl_(config.patbl_capacity) {}

CacheBlock* L1Cache::lookup(BlockAddr block) {
  auto base = static_cast<std::size_t>(set_of(block)) * ways_;
  for (std::size_t w = 0; w < ways_; ++w) {
    CacheBlock& b = blocks_[base + w];
    if (b.valid() && b.block == block) return &b;
  }
  return nullptr;
}

const CacheBlock* L1Cache::find(BlockAddr block) const {
  return const_cast<L1Cache*>(this)->lookup(block);
}

bool L1Cache::present(Address addr, std::uint32_t size) const {
  const CacheBlock* b = find(block_of(addr, block_size_));
  if (b == nullptr) return false;
  auto m = byte_mask(static_cast<std::uint32_t>(addr.value % block_size_), size);
  return (b->valid_mask & m) == m;
}

CacheBlock& L1Cache::allocate(BlockAddr block, std::vector<Writeback>& writebacks) {
  auto base = static_cast<std::size_t>(set_of(block)) * ways_;
  CacheBlock* victim = nullptr;
  for (std::size_t w = 0; w < ways_; ++w) {
    CacheBlock& b = blocks_[base + w];
    if (!b.valid()) {
      victim = &b;
      break;
    }
    if (victim == nullptr || b.lru < victim->lru) victim = &b;
  }
  if (victim->valid() && victim->dirty_mask != 0) {
    // The stale sFIFO record stays behind and is skipped as clean when drained.
    writebacks.push_back(Writeback{victim->block, victim->data, victim->dirty_mask});
  }
  *victim = CacheBlock{};
  victim->block = block;
  victim->lru = ++lru_clock_;
  return *victim;
}

std::vector<Writeback> L1Cache::fill(BlockAddr block, const BlockBytes& bytes) {
  std::vector<Writeback> writebacks;
  CacheBlock* b = lookup(block);
  if (b == nullptr) b = &allocate(block, writebacks);
  for (std::uint32_t i = 0; i < block_size_; ++i) {
    if ((b->dirty_mask >> i & 1) == 0) b->data[i] = bytes[i];
  }
  b->valid_mask = byte_mask(0, block_size_);
  b->lru = ++lru_clock_;
  return writebacks;
}

CacheBlock& L1Cache::ensure_present(Address addr, std::uint32_t size, const Fetcher& fetch,
                                    bool& hit, std::vector<Writeback>& writebacks) {
  BlockAddr blk = block_of(addr, block_size_);
  hit = present(addr, size);
  if (!hit) {
    if (!fetch) throw ProtocolError("L1 miss without a fetch path");
    auto wbs = fill(blk, fetch(blk));
    writebacks.insert(writebacks.end(), wbs.begin(), wbs.end());
  }
  CacheBlock* b = lookup(blk);
  b->lru = ++lru_clock_;
  return *b;
}

void L1Cache::write_back_if_dirty(BlockAddr block, std::vector<Writeback>& out) {
  CacheBlock* b = lookup(block);
  if (b == nullptr || b->dirty_mask == 0) return;
  out.push_back(Writeback{b->block, b->data, b->dirty_mask});
  b->dirty_mask = 0;
}

void L1Cache::enqueue(BlockAddr block, RecordKind kind, std::optional<RecordHandle>& handle,
                      std::vector<Writeback>& writebacks) {
  auto r = sfifo_.enqueue(block, kind);
  handle = r.handle;
  if (r.evicted) write_back_if_dirty(r.evicted->block, writebacks);
}

L1Cache::LoadResult L1Cache::load(Address addr, std::uint32_t size, const Fetcher& fetch) {
  LoadResult r;
  CacheBlock& b = ensure_present(addr, size, fetch, r.hit, r.writebacks);
  r.value = read_bytes(b.data, static_cast<std::uint32_t>(addr.value % block_size_), size);
  return r;
}

L1Cache::StoreResult L1Cache::store(Address addr, std::uint32_t size, std::uint64_t value) {
  StoreResult r;
  BlockAddr blk = block_of(addr, block_size_);
  auto offset = static_cast<std::uint32_t>(addr.value % block_size_);
  CacheBlock* b = lookup(blk);
  r.hit = b != nullptr;
  if (b == nullptr) b = &allocate(blk, r.writebacks);
  b->lru = ++lru_clock_;
  bool was_clean = b->dirty_mask == 0;
  write_bytes(b->data, offset, size, value);
  auto m = byte_mask(offset, size);
  b->valid_mask |= m;
  b->dirty_mask |= m;
  if (was_clean) enqueue(blk, RecordKind::DataWrite, r.enqueued, r.writebacks);
  return r;
}

L1Cache::AtomicResult L1Cache::execute_local(const MemoryOp& op, const Fetcher& fetch,
                                             bool record_release) {
  AtomicResult r;
  BlockAddr blk = block_of(op.addr(), block_size_);
  auto offset = static_cast<std::uint32_t>(op.addr().value % block_size_);
  CacheBlock& b = ensure_present(op.addr(), op.size(), fetch, r.hit, r.writebacks);
  auto out = apply_atomic(op, read_bytes(b.data, offset, op.size()));
  r.value = out.old_value;
  r.wrote = out.wrote;
  if (!out.wrote) return r;
  write_bytes(b.data, offset, op.size(), out.new_value);
  b.dirty_mask |= byte_mask(offset, op.size());
  // Atomic writes always get their own record: it marks the release position.
  enqueue(blk, RecordKind::AtomicWrite, r.enqueued, r.writebacks);
  if (record_release) lrtbl_.upsert(op.addr(), *r.enqueued, sfifo_);
  return r;
}

L1Cache::AtomicResult L1Cache::local_atomic(const MemoryOp& op, const Fetcher& fetch) {
  return execute_local(op, fetch, has_release(op.ordering()));
}

L1Cache::AtomicResult L1Cache::local_release_atomic(const MemoryOp& op, const Fetcher& fetch) {
  if (op.remote()) throw ProtocolError("local release given a remote op");
  return execute_local(op, fetch, true);
}

L1Cache::AcquireResult L1Cache::local_acquire_atomic(const MemoryOp& op, const Fetcher& fetch) {
  if (op.remote()) throw ProtocolError("local acquire given a remote op");
  AcquireResult r;
  if (patbl_.contains(op.addr())) {
    r.decision = AcquireDecision::Promoted;
    return r;
  }
  r.atomic = execute_local(op, fetch, has_release(op.ordering()));
  return r;
}

L1Cache::SelectiveFlushResult L1Cache::handle_selective_flush(Address addr) {
  SelectiveFlushResult r;
  auto h = lrtbl_.lookup(addr, sfifo_);
  if (!h) {
    if (policy_ == PaRecordPolicy::AllResponders) patbl_.insert(addr);
    return r;
  }
  auto drained = sfifo_.drain_until(*h);
  r.hit = true;
  r.drained = drained->size();
  for (const auto& rec : *drained) write_back_if_dirty(rec.block, r.writebacks);
  lrtbl_.erase(addr);
  patbl_.insert(addr);
  return r;
}

void L1Cache::handle_selective_invalidate(Address addr) { patbl_.insert(addr); }

std::vector<Writeback> L1Cache::full_flush() {
  std::vector<Writeback> out;
  for (const auto& rec : sfifo_.drain_all()) write_back_if_dirty(rec.block, out);
  return out;
}

std::size_t L1Cache::full_invalidate() {
  std::size_t n = 0;
  for (const auto& b : blocks_) {
    if (b.dirty_mask != 0) throw DirtyBlocksPresent("full_invalidate on L1 with dirty blocks");
  }
  for (auto& b : blocks_) {
    if (!b.valid()) continue;
    ++n;
    b = CacheBlock{};
  }
  lrtbl_.clear();
  patbl_.clear();
  return n;
}

void L1Cache::check_invariants() const {
  for (const auto& b : blocks_) {
    if (b.dirty_mask != 0 && !sfifo_.covers(b.block)) {
      throw ProtocolError("dirty-coverage violated on L1 " + std::to_string(cu_) + " block " +
                          std::to_string(b.block.value));
    }
    if ((b.dirty_mask & ~b.valid_mask) != 0) throw ProtocolError("dirty bytes outside valid bytes");
  }
  if (sfifo_.size() > sfifo_.capacity()) throw ProtocolError("sFIFO over capacity");
  if (sfifo_.total_enqueued() != sfifo_.total_evicted() + sfifo_.total_drained() + sfifo_.size()) {
    throw ProtocolError("sFIFO conservation violated on L1 " + std::to_string(cu_));
  }
  if (lrtbl_.size() > lrtbl_.capacity()) throw ProtocolError("LR-TBL over capacity");
  if (patbl_.size() > patbl_.capacity()) throw ProtocolError("PA-TBL over capacity");
}

std::size_t L1Cache::dirty_block_count() const {
  return static_cast<std::size_t>(
      std::count_if(blocks_.begin(), blocks_.end(), [](const CacheBlock& b) { return b.dirty_mask != 0; }));
}

std::size_t L1Cache::valid_block_count() const {
  return static_cast<std::size_t>(
      std::count_if(blocks_.begin(), blocks_.end(), [](const CacheBlock& b) { return b.valid(); }));
}

std::string L1Cache::dump() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = blocks_[i];
    if (!b.valid()) continue;
    char mask[24];
    std::snprintf(mask, sizeof mask, "%llx", static_cast<unsigned long long>(b.dirty_mask));
    os << i / ways_ << ' ' << i % ways_ << ' ' << b.block.value << ' ' << mask << '\n';
  }
  return os.str();
}

}  // namespace scopesim
