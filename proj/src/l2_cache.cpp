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

#include "scopesim/l2_cache.hpp"

#include <sstream>

namespace scopesim {

std::string_view to_string(BroadcastKind k) {
  switch (k) {
    case BroadcastKind::SelectiveFlush: return "selective_flush";
    case BroadcastKind::SelectiveInvalidate: return "selective_invalidate";
    case BroadcastKind::FullFlush: return "full_flush";
    case BroadcastKind::FullInvalidate: return "full_invalidate";
  }
  return "?";
}

std::vector<CuId> broadcast_targets(BroadcastKind kind, CuId origin, std::uint32_t num_cus) {
  std::vector<CuId> out;
  for (CuId c = 0; c < num_cus; ++c) {
    if (c == origin && kind != BroadcastKind::SelectiveInvalidate) continue;
    out.push_back(c);
  }
  return out;
}

L2Cache::L2Cache(const Config& config)
    : block_size_(config.block_size),
      sets_(config.l2_sets()),
      ways_(config.l2_ways),
      lines_(static_cast<std::size_t>(config.l2_sets()) * config.l2_ways),
      sfifo_(config.l2_sfifo_capacity) {}

L2Cache::Line* L2Cache::lookup(BlockAddr block) {
  auto base = static_cast<std::size_t>(set_of(block)) * ways_;
  for (std::size_t w = 0; w < ways_; ++w) {
    if (lines_[base + w].valid && lines_[base + w].block == block) return &lines_[base + w];
  }
  return nullptr;
}

const L2Cache::Line* L2Cache::lookup(BlockAddr block) const {
  return const_cast<L2Cache*>(this)->lookup(block);
}

bool L2Cache::resident(BlockAddr block) const { return lookup(block) != nullptr; }

BlockBytes L2Cache::read_memory(BlockAddr block) const {
  auto it = memory_.find(block.value);
  return it == memory_.end() ? BlockBytes{} : it->second;
}

void L2Cache::write_memory(const Line& line) { memory_[line.block.value] = line.data; }

L2Cache::Line& L2Cache::ensure_resident(BlockAddr block, bool& was_resident) {
  Line* l = lookup(block);
  was_resident = l != nullptr;
  if (l == nullptr) {
    auto base = static_cast<std::size_t>(set_of(block)) * ways_;
    for (std::size_t w = 0; w < ways_; ++w) {
      Line& cand = lines_[base + w];
      if (!cand.valid) {
        l = &cand;
        break;
      }
      if (l == nullptr || cand.lru < l->lru) l = &cand;
    }
    if (l->valid && l->dirty) write_memory(*l);
    *l = Line{};
    l->block = block;
    l->valid = true;
    l->data = read_memory(block);
  }
  l->lru = ++lru_clock_;
  return *l;
}

L2Cache::FetchResult L2Cache::fetch_block(BlockAddr block, LockOwner requester) {
  FetchResult r;
  if (locked_by_other(block, requester)) {
    r.blocked = true;
    return r;
  }
  ++counters_.fetches;
  r.data = ensure_resident(block, r.was_resident).data;
  return r;
}

void L2Cache::writeback(const Writeback& wb) {
  ++counters_.writebacks;
  if (wb.mask == 0) return;
  bool was_resident = false;
  Line& l = ensure_resident(wb.block, was_resident);
  for (std::uint32_t i = 0; i < block_size_; ++i) {
    if (wb.mask >> i & 1) l.data[i] = wb.data[i];
  }
  if (!l.dirty) {
    l.dirty = true;
    auto r = sfifo_.enqueue(wb.block, RecordKind::DataWrite);
    if (r.evicted) {
      if (Line* old = lookup(r.evicted->block); old != nullptr && old->dirty) {
        write_memory(*old);
        old->dirty = false;
      }
    }
  }
}

L2Cache::AtomicResult L2Cache::execute_atomic(const MemoryOp& op, LockOwner requester, Tick tick) {
  AtomicResult r;
  BlockAddr blk = block_of(op.addr(), block_size_);
  if (locked_by_other(blk, requester)) {
    r.blocked = true;
    return r;
  }
  ++counters_.atomics;
  Line& l = ensure_resident(blk, r.was_resident);
  auto offset = static_cast<std::uint32_t>(op.addr().value % block_size_);
  auto out = apply_atomic(op, read_bytes(l.data, offset, op.size()));
  r.old_value = out.old_value;
  if (out.wrote) {
    write_bytes(l.data, offset, op.size(), out.new_value);
    if (!l.dirty) {
      l.dirty = true;
      auto e = sfifo_.enqueue(blk, RecordKind::AtomicWrite);
      if (e.evicted) {
        if (Line* old = lookup(e.evicted->block); old != nullptr && old->dirty) {
          write_memory(*old);
          old->dirty = false;
        }
      }
    }
  }
  if (log_atomics_) {
    atomic_log_.push_back(
        AtomicLogEntry{tick, op.issuer().cu, op.kind(), op.addr(), out.old_value, out.new_value});
  }
  return r;
}

L2Cache::LockResult L2Cache::lock_block(BlockAddr block, LockOwner owner) {
  auto& lock = locks_[block];
  if (lock.owner != kNoOwner && lock.owner != owner) return LockResult::AlreadyLocked;
  lock.owner = owner;
  return LockResult::Ok;
}

std::vector<L2Cache::Waiter> L2Cache::unlock_block(BlockAddr block, LockOwner owner) {
  auto it = locks_.find(block);
  if (it == locks_.end() || it->second.owner != owner) {
    throw NotOwner("unlock of block " + std::to_string(block.value) + " by non-owner");
  }
  auto waiters = std::move(it->second.waiters);
  locks_.erase(it);
  return waiters;
}

bool L2Cache::locked_by_other(BlockAddr block, LockOwner requester) const {
  auto it = locks_.find(block);
  return it != locks_.end() && it->second.owner != kNoOwner && it->second.owner != requester;
}

void L2Cache::wait_for_unlock(BlockAddr block, Waiter w) {
  auto it = locks_.find(block);
  if (it == locks_.end()) throw ProtocolError("waiting on an unlocked block");
  it->second.waiters.push_back(std::move(w));
}

std::uint64_t L2Cache::begin_broadcast(BroadcastKind kind, std::optional<Address> addr, CuId origin,
                                       std::uint32_t expected_acks) {
  if ((kind == BroadcastKind::SelectiveFlush || kind == BroadcastKind::SelectiveInvalidate) && !addr) {
    throw ProtocolError("selective broadcast without an address");
  }
  auto id = next_broadcast_id_++;
  broadcasts_.emplace(id, Broadcast{kind, addr, origin, expected_acks});
  return id;
}

bool L2Cache::ack(std::uint64_t broadcast_id) {
  auto it = broadcasts_.find(broadcast_id);
  if (it == broadcasts_.end() || it->second.outstanding == 0) {
    throw ProtocolError("unexpected ack for broadcast " + std::to_string(broadcast_id));
  }
  if (--it->second.outstanding == 0) {
    broadcasts_.erase(it);
    return true;
  }
  return false;
}

void L2Cache::flush_to_memory() {
  sfifo_.drain_all();
  for (auto& l : lines_) {
    if (l.valid && l.dirty) {
      write_memory(l);
      l.dirty = false;
    }
  }
}

std::uint64_t L2Cache::peek(Address addr, std::uint32_t size) const {
  BlockAddr blk = block_of(addr, block_size_);
  auto offset = static_cast<std::uint32_t>(addr.value % block_size_);
  if (const Line* l = lookup(blk)) return read_bytes(l->data, offset, size);
  return read_bytes(read_memory(blk), offset, size);
}

void L2Cache::poke(Address addr, std::uint32_t size, std::uint64_t value) {
  BlockAddr blk = block_of(addr, block_size_);
  auto offset = static_cast<std::uint32_t>(addr.value % block_size_);
  if (Line* l = lookup(blk)) write_bytes(l->data, offset, size, value);
  BlockBytes& mem = memory_[blk.value];
  write_bytes(mem, offset, size, value);
}

std::string L2Cache::format_atomic_log() const {
  std::ostringstream os;
  for (const auto& e : atomic_log_) {
    os << e.tick << ' ' << e.cu << ' ' << to_string(e.kind) << ' ' << e.addr.value << ' '
       << e.old_value << ' ' << e.new_value << '\n';
  }
  return os.str();
}

std::map<std::uint64_t, BlockBytes> L2Cache::memory_image() const {
  std::map<std::uint64_t, BlockBytes> out(memory_.begin(), memory_.end());
  for (const auto& l : lines_) {
    if (l.valid) out[l.block.value] = l.data;
  }
  return out;
}

void L2Cache::check_invariants() const {
  for (const auto& l : lines_) {
    if (l.valid && l.dirty && !sfifo_.covers(l.block)) {
      throw ProtocolError("L2 dirty-coverage violated for block " + std::to_string(l.block.value));
    }
  }
  if (sfifo_.total_enqueued() != sfifo_.total_evicted() + sfifo_.total_drained() + sfifo_.size()) {
    throw ProtocolError("L2 sFIFO conservation violated");
  }
}

}  // namespace scopesim
