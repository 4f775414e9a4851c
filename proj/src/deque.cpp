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

#include "scopesim/deque.hpp"

#include <algorithm>

namespace scopesim {

Address MemoryLayout::alloc(std::uint64_t bytes) {
  Address a{next_};
  std::uint64_t blocks = (bytes + block_size_ - 1) / block_size_;
  next_ += std::max<std::uint64_t>(blocks, 1) * block_size_;
  return a;
}

DequeLayout allocate_deque(MemoryLayout& layout, std::uint32_t capacity, std::uint32_t owner) {
  DequeLayout d;
  d.ctrl = layout.alloc(8);
  d.slots = layout.alloc(8ull * capacity);
  d.capacity = capacity;
  d.owner = owner;
  return d;
}

void init_deque(const DequeLayout& d, const std::vector<std::uint32_t>& tasks, const Poke& poke) {
  if (tasks.size() > d.capacity) throw std::invalid_argument("more tasks than deque capacity");
  for (std::uint32_t i = 0; i < tasks.size(); ++i) poke(d.slot(i), tasks[i]);
  poke(d.ctrl, pack_ctrl(0, static_cast<std::uint32_t>(tasks.size())));
}

Task<DequeResult> deque_pop_tail(Agent& agent, const DequeLayout& d) {
  bool retry = false;
  for (;;) {
    std::uint64_t c = co_await agent.sync(SyncRole::OwnerPop, OpKind::AtomicLoad, d.ctrl,
                                          Ordering::Relaxed, 0, 0, retry);
    std::uint32_t h = ctrl_head(c), t = ctrl_tail(c);
    if (h >= t) co_return DequeResult{DequeStatus::Empty, 0, {}, c};
    std::uint64_t task = co_await agent.load(d.slot(t - 1));
    std::uint64_t old = co_await agent.sync(SyncRole::OwnerPop, OpKind::AtomicCAS, d.ctrl,
                                            Ordering::AcqRel, pack_ctrl(h, t - 1), c);
    if (old == c) {
      auto v = static_cast<std::uint32_t>(task);
      co_return DequeResult{DequeStatus::Task, v, {v}, c};
    }
    retry = true;
  }
}

Task<DequeResult> deque_push_tail(Agent& agent, const DequeLayout& d, std::vector<std::uint32_t> tasks) {
  auto k = static_cast<std::uint32_t>(tasks.size());
  bool retry = false;
  for (;;) {
    std::uint64_t c = co_await agent.sync(SyncRole::OwnerPush, OpKind::AtomicLoad, d.ctrl,
                                          Ordering::Relaxed, 0, 0, retry);
    std::uint32_t h = ctrl_head(c), t = ctrl_tail(c);
    if (std::uint64_t{t} + k > d.capacity) co_return DequeResult{DequeStatus::Conflict, 0, {}, c};
    for (std::uint32_t i = 0; i < k; ++i) co_await agent.store(d.slot(t + i), tasks[i]);
    std::uint64_t old = co_await agent.sync(SyncRole::OwnerPush, OpKind::AtomicCAS, d.ctrl,
                                            Ordering::AcqRel, pack_ctrl(std::min(h, t), t + k), c);
    if (old == c) {
      std::uint32_t first = tasks.empty() ? 0 : tasks.front();
      co_return DequeResult{DequeStatus::Task, first, std::move(tasks), c};
    }
    retry = true;
  }
}

Task<DequeResult> deque_steal_head(Agent& agent, const DequeLayout& d, std::optional<std::uint64_t> hint,
                                   std::uint32_t max_batch, std::uint32_t divisor) {
  std::uint64_t c = hint ? *hint
                         : co_await agent.sync(SyncRole::ThiefSteal, OpKind::AtomicLoad, d.ctrl,
                                               Ordering::Relaxed);
  std::uint32_t h = ctrl_head(c), t = ctrl_tail(c);
  if (h >= t) co_return DequeResult{DequeStatus::Empty, 0, {}, c};
  std::uint32_t k = std::clamp<std::uint32_t>((t - h) / std::max<std::uint32_t>(divisor, 1), 1,
                                              std::max<std::uint32_t>(max_batch, 1));
  // Advancing the head with an add never loses to a concurrent pop: the
  // owner's CAS fails on the changed word, and the returned value shows the
  // true tail.
  std::uint64_t old = co_await agent.sync(SyncRole::ThiefSteal, OpKind::AtomicAdd, d.ctrl,
                                          Ordering::AcqRel, std::uint64_t{k} << 32);
  h = ctrl_head(old);
  t = ctrl_tail(old);
  std::uint32_t got = h >= t ? 0 : std::min(k, t - h);
  if (got < k) {
    // Overshot the tail: pull the head back so head <= tail holds again.
    std::uint64_t cur = old + (std::uint64_t{k} << 32);
    while (ctrl_head(cur) > ctrl_tail(cur)) {
      std::uint64_t want = pack_ctrl(ctrl_tail(cur), ctrl_tail(cur));
      std::uint64_t seen = co_await agent.sync(SyncRole::ThiefSteal, OpKind::AtomicCAS, d.ctrl,
                                               Ordering::AcqRel, want, cur);
      if (seen == cur) break;
      cur = seen;
    }
  }
  if (got == 0) co_return DequeResult{DequeStatus::Empty, 0, {}, old};
  // Claimed slots lie below every later tail, so nobody rewrites them.
  DequeResult r{DequeStatus::Task, 0, {}, old};
  for (std::uint32_t i = 0; i < got; ++i) {
    r.batch.push_back(static_cast<std::uint32_t>(co_await agent.load(d.slot(h + i))));
  }
  r.task = r.batch.front();
  co_return r;
}

}  // namespace scopesim
