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

#include "scopesim/litmus.hpp"

#include <sstream>

#include "scopesim/deque.hpp"

namespace scopesim {

namespace {

constexpr std::uint32_t kLitmusBlock = 64;

// Two words in one block: warming `pad` caches `data` as well.
struct MpAddrs {
  Address data, pad, flag;
};

MpAddrs mp_layout() {
  MemoryLayout mem(kLitmusBlock);
  MpAddrs a;
  a.data = mem.alloc(16);
  a.pad = Address{a.data.value + 8};
  a.flag = mem.alloc(8);
  return a;
}

Task<void> mp_writer(Agent& agent, MpAddrs a) {
  co_await agent.store(a.data, 1);
  co_await agent.litmus(OpKind::AtomicStore, a.flag, Ordering::Release, Scope::WorkGroup, false, 1);
}

Task<void> mp_remote_reader(Agent& agent, MpAddrs a) {
  co_await agent.load(a.pad);
  std::uint64_t f = co_await agent.litmus(OpKind::AtomicLoad, a.flag, Ordering::Acquire, Scope::Device, true);
  agent.record("flag", f);
  if (f == 1) agent.record("data", co_await agent.load(a.data));
}

Task<void> mp_remote_writer(Agent& agent, MpAddrs a) {
  co_await agent.store(a.data, 1);
  co_await agent.litmus(OpKind::AtomicStore, a.flag, Ordering::Release, Scope::Device, true, 1);
}

Task<void> mp_local_reader(Agent& agent, MpAddrs a) {
  co_await agent.load(a.pad);
  co_await agent.litmus(OpKind::AtomicLoad, a.flag, Ordering::Relaxed, Scope::WorkGroup, false);
  std::uint64_t f = co_await agent.litmus(OpKind::AtomicLoad, a.flag, Ordering::Acquire, Scope::WorkGroup, false);
  agent.record("flag", f);
  if (f == 1) agent.record("data", co_await agent.load(a.data));
}

bool flag_implies_data(const Outcome& o) {
  auto f = o.find("flag");
  if (f == o.end()) return false;
  if (f->second == 0) return true;
  auto d = o.find("data");
  return d != o.end() && d->second == 1;
}

struct SbAddrs {
  Address x, y;
};

Task<void> sb_local(Agent& agent, SbAddrs a) {
  co_await agent.litmus(OpKind::AtomicStore, a.x, Ordering::Release, Scope::WorkGroup, false, 1);
  agent.record("r0", co_await agent.litmus(OpKind::AtomicLoad, a.y, Ordering::Acquire, Scope::WorkGroup, false));
}

Task<void> sb_remote_side(Agent& agent, SbAddrs a) {
  co_await agent.litmus(OpKind::AtomicStore, a.y, Ordering::Release, Scope::Device, true, 1);
  agent.record("r1", co_await agent.litmus(OpKind::AtomicLoad, a.x, Ordering::Acquire, Scope::Device, true));
}

struct MutexAddrs {
  Address lock, counter;
};

Task<void> mutex_owner(Agent& agent, MutexAddrs a, std::uint32_t k) {
  for (std::uint32_t i = 0; i < k; ++i) {
    bool retry = false;
    while (co_await agent.litmus(OpKind::AtomicCAS, a.lock, Ordering::AcqRel, Scope::WorkGroup, false, 1, 0,
                                 retry) != 0) {
      retry = true;
    }
    std::uint64_t c = co_await agent.load(a.counter);
    co_await agent.store(a.counter, c + 1);
    co_await agent.litmus(OpKind::AtomicStore, a.lock, Ordering::Release, Scope::WorkGroup, false, 0);
  }
}

Task<void> mutex_thief(Agent& agent, MutexAddrs a, std::uint32_t k) {
  for (std::uint32_t i = 0; i < k; ++i) {
    bool retry = false;
    while (co_await agent.litmus(OpKind::AtomicCAS, a.lock, Ordering::Acquire, Scope::Device, true, 1, 0,
                                 retry) != 0) {
      retry = true;
    }
    std::uint64_t c = co_await agent.load(a.counter);
    co_await agent.store(a.counter, c + 1);
    co_await agent.litmus(OpKind::AtomicStore, a.lock, Ordering::Release, Scope::Device, true, 0);
  }
}

Task<void> deque_owner(Agent& agent, DequeLayout d) {
  DequeResult r = co_await deque_pop_tail(agent, d);
  agent.record("owner", r.status == DequeStatus::Task ? r.task : 0);
}

Task<void> deque_thief(Agent& agent, DequeLayout d) {
  DequeResult r = co_await deque_steal_head(agent, d);
  agent.record("thief", r.status == DequeStatus::Task ? r.task : 0);
}

Task<void> stale_reader(Agent& agent, MpAddrs a) {
  co_await agent.load(a.data);
  agent.record("flag", co_await agent.load(a.flag));
  agent.record("data", co_await agent.load(a.data));
}

Task<void> stale_writer(Agent& agent, MpAddrs a) {
  co_await agent.store(a.data, 1);
  co_await agent.litmus(OpKind::AtomicStore, a.flag, Ordering::Release, Scope::Device, false, 1);
}

}  // namespace

std::string format_outcome(const Outcome& o) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, v] : o) {
    if (!first) os << ' ';
    first = false;
    os << k << '=' << v;
  }
  return os.str();
}

LitmusProgram mp_remote() {
  MpAddrs a = mp_layout();
  LitmusProgram p;
  p.name = "mp_remote";
  p.body = [a](Agent& agent) { return agent.id() == 0 ? mp_writer(agent, a) : mp_remote_reader(agent, a); };
  p.allowed = flag_implies_data;
  return p;
}

LitmusProgram mp_remote_release() {
  MpAddrs a = mp_layout();
  LitmusProgram p;
  p.name = "mp_remote_release";
  p.body = [a](Agent& agent) {
    return agent.id() == 0 ? mp_remote_writer(agent, a) : mp_local_reader(agent, a);
  };
  p.allowed = flag_implies_data;
  return p;
}

LitmusProgram sb_remote() {
  MemoryLayout mem(kLitmusBlock);
  SbAddrs a{mem.alloc(8), mem.alloc(8)};
  LitmusProgram p;
  p.name = "sb_remote";
  p.body = [a](Agent& agent) { return agent.id() == 0 ? sb_local(agent, a) : sb_remote_side(agent, a); };
  // Both loads missing both stores needs a store to pass a later load.
  p.allowed = [](const Outcome& o) { return o.at("r0") == 1 || o.at("r1") == 1; };
  return p;
}

LitmusProgram asym_mutex(std::uint32_t k, std::uint32_t thieves) {
  MemoryLayout mem(kLitmusBlock);
  MutexAddrs a{mem.alloc(8), mem.alloc(8)};
  LitmusProgram p;
  p.name = "asym_mutex(" + std::to_string(k) + (thieves == 1 ? "" : "," + std::to_string(thieves)) + ")";
  p.agents = 1 + thieves;
  p.observed = {{"counter", a.counter}};
  p.body = [a, k](Agent& agent) { return agent.id() == 0 ? mutex_owner(agent, a, k) : mutex_thief(agent, a, k); };
  std::uint64_t want = std::uint64_t{k} * (1 + thieves);
  p.allowed = [want](const Outcome& o) {
    auto c = o.find("counter");
    return c != o.end() && c->second == want;
  };
  return p;
}

LitmusProgram deque_race() {
  MemoryLayout mem(kLitmusBlock);
  DequeLayout d = allocate_deque(mem, 1, 0);
  LitmusProgram p;
  p.name = "deque_race";
  p.init = {{d.slot(0), 7}, {d.ctrl, pack_ctrl(0, 1)}};
  p.body = [d](Agent& agent) { return agent.id() == 0 ? deque_owner(agent, d) : deque_thief(agent, d); };
  p.allowed = [](const Outcome& o) {
    std::uint64_t owner = o.at("owner"), thief = o.at("thief");
    return (owner == 7 && thief == 0) || (owner == 0 && thief == 7);
  };
  p.needs_stealing = true;
  return p;
}

LitmusProgram stale_read_negative() {
  MpAddrs a = mp_layout();
  LitmusProgram p;
  p.name = "stale_read_negative";
  p.body = [a](Agent& agent) { return agent.id() == 0 ? stale_writer(agent, a) : stale_reader(agent, a); };
  p.allowed = [](const Outcome&) { return true; };
  p.required = [](const Outcome& o) { return o.at("flag") == 1 && o.at("data") == 0; };
  p.drf = false;
  return p;
}

std::vector<LitmusProgram> litmus_corpus() {
  return {mp_remote(), mp_remote_release(), sb_remote(), asym_mutex(1), asym_mutex(2),
          deque_race(), stale_read_negative()};
}

}  // namespace scopesim
