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

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <memory>
#include <set>

#include "helpers.hpp"
#include "scopesim/workloads.hpp"

using namespace scopesim;
using scopesim::testing::options_for;
using scopesim::testing::Program;
using scopesim::testing::ScriptWorkload;
using scopesim::testing::small_config;

namespace {

constexpr Address kL{0x1000};
constexpr Address kY{0x2000};
constexpr Address kZ{0x3000};

/// Runs a script to quiescence and keeps the engine for inspection.
std::unique_ptr<Engine> drive(std::uint32_t cus, std::uint32_t agents, Program p, EngineOptions o) {
  auto e = std::make_unique<Engine>(small_config(cus), o);
  ScriptWorkload w(agents, std::move(p));
  w.initialize(*e);
  for (CuId cu = 0; cu < agents; ++cu) e->add_agent(cu);
  for (AgentId id = 0; id < agents; ++id) e->spawn(id, w.program(e->agent(id)));
  e->run();
  return e;
}

/// CU0 writes Y then releases L at work-group scope; CU1 later acquires L
/// remotely and reads Y. CU2 holds unrelated dirty data.
Task<void> remote_acquire_script(Agent& a) {
  switch (a.id()) {
    case 0:
      co_await a.store(kY, 42);
      co_await a.atomic(OpKind::AtomicStore, kL, Ordering::Release, Scope::WorkGroup, false, 0);
      break;
    case 1: {
      co_await a.delay(200);
      auto old = co_await a.atomic(OpKind::AtomicCAS, kL, Ordering::Acquire, Scope::Device, true, 1, 0);
      a.record("old", old);
      a.record("y", co_await a.load(kY));
      break;
    }
    case 2:
      co_await a.store(kZ, 5);
      break;
    default:
      break;
  }
}

/// Golden file split into its '#' comment header and the trace body.
std::pair<std::string, std::string> read_golden(const std::string& path) {
  std::ifstream in(path);
  std::string header, body;
  for (std::string line; std::getline(in, line);) {
    (line.starts_with("#") ? header : body) += line + '\n';
  }
  return {header, body};
}

}  // namespace

TEST_SUITE("sim-engine") {
  TEST_CASE("store then device release on one CU") {
    Program p = [](Agent& a) -> Task<void> {
      co_await a.store(kY, 1);
      co_await a.atomic(OpKind::AtomicStore, kL, Ordering::Release, Scope::Device, false, 1);
    };
    ScriptWorkload w(1, p);
    auto r = run(w, small_config(1), options_for(Scenario::SRSP));
    CHECK(r.stats.cycles == 156);
    CHECK(r.stats.blocks_flushed == 1);
    CHECK(r.stats.l2_accesses == 2);
    CHECK(r.stats.l2_writebacks == 1);
    CHECK(r.stats.l2_atomics == 1);
    CHECK(read_word(r.memory, kY, 64) == 1);
    CHECK(read_word(r.memory, kL, 64) == 1);
  }

  TEST_CASE("an empty workload yields zero statistics") {
    ScriptWorkload w(0, [](Agent&) -> Task<void> { co_return; });
    auto r = run(w, small_config(4), options_for(Scenario::SRSP));
    CHECK(r.stats == Stats{});
  }

  TEST_CASE("a device release on a clean cache writes nothing back") {
    Program p = [](Agent& a) -> Task<void> {
      co_await a.atomic(OpKind::AtomicStore, kL, Ordering::Release, Scope::Device, false, 1);
    };
    ScriptWorkload w(1, p);
    auto r = run(w, small_config(1), options_for(Scenario::Baseline));
    CHECK(r.stats.blocks_flushed == 0);
    CHECK(r.stats.l2_writebacks == 0);
    CHECK(r.stats.l2_atomics == 1);
  }

  TEST_CASE("a device-scope owner pop flushes and invalidates") {
    Program p = [](Agent& a) -> Task<void> {
      co_await a.load(kZ);
      co_await a.store(kY, 3);
      co_await a.sync(SyncRole::OwnerPop, OpKind::AtomicCAS, kL, Ordering::AcqRel, 1, 0);
    };
    ScriptWorkload w(1, p);
    auto r = run(w, small_config(1), options_for(Scenario::Baseline));
    CHECK(r.stats.blocks_flushed == 1);
    CHECK(r.stats.blocks_invalidated == 2);
  }

  TEST_CASE("a remote acquire flushes only the releasing L1") {
    auto e = drive(4, 4, remote_acquire_script, options_for(Scenario::SRSP));
    CHECK(e->agent(1).registers().at("old") == 0);
    CHECK(e->agent(1).registers().at("y") == 42);
    auto s = e->stats();
    CHECK(s.remote_acquires == 1);
    CHECK(s.selective_flush_requests == 3);
    CHECK(s.blocks_flushed == 2);
    CHECK(s.cu_stall_cycles > 0);
    CHECK(e->l1(0).patbl().contains(kL));
    CHECK(e->l1(0).lrtbl().size() == 0);
    CHECK(e->l1(0).sfifo().empty());
    // Unrelated dirty data stays put.
    CHECK(e->l1(2).dirty_block_count() == 1);
    e->final_drain();
  }

  TEST_CASE("naive remote acquire flushes at least as much") {
    auto naive = drive(4, 4, remote_acquire_script, options_for(Scenario::RSP));
    auto selective = drive(4, 4, remote_acquire_script, options_for(Scenario::SRSP));
    CHECK(naive->agent(1).registers().at("y") == 42);
    CHECK(naive->stats().blocks_flushed == 3);
    CHECK(naive->stats().full_flush_requests == 3);
    CHECK(naive->stats().blocks_flushed > selective->stats().blocks_flushed);
  }

  TEST_CASE("a remote acquire of an own release skips the broadcast") {
    Program p = [](Agent& a) -> Task<void> {
      co_await a.store(kY, 1);
      co_await a.atomic(OpKind::AtomicStore, kL, Ordering::Release, Scope::WorkGroup, false, 0);
      co_await a.atomic(OpKind::AtomicCAS, kL, Ordering::Acquire, Scope::Device, true, 1, 0);
    };
    auto e = drive(4, 1, p, options_for(Scenario::SRSP));
    CHECK(e->stats().selective_flush_requests == 0);
    CHECK(e->stats().blocks_flushed == 2);
  }

  TEST_CASE("a remote release reaches every PA-TBL") {
    Program p = [](Agent& a) -> Task<void> {
      if (a.id() == 1) co_await a.atomic(OpKind::AtomicStore, kL, Ordering::Release, Scope::Device, true, 0);
    };
    auto e = drive(4, 4, p, options_for(Scenario::SRSP));
    CHECK(e->stats().selective_invalidate_requests == 4);
    CHECK(e->stats().remote_releases == 1);
    for (CuId cu = 0; cu < 4; ++cu) CHECK(e->l1(cu).patbl().contains(kL));
  }

  TEST_CASE("a naive remote release flushes and invalidates every other L1") {
    Program p = [](Agent& a) -> Task<void> {
      if (a.id() == 0) co_await a.load(kZ);
      if (a.id() == 1) {
        co_await a.delay(300);
        co_await a.atomic(OpKind::AtomicStore, kL, Ordering::Release, Scope::Device, true, 0);
      }
    };
    auto e = drive(2, 2, p, options_for(Scenario::RSP));
    CHECK(e->stats().full_invalidate_requests == 1);
    CHECK(e->stats().blocks_invalidated == 1);
    CHECK(e->l1(0).valid_block_count() == 0);
  }

  TEST_CASE("remote operations on one lock serialize") {
    Program p = [](Agent& a) -> Task<void> {
      auto old = co_await a.atomic(OpKind::AtomicAdd, kL, Ordering::AcqRel, Scope::Device, true, 1);
      a.record("old", old);
    };
    auto e = drive(4, 4, p, options_for(Scenario::SRSP));
    e->final_drain();
    CHECK(e->peek(kL) == 4);
    std::set<std::uint64_t> seen;
    for (AgentId i = 0; i < 4; ++i) seen.insert(e->agent(i).registers().at("old"));
    CHECK(seen == std::set<std::uint64_t>{0, 1, 2, 3});
  }

  TEST_CASE("stepped execution runs one operation per step") {
    EngineOptions o = options_for(Scenario::SRSP);
    o.stepped = true;
    Engine e(small_config(2), o);
    ScriptWorkload w(2, [](Agent& a) -> Task<void> {
      co_await a.store(Address{0x100 * (a.id() + 1)}, a.id() + 1);
      co_await a.atomic(OpKind::AtomicAdd, kL, Ordering::Relaxed, Scope::Device, false, 1);
    });
    w.initialize(e);
    for (CuId cu = 0; cu < 2; ++cu) e.add_agent(cu);
    for (AgentId id = 0; id < 2; ++id) e.spawn(id, w.program(e.agent(id)));
    CHECK(e.ready_agents() == std::vector<AgentId>{0, 1});
    CHECK(e.pending_request(1).op.kind() == OpKind::Store);
    e.step(1);
    CHECK(e.pending_request(1).op.kind() == OpKind::AtomicAdd);
    e.step(1);
    CHECK(e.ready_agents() == std::vector<AgentId>{0});
    CHECK_FALSE(e.all_done());
    e.step(0);
    e.step(0);
    CHECK(e.all_done());
    CHECK_THROWS_AS(e.run(), std::logic_error);
    e.final_drain();
    CHECK(e.peek(kL) == 2);
  }

  TEST_CASE("the event limit stops a livelock") {
    EngineOptions o = options_for(Scenario::SRSP);
    o.event_limit = 1000;
    Program p = [](Agent& a) -> Task<void> {
      while ((co_await a.atomic(OpKind::AtomicCAS, kL, Ordering::Acquire, Scope::WorkGroup, false, 1, 5)) != 5) {
      }
    };
    ScriptWorkload w(1, p);
    CHECK_THROWS_AS(run(w, small_config(1), o), Deadlock);
  }

  TEST_CASE("identical inputs give identical runs") {
    Graph g = make_grid_graph(8, 8, 50, 3);
    auto once = [&] {
      KernelWorkload w(g, {Kernel::SsspLite, 0.9, 0});
      EngineOptions o = options_for(Scenario::SRSP, true);
      return run(w, small_config(4), o);
    };
    auto a = once();
    auto b = once();
    CHECK(a.stats == b.stats);
    CHECK(a.trace == b.trace);
    CHECK(a.memory == b.memory);
    CHECK_FALSE(a.trace.empty());
  }

  TEST_CASE("remote acquire trace matches the golden file") {
    auto e = drive(4, 4, remote_acquire_script, options_for(Scenario::SRSP, true));
    std::string got;
    for (const auto& line : e->trace_lines()) got += line + '\n';
    const std::string path = std::string(SCOPESIM_SOURCE_DIR) + "/tests/golden/remote_acquire.trace";
    auto [header, body] = read_golden(path);
    if (std::getenv("SCOPESIM_UPDATE_GOLDEN") != nullptr) {
      std::ofstream(path) << header << got;
      body = got;
    }
    CHECK(got == body);
  }
}
