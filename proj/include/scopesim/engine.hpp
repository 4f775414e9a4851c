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
 * @file engine.hpp
 * @brief Deterministic discrete-event core.
 *
 * Events run in (tick, insertion sequence) order. Each CU hosts one agent
 * (work-group front-end) with at most one memory operation in flight; a CU
 * that issued a remote operation is stalled until it completes.
 *
 * Two drivers share the same protocol code:
 *  - timed: every agent issues as soon as its previous operation completes;
 *  - stepped: an external scheduler picks which agent issues next and the
 *    event queue is run dry after each operation, making every operation
 *    (including a whole remote acquire) one atomic step.
 *
 * Latency model: L1 access l1_latency; each L2 access l2_latency (plus
 * mem_latency on an L2 miss); a flush of k dirty blocks costs k * l2_latency;
 * a flash invalidate costs one cycle; broadcasts pay one L2 hop each way
 * (l2_latency plus seeded jitter) around the responder's work.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "scopesim/agent.hpp"
#include "scopesim/config.hpp"
#include "scopesim/coro.hpp"
#include "scopesim/l1_cache.hpp"
#include "scopesim/l2_cache.hpp"
#include "scopesim/lowering.hpp"

namespace scopesim {

struct EngineOptions {
  Scenario scenario = Scenario::SRSP;
  /// Dirty-coverage, LR-TBL liveness, sFIFO conservation, broadcast-ack and
  /// stall-rule checks after every event.
  bool check_invariants = false;
  bool trace = false;
  bool log_atomics = false;
  PaRecordPolicy pa_policy = PaRecordPolicy::AllResponders;
  /// Upper bound of the extra cycles added to each broadcast hop.
  std::uint32_t hop_jitter = 3;
  /// Naive remote acquire also invalidates every other L1. Without it a
  /// stale clean copy of a lock can satisfy a later local acquire.
  bool rsp_acquire_invalidates = true;
  /// Keep the L2 block lock of a remote release until every invalidate ack
  /// is back, instead of dropping it right after the atomic.
  bool hold_lock_for_invalidate = false;
  /// Operations wait for step() instead of issuing on their own.
  bool stepped = false;
  /// Guard against livelock in broken protocols; 0 disables.
  std::uint64_t event_limit = 500'000'000;
};

class Deadlock : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Engine;

/// Produces per-CU agent programs and their initial memory.
class Workload {
 public:
  virtual ~Workload() = default;
  virtual std::string name() const = 0;
  /// Number of agents; agent i runs on CU i.
  virtual std::uint32_t agent_count(const Config& config) const { return config.num_cus; }
  /// Called once before programs are created.
  virtual void initialize(Engine& engine) = 0;
  virtual Task<void> program(Agent& agent) = 0;
};

class Engine final : public Port {
 public:
  Engine(const Config& config, const EngineOptions& options);
  ~Engine() override;
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  const Config& config() const { return config_; }
  const EngineOptions& options() const { return options_; }
  Scenario scenario() const { return options_.scenario; }

  L1Cache& l1(CuId cu) { return *l1s_.at(cu); }
  const L1Cache& l1(CuId cu) const { return *l1s_.at(cu); }
  L2Cache& l2() { return l2_; }
  const L2Cache& l2() const { return l2_; }

  // Memory initialization and inspection.
  void poke(Address addr, std::uint64_t value, std::uint32_t size = 8) { l2_.poke(addr, size, value); }
  /// Reads through L2/memory; coherent after final_drain().
  std::uint64_t peek(Address addr, std::uint32_t size = 8) const { return l2_.peek(addr, size); }

  /// Creates the agent for `cu` (one per CU).
  Agent& add_agent(CuId cu);
  Agent& agent(AgentId id);
  std::size_t agent_count() const { return agents_.size(); }
  void spawn(AgentId id, Task<void> program);

  /// Timed driver: runs to quiescence. Throws Deadlock.
  void run();

  // Stepped driver.
  /// Agents with an operation waiting to be issued.
  std::vector<AgentId> ready_agents() const;
  const Request& pending_request(AgentId id) const;
  /// Issues the agent's pending operation and runs events until idle.
  void step(AgentId id);
  bool all_done() const;

  /// Flushes every L1 and the L2 to memory and checks quiescence. Statistics
  /// are frozen before the drain.
  void final_drain();

  Stats stats() const;
  Tick now() const { return now_; }
  const std::vector<std::string>& trace_lines() const { return trace_; }
  std::string state_dump() const;

  void submit(AgentId agent, const Request& req, std::coroutine_handle<> h) override;

 private:
  struct AgentState;
  struct RemoteTxn;
  using Done = std::function<void(std::uint64_t)>;

  struct Event {
    Tick tick;
    std::uint64_t seq;
    std::function<void()> action;
  };
  struct EventOrder {
    bool operator()(const Event& a, const Event& b) const {
      return a.tick != b.tick ? a.tick > b.tick : a.seq > b.seq;
    }
  };

  void schedule(Tick at, std::function<void()> action);
  void run_events();
  void after_event();
  void trace(CuId cu, std::string_view module, std::string_view op, const std::string& args = {});
  Tick hop();

  void issue(AgentState& a);
  void finish(AgentState& a, std::uint64_t value);
  void start_op(AgentState& a, const MemoryOp& op);

  // Operation flows. `done` is invoked at the completion tick.
  void dispatch(AgentState& a, const MemoryOp& op);
  void l1_access(CuId cu, const MemoryOp& op, Done done);
  void l1_fill(CuId cu, const MemoryOp& op, Done done);
  void l1_execute(CuId cu, const MemoryOp& op, Done done);
  void promoted_acquire(CuId cu, const MemoryOp& op, Done done);
  void global_sync(CuId cu, const MemoryOp& op, Done done);
  void l2_atomic(CuId cu, const MemoryOp& op, Done done);
  void remote_op(CuId cu, const MemoryOp& op, Done done);
  void remote_lock(const std::shared_ptr<RemoteTxn>& txn);
  void remote_atomic(const std::shared_ptr<RemoteTxn>& txn);
  void remote_finish(const std::shared_ptr<RemoteTxn>& txn);
  void unlock(const std::shared_ptr<RemoteTxn>& txn);
  /// Sends `kind` to its targets; `on_complete` fires once after all acks.
  void broadcast(BroadcastKind kind, Address addr, CuId origin, std::function<void()> on_complete);
  void respond(CuId target, BroadcastKind kind, Address addr, std::uint64_t id,
               const std::shared_ptr<std::function<void()>>& on_complete);

  /// Own flush (+ invalidate); returns cycles spent.
  Tick flush_l1(CuId cu, bool invalidate);
  void write_back(const std::vector<Writeback>& wbs, bool flush);
  void touch(CuId cu);

  Config config_;
  EngineOptions options_;
  std::vector<std::unique_ptr<L1Cache>> l1s_;
  L2Cache l2_;
  std::vector<std::unique_ptr<AgentState>> agents_;
  std::vector<int> agent_of_cu_;
  std::vector<bool> cu_in_remote_;

  std::priority_queue<Event, std::vector<Event>, EventOrder> events_;
  std::uint64_t next_seq_ = 0;
  Tick now_ = 0;
  std::uint64_t next_txn_ = 1;
  std::mt19937_64 rng_;

  Stats stats_;
  Tick last_completion_ = 0;
  bool drained_ = false;
  Stats frozen_stats_;

  std::vector<CuId> touched_;
  std::uint64_t events_run_ = 0;
  std::vector<std::string> trace_;
};

/// Result of a complete simulation.
struct RunResult {
  Stats stats;
  std::map<std::uint64_t, BlockBytes> memory;
  std::vector<std::string> trace;
};

/// Builds an engine, runs the workload to quiescence and drains the caches.
RunResult run(Workload& workload, const Config& config, const EngineOptions& options);

}  // namespace scopesim
