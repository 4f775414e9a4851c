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
 * @file agent.hpp
 * @brief Issuing front-end of one work-group. Agent programs are coroutines
 *        that `co_await` memory operations; an executor (the timed engine,
 *        the stepped engine or the SC reference memory) services them.
 */

#pragma once

#include <coroutine>
#include <cstdint>
#include <map>
#include <string>

#include "scopesim/lowering.hpp"
#include "scopesim/types.hpp"

namespace scopesim {

using AgentId = std::uint32_t;

struct Request {
  enum class Kind : std::uint8_t { Memory, Delay };
  Kind kind = Kind::Memory;
  MemoryOp op = MemoryOp::load(Address{0}, 8);
  Tick delay = 0;
  /// Retry of a failed CAS; lets schedule enumeration skip futile spins.
  bool spin = false;
};

class Port {
 public:
  virtual ~Port() = default;
  virtual void submit(AgentId agent, const Request& req, std::coroutine_handle<> h) = 0;
};

struct AgentCounters {
  std::uint64_t steals_attempted = 0;
  std::uint64_t steals_succeeded = 0;
  std::uint64_t tasks_executed = 0;
};

class Agent {
 public:
  struct Awaiter {
    Agent* agent;
    Request req;
    bool await_ready() const noexcept { return false; }
    void await_suspend(std::coroutine_handle<> h) { agent->port_->submit(agent->id_, req, h); }
    std::uint64_t await_resume() const noexcept { return agent->result_; }
  };

  Agent(AgentId id, Issuer issuer, Scenario scenario, Port* port)
      : id_(id), issuer_(issuer), scenario_(scenario), port_(port) {}

  AgentId id() const { return id_; }
  const Issuer& issuer() const { return issuer_; }
  Scenario scenario() const { return scenario_; }

  Awaiter load(Address addr, std::uint32_t size = 8) {
    return issue(MemoryOp::load(addr, size, issuer_));
  }
  Awaiter store(Address addr, std::uint64_t value, std::uint32_t size = 8) {
    return issue(MemoryOp::store(addr, value, size, issuer_));
  }
  /// Fully specified atomic; no lowering applied.
  Awaiter atomic(OpKind kind, Address addr, Ordering ord, Scope scope, bool remote,
                 std::uint64_t value = 0, std::uint64_t expected = 0, bool spin = false) {
    return issue(MemoryOp::atomic(kind, addr, ord, scope, remote, value, expected, 8, issuer_), spin);
  }
  /// Synchronization intent lowered per scenario. Throws StealingDisabled.
  Awaiter sync(SyncRole role, OpKind kind, Address addr, Ordering ord, std::uint64_t value = 0,
               std::uint64_t expected = 0, bool spin = false) {
    auto tmpl = MemoryOp::atomic(kind, addr, ord, Scope::WorkGroup, false, value, expected, 8, issuer_);
    return issue(lower_sync(scenario_, SyncIntent{role, tmpl}), spin);
  }
  /// Litmus templates carry their own scope and remoteness.
  Awaiter litmus(OpKind kind, Address addr, Ordering ord, Scope scope, bool remote,
                 std::uint64_t value = 0, std::uint64_t expected = 0, bool spin = false) {
    auto tmpl = MemoryOp::atomic(kind, addr, ord, scope, remote, value, expected, 8, issuer_);
    return issue(lower_sync(scenario_, SyncIntent{SyncRole::LitmusOp, tmpl}), spin);
  }
  Awaiter delay(Tick cycles) {
    Request r;
    r.kind = Request::Kind::Delay;
    r.delay = cycles;
    return Awaiter{this, r};
  }

  /// Observed value for litmus outcomes.
  void record(const std::string& name, std::uint64_t value) { registers_[name] = value; }
  const std::map<std::string, std::uint64_t>& registers() const { return registers_; }

  AgentCounters& counters() { return counters_; }
  const AgentCounters& counters() const { return counters_; }

  /// Set by the executor before resuming the awaiting coroutine.
  void set_result(std::uint64_t v) { result_ = v; }

 private:
  Awaiter issue(MemoryOp op, bool spin = false) {
    Request r;
    r.op = std::move(op);
    r.spin = spin;
    return Awaiter{this, r};
  }

  AgentId id_;
  Issuer issuer_;
  Scenario scenario_;
  Port* port_;
  std::uint64_t result_ = 0;
  std::map<std::string, std::uint64_t> registers_;
  AgentCounters counters_;
};

}  // namespace scopesim
