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

#include "scopesim/engine.hpp"

#include <algorithm>
#include <sstream>

namespace scopesim {

struct Engine::AgentState {
  std::unique_ptr<Agent> agent;
  CuId cu = 0;
  Task<void> program;
  std::coroutine_handle<> handle;
  Request pending;
  bool has_pending = false;
  bool in_flight = false;
  bool done = false;
  Tick remote_since = 0;
};

struct Engine::RemoteTxn {
  LockOwner id = kNoOwner;
  CuId cu = 0;
  MemoryOp op = MemoryOp::load(Address{0}, 8);
  Done done;
  bool acquire = false;
  bool release = false;
  bool own_release_hit = false;
  bool locked = false;
  Tick own_done = 0;
  std::uint64_t result = 0;
};

Engine::Engine(const Config& config, const EngineOptions& options)
    : config_(config), options_(options), l2_(config), rng_(config.seed) {
  auto errors = validate_config(config);
  if (!errors.empty()) throw ConfigError(errors.front());
  for (CuId c = 0; c < config.num_cus; ++c) {
    l1s_.push_back(std::make_unique<L1Cache>(config, c, options.pa_policy));
  }
  agent_of_cu_.assign(config.num_cus, -1);
  cu_in_remote_.assign(config.num_cus, false);
  l2_.set_atomic_logging(options.log_atomics);
}

Engine::~Engine() = default;

Agent& Engine::add_agent(CuId cu) {
  if (cu >= config_.num_cus) throw std::out_of_range("agent CU out of range");
  if (agent_of_cu_[cu] >= 0) throw std::logic_error("CU already hosts an agent");
  auto id = static_cast<AgentId>(agents_.size());
  auto st = std::make_unique<AgentState>();
  st->cu = cu;
  st->agent = std::make_unique<Agent>(id, Issuer{cu, cu, 0}, options_.scenario, this);
  agent_of_cu_[cu] = static_cast<int>(id);
  agents_.push_back(std::move(st));
  return *agents_.back()->agent;
}

Agent& Engine::agent(AgentId id) { return *agents_.at(id)->agent; }

void Engine::spawn(AgentId id, Task<void> program) {
  auto& a = *agents_.at(id);
  a.program = std::move(program);
  a.program.start();
  if (a.program.done()) {
    a.done = true;
    a.program.rethrow_if_failed();
  }
}

// ---------------------------------------------------------------------------
// Event loop

void Engine::schedule(Tick at, std::function<void()> action) {
  events_.push(Event{at, next_seq_++, std::move(action)});
}

void Engine::run_events() {
  while (!events_.empty()) {
    Event ev = events_.top();
    events_.pop();
    now_ = ev.tick;
    ev.action();
    after_event();
    if (options_.event_limit != 0 && ++events_run_ > options_.event_limit) {
      throw Deadlock("event limit exceeded\n" + state_dump());
    }
  }
}

void Engine::after_event() {
  if (!options_.check_invariants) {
    touched_.clear();
    return;
  }
  for (CuId cu : touched_) l1s_[cu]->check_invariants();
  touched_.clear();
  if (events_run_ % 1024 == 0) l2_.check_invariants();
}

void Engine::touch(CuId cu) {
  if (options_.check_invariants) touched_.push_back(cu);
}

void Engine::trace(CuId cu, std::string_view module, std::string_view op, const std::string& args) {
  if (!options_.trace) return;
  std::string line = std::to_string(now_) + ' ' + std::to_string(cu) + ' ' + std::string(module) + ' ' +
                     std::string(op);
  if (!args.empty()) line += ' ' + args;
  trace_.push_back(std::move(line));
}

Tick Engine::hop() {
  Tick j = options_.hop_jitter == 0 ? 0 : rng_() % (options_.hop_jitter + 1);
  return config_.l2_latency + j;
}

void Engine::run() {
  if (options_.stepped) throw std::logic_error("run() on a stepped engine");
  run_events();
  for (const auto& a : agents_) {
    if (!a->done) throw Deadlock("event queue empty with unfinished agents\n" + state_dump());
  }
  if (l2_.locked_count() != 0 || l2_.pending_broadcasts() != 0) {
    throw Deadlock("event queue empty with protocol state outstanding\n" + state_dump());
  }
  if (options_.check_invariants) l2_.check_invariants();
}

std::vector<AgentId> Engine::ready_agents() const {
  std::vector<AgentId> out;
  for (AgentId i = 0; i < agents_.size(); ++i) {
    if (agents_[i]->has_pending) out.push_back(i);
  }
  return out;
}

const Request& Engine::pending_request(AgentId id) const {
  const auto& a = *agents_.at(id);
  if (!a.has_pending) throw std::logic_error("agent has no pending request");
  return a.pending;
}

void Engine::step(AgentId id) {
  auto& a = *agents_.at(id);
  if (!a.has_pending) throw std::logic_error("step of an agent without a pending request");
  a.has_pending = false;
  issue(a);
  run_events();
  if (a.in_flight) throw Deadlock("operation did not complete in isolation\n" + state_dump());
}

bool Engine::all_done() const {
  return std::all_of(agents_.begin(), agents_.end(), [](const auto& a) { return a->done; });
}

// ---------------------------------------------------------------------------
// Agent front-end

void Engine::submit(AgentId agent, const Request& req, std::coroutine_handle<> h) {
  auto& a = *agents_.at(agent);
  a.handle = h;
  a.pending = req;
  if (options_.stepped) {
    a.has_pending = true;
    return;
  }
  Tick at = now_ + (req.spin ? config_.cas_retry_backoff : 0);
  schedule(at, [this, &a] { issue(a); });
}

void Engine::issue(AgentState& a) {
  if (cu_in_remote_[a.cu]) throw ProtocolError("stall rule violated on CU " + std::to_string(a.cu));
  a.in_flight = true;
  const Request& req = a.pending;
  if (req.kind == Request::Kind::Delay) {
    schedule(now_ + req.delay, [this, &a] { finish(a, 0); });
    return;
  }
  if (options_.trace) trace(a.cu, "cu", "issue", req.op.describe());
  dispatch(a, req.op);
}

void Engine::dispatch(AgentState& a, const MemoryOp& op) {
  CuId cu = a.cu;
  Done done = [this, &a](std::uint64_t v) { finish(a, v); };
  if (op.remote()) {
    cu_in_remote_[cu] = true;
    a.remote_since = now_;
    schedule(now_ + config_.l1_latency, [this, cu, op, done] { remote_op(cu, op, done); });
    return;
  }
  if (op.atomic() && !is_local_scope(op.scope())) {
    if (op.ordering() == Ordering::Relaxed) {
      schedule(now_ + config_.l1_latency, [this, cu, op, done] { l2_atomic(cu, op, done); });
    } else {
      schedule(now_ + config_.l1_latency, [this, cu, op, done] { global_sync(cu, op, done); });
    }
    return;
  }
  schedule(now_ + config_.l1_latency, [this, cu, op, done] { l1_access(cu, op, done); });
}

void Engine::finish(AgentState& a, std::uint64_t value) {
  if (cu_in_remote_[a.cu]) {
    stats_.cu_stall_cycles += now_ - a.remote_since;
    cu_in_remote_[a.cu] = false;
  }
  a.in_flight = false;
  last_completion_ = std::max(last_completion_, now_);
  if (options_.trace) trace(a.cu, "cu", "complete", std::to_string(value));
  a.agent->set_result(value);
  a.handle.resume();
  if (a.program.done()) {
    a.done = true;
    a.program.rethrow_if_failed();
  }
}

// ---------------------------------------------------------------------------
// L1 paths

void Engine::write_back(const std::vector<Writeback>& wbs, bool flush) {
  for (const auto& wb : wbs) {
    l2_.writeback(wb);
    if (flush) ++stats_.blocks_flushed;
  }
}

Tick Engine::flush_l1(CuId cu, bool invalidate) {
  auto wbs = l1s_[cu]->full_flush();
  write_back(wbs, true);
  Tick cycles = static_cast<Tick>(wbs.size()) * config_.l2_latency;
  if (invalidate) {
    stats_.blocks_invalidated += l1s_[cu]->full_invalidate();
    cycles += 1;
  }
  touch(cu);
  if (options_.trace) trace(cu, "l1", invalidate ? "flush_invalidate" : "flush", std::to_string(wbs.size()));
  return cycles;
}

void Engine::l1_access(CuId cu, const MemoryOp& op, Done done) {
  if (cu_in_remote_[cu]) throw ProtocolError("stall rule violated on CU " + std::to_string(cu));
  L1Cache& l1 = *l1s_[cu];
  touch(cu);
  if (op.kind() == OpKind::Store) {
    auto r = l1.store(op.addr(), op.size(), op.value());
    write_back(r.writebacks, false);
    if (options_.trace) trace(cu, "l1", "st", op.describe());
    done(0);
    return;
  }
  if (op.atomic() && has_acquire(op.ordering()) && l1.needs_promotion(op.addr())) {
    promoted_acquire(cu, op, done);
    return;
  }
  if (l1.present(op.addr(), op.size())) {
    l1_execute(cu, op, std::move(done));
    return;
  }
  BlockAddr blk = block_of(op.addr(), config_.block_size);
  Tick lat = config_.l2_latency + (l2_.resident(blk) ? 0 : config_.mem_latency);
  schedule(now_ + lat, [this, cu, op, done] { l1_fill(cu, op, done); });
}

void Engine::l1_fill(CuId cu, const MemoryOp& op, Done done) {
  BlockAddr blk = block_of(op.addr(), config_.block_size);
  auto f = l2_.fetch_block(blk, kNoOwner);
  if (f.blocked) {
    if (options_.trace) trace(cu, "l2", "fetch_blocked", std::to_string(blk.value));
    l2_.wait_for_unlock(blk, [this, cu, op, done] {
      schedule(now_ + 1, [this, cu, op, done] { l1_access(cu, op, done); });
    });
    return;
  }
  touch(cu);
  write_back(l1s_[cu]->fill(blk, f.data), false);
  if (options_.trace) trace(cu, "l1", "fill", std::to_string(blk.value));
  // The PA-TBL may have gained the address while the fill was in flight.
  if (op.atomic() && has_acquire(op.ordering()) && l1s_[cu]->needs_promotion(op.addr())) {
    promoted_acquire(cu, op, done);
    return;
  }
  l1_execute(cu, op, std::move(done));
}

void Engine::l1_execute(CuId cu, const MemoryOp& op, Done done) {
  L1Cache& l1 = *l1s_[cu];
  Fetcher fetch = [this](BlockAddr b) {
    auto f = l2_.fetch_block(b, kNoOwner);
    if (f.blocked) throw ProtocolError("L1 refetch hit a locked block");
    return f.data;
  };
  touch(cu);
  if (op.kind() == OpKind::Load) {
    auto r = l1.load(op.addr(), op.size(), fetch);
    write_back(r.writebacks, false);
    if (options_.trace) trace(cu, "l1", "ld", op.describe() + " = " + std::to_string(r.value));
    done(r.value);
    return;
  }
  L1Cache::AtomicResult r;
  if (has_acquire(op.ordering())) {
    auto a = l1.local_acquire_atomic(op, fetch);
    if (a.decision == L1Cache::AcquireDecision::Promoted) {
      promoted_acquire(cu, op, std::move(done));
      return;
    }
    r = std::move(a.atomic);
  } else if (has_release(op.ordering())) {
    r = l1.local_release_atomic(op, fetch);
  } else {
    r = l1.local_atomic(op, fetch);
  }
  write_back(r.writebacks, false);
  if (options_.trace) trace(cu, "l1", "atomic", op.describe() + " = " + std::to_string(r.value));
  done(r.value);
}

void Engine::promoted_acquire(CuId cu, const MemoryOp& op, Done done) {
  ++stats_.promoted_acquires;
  if (options_.trace) trace(cu, "l1", "promote", op.describe());
  Tick cycles = flush_l1(cu, true);
  MemoryOp wide = op.with_scope(Scope::Device, false);
  schedule(now_ + cycles, [this, cu, wide, done] { l2_atomic(cu, wide, done); });
}

void Engine::global_sync(CuId cu, const MemoryOp& op, Done done) {
  Tick cycles = flush_l1(cu, has_acquire(op.ordering()));
  schedule(now_ + cycles, [this, cu, op, done] { l2_atomic(cu, op, done); });
}

void Engine::l2_atomic(CuId cu, const MemoryOp& op, Done done) {
  auto r = l2_.execute_atomic(op, kNoOwner, now_);
  if (r.blocked) {
    BlockAddr blk = block_of(op.addr(), config_.block_size);
    if (options_.trace) trace(cu, "l2", "atomic_blocked", op.describe());
    l2_.wait_for_unlock(blk, [this, cu, op, done] {
      schedule(now_ + 1, [this, cu, op, done] { l2_atomic(cu, op, done); });
    });
    return;
  }
  if (options_.trace) trace(cu, "l2", "atomic", op.describe() + " = " + std::to_string(r.old_value));
  Tick lat = config_.l2_latency + (r.was_resident ? 0 : config_.mem_latency);
  std::uint64_t v = r.old_value;
  schedule(now_ + lat, [done, v] { done(v); });
}

// ---------------------------------------------------------------------------
// Remote operations

void Engine::remote_op(CuId cu, const MemoryOp& op, Done done) {
  auto txn = std::make_shared<RemoteTxn>();
  txn->id = next_txn_++;
  txn->cu = cu;
  txn->op = op;
  txn->done = std::move(done);
  txn->acquire = has_acquire(op.ordering());
  txn->release = has_release(op.ordering());
  if (txn->acquire) ++stats_.remote_acquires;
  if (txn->release) ++stats_.remote_releases;
  L1Cache& l1 = *l1s_[cu];
  // The own-L1 check must precede the flush, which retires the record.
  if (options_.scenario != Scenario::RSP && txn->acquire) {
    txn->own_release_hit = l1.lrtbl().lookup(op.addr(), l1.sfifo()).has_value();
  }
  if (options_.trace) trace(cu, "rsp", "begin", op.describe() + (txn->own_release_hit ? " own_hit" : ""));
  // Requester flush (and invalidate) overlaps the trip to L2 and the broadcast.
  txn->own_done = now_ + flush_l1(cu, txn->acquire);
  schedule(now_ + hop(), [this, txn] { remote_lock(txn); });
}

void Engine::remote_lock(const std::shared_ptr<RemoteTxn>& txn) {
  BlockAddr blk = block_of(txn->op.addr(), config_.block_size);
  if (l2_.lock_block(blk, txn->id) == L2Cache::LockResult::AlreadyLocked) {
    if (options_.trace) trace(txn->cu, "l2", "lock_wait", std::to_string(blk.value));
    l2_.wait_for_unlock(blk, [this, txn] {
      schedule(now_ + 1, [this, txn] { remote_lock(txn); });
    });
    return;
  }
  txn->locked = true;
  if (options_.trace) trace(txn->cu, "l2", "lock", std::to_string(blk.value));
  auto join = [this, txn] {
    schedule(std::max(now_, txn->own_done), [this, txn] { remote_atomic(txn); });
  };
  if (!txn->acquire || txn->own_release_hit) {
    join();
    return;
  }
  BroadcastKind kind =
      options_.scenario == Scenario::RSP ? BroadcastKind::FullFlush : BroadcastKind::SelectiveFlush;
  broadcast(kind, txn->op.addr(), txn->cu, join);
}

void Engine::remote_atomic(const std::shared_ptr<RemoteTxn>& txn) {
  auto r = l2_.execute_atomic(txn->op, txn->id, now_);
  if (r.blocked) throw ProtocolError("remote atomic blocked while holding the block lock");
  txn->result = r.old_value;
  if (options_.trace) trace(txn->cu, "l2", "atomic", txn->op.describe() + " = " + std::to_string(r.old_value));
  Tick lat = config_.l2_latency + (r.was_resident ? 0 : config_.mem_latency);
  schedule(now_ + lat, [this, txn] {
    if (!txn->release) {
      remote_finish(txn);
      return;
    }
    BroadcastKind kind = options_.scenario == Scenario::RSP ? BroadcastKind::FullInvalidate
                                                            : BroadcastKind::SelectiveInvalidate;
    if (!options_.hold_lock_for_invalidate) unlock(txn);
    broadcast(kind, txn->op.addr(), txn->cu, [this, txn] { remote_finish(txn); });
  });
}

void Engine::unlock(const std::shared_ptr<RemoteTxn>& txn) {
  BlockAddr blk = block_of(txn->op.addr(), config_.block_size);
  auto waiters = l2_.unlock_block(blk, txn->id);
  txn->locked = false;
  if (options_.trace) trace(txn->cu, "l2", "unlock", std::to_string(blk.value));
  for (auto& w : waiters) w();
}

void Engine::remote_finish(const std::shared_ptr<RemoteTxn>& txn) {
  if (txn->locked) unlock(txn);
  txn->done(txn->result);
}

void Engine::broadcast(BroadcastKind kind, Address addr, CuId origin, std::function<void()> on_complete) {
  auto targets = broadcast_targets(kind, origin, config_.num_cus);
  if (options_.trace) trace(origin, "l2", "broadcast", std::string(to_string(kind)) + ' ' + std::to_string(targets.size()));
  if (targets.empty()) {
    on_complete();
    return;
  }
  switch (kind) {
    case BroadcastKind::SelectiveFlush: stats_.selective_flush_requests += targets.size(); break;
    case BroadcastKind::SelectiveInvalidate: stats_.selective_invalidate_requests += targets.size(); break;
    case BroadcastKind::FullFlush: stats_.full_flush_requests += targets.size(); break;
    case BroadcastKind::FullInvalidate: stats_.full_invalidate_requests += targets.size(); break;
  }
  auto id = l2_.begin_broadcast(kind, addr, origin, static_cast<std::uint32_t>(targets.size()));
  auto shared = std::make_shared<std::function<void()>>(std::move(on_complete));
  for (CuId t : targets) {
    schedule(now_ + hop(), [this, t, kind, addr, id, shared] { respond(t, kind, addr, id, shared); });
  }
}

void Engine::respond(CuId target, BroadcastKind kind, Address addr, std::uint64_t id,
                     const std::shared_ptr<std::function<void()>>& on_complete) {
  L1Cache& l1 = *l1s_[target];
  touch(target);
  Tick work = 0;
  switch (kind) {
    case BroadcastKind::SelectiveFlush: {
      auto r = l1.handle_selective_flush(addr);
      write_back(r.writebacks, true);
      work = static_cast<Tick>(r.writebacks.size()) * config_.l2_latency;
      if (options_.trace) {
        trace(target, "l1", "selective_flush",
              std::string(r.hit ? "hit " : "miss ") + std::to_string(r.writebacks.size()));
      }
      break;
    }
    case BroadcastKind::SelectiveInvalidate:
      l1.handle_selective_invalidate(addr);
      work = 1;
      if (options_.trace) trace(target, "l1", "selective_invalidate", std::to_string(addr.value));
      break;
    case BroadcastKind::FullFlush:
      work = flush_l1(target, options_.rsp_acquire_invalidates);
      break;
    case BroadcastKind::FullInvalidate:
      work = flush_l1(target, true);
      break;
  }
  schedule(now_ + work + hop(), [this, id, on_complete] {
    if (l2_.ack(id)) (*on_complete)();
  });
}

// ---------------------------------------------------------------------------
// Results

void Engine::final_drain() {
  if (drained_) return;
  frozen_stats_ = stats();
  drained_ = true;
  for (auto& l1 : l1s_) {
    auto wbs = l1->full_flush();
    for (const auto& wb : wbs) l2_.writeback(wb);
    if (l1->sfifo().size() != 0) throw ProtocolError("L1 sFIFO not empty after drain");
    l1->check_invariants();
  }
  l2_.flush_to_memory();
  if (l2_.sfifo().size() != 0) throw ProtocolError("L2 sFIFO not empty after drain");
  if (l2_.locked_count() != 0) throw ProtocolError("locked blocks remain after drain");
  if (l2_.pending_broadcasts() != 0) throw ProtocolError("broadcasts pending after drain");
  l2_.check_invariants();
}

Stats Engine::stats() const {
  if (drained_) return frozen_stats_;
  Stats s = stats_;
  s.cycles = last_completion_;
  const auto& c = l2_.counters();
  s.l2_fetches = c.fetches;
  s.l2_writebacks = c.writebacks;
  s.l2_atomics = c.atomics;
  s.l2_accesses = c.total();
  for (const auto& a : agents_) {
    const auto& ac = a->agent->counters();
    s.steals_attempted += ac.steals_attempted;
    s.steals_succeeded += ac.steals_succeeded;
    s.tasks_executed += ac.tasks_executed;
  }
  return s;
}

std::string Engine::state_dump() const {
  std::ostringstream os;
  os << "tick " << now_ << " events_pending " << events_.size() << " locked_blocks "
     << l2_.locked_count() << " pending_broadcasts " << l2_.pending_broadcasts() << '\n';
  for (const auto& a : agents_) {
    os << "agent " << a->agent->id() << " cu " << a->cu << (a->done ? " done" : "")
       << (a->in_flight ? " in_flight" : "") << (cu_in_remote_[a->cu] ? " stalled" : "");
    if ((a->in_flight || a->has_pending) && a->pending.kind == Request::Kind::Memory) {
      os << " op " << a->pending.op.describe();
    }
    os << '\n';
  }
  for (const auto& l1 : l1s_) {
    if (l1->valid_block_count() == 0) continue;
    os << "l1 " << l1->cu() << " sfifo " << l1->sfifo().size() << " lrtbl " << l1->lrtbl().size()
       << " patbl " << l1->patbl().size() << '\n'
       << l1->dump();
  }
  return os.str();
}

RunResult run(Workload& workload, const Config& config, const EngineOptions& options) {
  Engine engine(config, options);
  workload.initialize(engine);
  std::uint32_t n = workload.agent_count(config);
  for (CuId cu = 0; cu < n; ++cu) engine.add_agent(cu);
  for (AgentId id = 0; id < n; ++id) engine.spawn(id, workload.program(engine.agent(id)));
  engine.run();
  engine.final_drain();
  RunResult r;
  r.stats = engine.stats();
  r.memory = engine.l2().memory_image();
  r.trace = engine.trace_lines();
  return r;
}

}  // namespace scopesim
