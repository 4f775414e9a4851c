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

#include "scopesim/verifier.hpp"

#include <algorithm>
#include <coroutine>
#include <memory>
#include <random>
#include <sstream>

namespace scopesim {

namespace {

/// One execution that an external scheduler advances step by step.
class Runner {
 public:
  virtual ~Runner() = default;
  virtual std::vector<AgentId> ready() const = 0;
  virtual bool spin(AgentId id) const = 0;
  virtual void step(AgentId id) = 0;
  virtual Outcome outcome() = 0;
};

class EngineRunner final : public Runner {
 public:
  EngineRunner(const LitmusProgram& p, Scenario scenario, const VerifierOptions& opts) : program_(p) {
    Config c = opts.config;
    c.num_cus = p.agents;
    EngineOptions o;
    o.scenario = lowering_scenario(p, scenario);
    o.check_invariants = opts.check_invariants;
    o.stepped = true;
    engine_ = std::make_unique<Engine>(c, o);
    for (const auto& [addr, value] : p.init) engine_->poke(addr, value);
    for (CuId cu = 0; cu < p.agents; ++cu) engine_->add_agent(cu);
    for (AgentId id = 0; id < p.agents; ++id) engine_->spawn(id, p.body(engine_->agent(id)));
  }

  std::vector<AgentId> ready() const override { return engine_->ready_agents(); }
  bool spin(AgentId id) const override { return engine_->pending_request(id).spin; }
  void step(AgentId id) override { engine_->step(id); }

  Outcome outcome() override {
    engine_->final_drain();
    Outcome o;
    for (AgentId id = 0; id < engine_->agent_count(); ++id) {
      for (const auto& [k, v] : engine_->agent(id).registers()) o[k] = v;
    }
    for (const auto& [name, addr] : program_.observed) o[name] = engine_->peek(addr);
    return o;
  }

 private:
  const LitmusProgram& program_;
  std::unique_ptr<Engine> engine_;
};

using Clock = std::vector<std::uint64_t>;

void join(Clock& into, const Clock& from) {
  for (std::size_t i = 0; i < into.size(); ++i) into[i] = std::max(into[i], from[i]);
}

/// Sequentially consistent executor that runs one segment per step and
/// tracks happens-before with vector clocks.
class ScRunner final : public Runner, public Port {
 public:
  explicit ScRunner(const LitmusProgram& p) : program_(p) {
    agents_.resize(p.agents);
    clocks_.assign(p.agents, Clock(p.agents, 0));
    for (AgentId id = 0; id < p.agents; ++id) clocks_[id][id] = 1;
    for (const auto& [addr, value] : p.init) write(addr, 8, value);
    for (AgentId id = 0; id < p.agents; ++id) {
      auto& a = agents_[id];
      a.agent = std::make_unique<Agent>(id, Issuer{id, id, 0}, Scenario::RSP, this);
      a.program = p.body(*a.agent);
      a.program.start();
      settle(id);
    }
  }

  std::vector<AgentId> ready() const override {
    std::vector<AgentId> out;
    for (AgentId id = 0; id < agents_.size(); ++id) {
      if (agents_[id].has_pending) out.push_back(id);
    }
    return out;
  }
  bool spin(AgentId id) const override { return agents_[id].pending.spin; }

  void step(AgentId id) override {
    execute(id);
    settle(id);
  }

  Outcome outcome() override {
    Outcome o;
    for (const auto& a : agents_) {
      for (const auto& [k, v] : a.agent->registers()) o[k] = v;
    }
    for (const auto& [name, addr] : program_.observed) o[name] = read(addr, 8);
    return o;
  }

  void submit(AgentId agent, const Request& req, std::coroutine_handle<> h) override {
    auto& a = agents_[agent];
    a.pending = req;
    a.handle = h;
    a.has_pending = true;
  }

 private:
  struct AgentSlot {
    std::unique_ptr<Agent> agent;
    Task<void> program;
    Request pending;
    std::coroutine_handle<> handle;
    bool has_pending = false;
  };
  struct Access {
    AgentId agent = 0;
    std::uint64_t epoch = 0;
    bool atomic = false;
  };
  struct Word {
    std::optional<Access> write;
    std::map<AgentId, Access> reads;
  };
  struct ReleaseRecord {
    Clock clock;
    AgentId agent = 0;
    bool wide = false;
  };

  // Runs the rest of a segment: plain accesses and delays that follow.
  void settle(AgentId id) {
    auto& a = agents_[id];
    while (a.has_pending && (a.pending.kind == Request::Kind::Delay || !a.pending.op.atomic())) execute(id);
    if (!a.has_pending) a.program.rethrow_if_failed();
  }

  void execute(AgentId id) {
    auto& a = agents_[id];
    a.has_pending = false;
    std::uint64_t result = 0;
    if (a.pending.kind == Request::Kind::Memory) result = perform(id, a.pending.op);
    a.agent->set_result(result);
    a.handle.resume();
  }

  std::uint64_t perform(AgentId id, const MemoryOp& op) {
    Clock& vc = clocks_[id];
    Word& w = words_[op.addr().value & ~std::uint64_t{7}];
    bool atomic = op.atomic();
    std::uint64_t epoch = vc[id];
    bool wide = op.remote() || op.scope() >= Scope::Device;

    auto races = [&](const Access& other) {
      return other.agent != id && !(atomic && other.atomic) && other.epoch > vc[other.agent];
    };
    if (w.write && races(*w.write)) throw RaceDetected(race_text(op, id, w.write->agent));

    std::uint64_t current = read(op.addr(), op.size());
    std::uint64_t result = current;
    bool wrote = false;
    bool rmw = false;
    if (op.kind() == OpKind::Load || op.kind() == OpKind::AtomicLoad) {
      // value already read
    } else if (op.kind() == OpKind::Store || op.kind() == OpKind::AtomicStore) {
      write(op.addr(), op.size(), op.value());
      wrote = true;
    } else {
      AtomicOutcome r = apply_atomic(op, current);
      result = r.old_value;
      if (r.wrote) write(op.addr(), op.size(), r.new_value);
      wrote = r.wrote;
      rmw = true;
    }

    auto& releases = releases_[op.addr().value & ~std::uint64_t{7}];
    if (atomic && op.kind() != OpKind::AtomicStore && has_acquire(op.ordering())) {
      for (const auto& r : releases) {
        if (r.agent == id || r.wide || wide) join(vc, r.clock);
      }
    }
    if (wrote) {
      for (const auto& [b, rd] : w.reads) {
        if (races(rd)) throw RaceDetected(race_text(op, id, b));
      }
      w.reads.clear();
      w.write = Access{id, epoch, atomic};
      if (!rmw) releases.clear();
      if (atomic && has_release(op.ordering())) releases.push_back(ReleaseRecord{vc, id, wide});
    } else {
      Access& r = w.reads[id];
      r = Access{id, epoch, atomic && (r.epoch == 0 || r.atomic)};
    }
    ++vc[id];
    return result;
  }

  std::string race_text(const MemoryOp& op, AgentId a, AgentId b) const {
    return program_.name + ": " + op.describe() + " by agent " + std::to_string(a) +
           " races with agent " + std::to_string(b);
  }

  std::uint64_t read(Address addr, std::uint32_t size) const {
    std::uint64_t v = 0;
    for (std::uint32_t i = 0; i < size; ++i) {
      auto it = bytes_.find(addr.value + i);
      if (it != bytes_.end()) v |= std::uint64_t{it->second} << (8 * i);
    }
    return v;
  }

  void write(Address addr, std::uint32_t size, std::uint64_t v) {
    for (std::uint32_t i = 0; i < size; ++i) bytes_[addr.value + i] = static_cast<std::uint8_t>(v >> (8 * i));
  }

  const LitmusProgram& program_;
  std::vector<AgentSlot> agents_;
  std::vector<Clock> clocks_;
  std::map<std::uint64_t, std::uint8_t> bytes_;
  std::map<std::uint64_t, Word> words_;
  std::map<std::uint64_t, std::vector<ReleaseRecord>> releases_;
};

using Factory = std::function<std::unique_ptr<Runner>()>;

/// Retry gating: a spinning agent waits for another agent's real step.
struct SpinGate {
  std::vector<bool> progress;

  explicit SpinGate(std::size_t n) : progress(n, true) {}

  std::vector<AgentId> enabled(const Runner& r) const {
    std::vector<AgentId> ready = r.ready(), out;
    for (AgentId id : ready) {
      if (!r.spin(id) || progress[id]) out.push_back(id);
    }
    return out.empty() ? ready : out;
  }

  void stepped(AgentId id, bool spin) {
    progress[id] = false;
    if (!spin) {
      for (std::size_t b = 0; b < progress.size(); ++b) {
        if (b != id) progress[b] = true;
      }
    }
  }
};

const Outcome kLivelock{{"livelock", 1}};

class Explorer {
 public:
  Explorer(Factory make, std::size_t agents, std::uint64_t max_schedules, std::uint32_t max_steps)
      : make_(std::move(make)), agents_(agents), max_schedules_(max_schedules), max_steps_(max_steps) {}

  OutcomeSet run() {
    std::vector<AgentId> path;
    dfs(make_(), path, SpinGate(agents_));
    return result_;
  }

 private:
  void dfs(std::unique_ptr<Runner> r, std::vector<AgentId>& path, SpinGate gate) {
    std::size_t base = path.size();
    for (;;) {
      if (path.size() >= max_steps_) {
        leaf(kLivelock);
        break;
      }
      auto en = gate.enabled(*r);
      if (en.empty()) {
        leaf(r->outcome());
        break;
      }
      if (en.size() == 1) {
        advance(*r, path, gate, en[0]);
        continue;
      }
      // Fresh replays for all but the last choice, which reuses `r`.
      for (std::size_t i = 0; i + 1 < en.size(); ++i) {
        auto child = replay(path);
        std::vector<AgentId> p = path;
        SpinGate g = gate;
        advance(*child, p, g, en[i]);
        dfs(std::move(child), p, g);
      }
      advance(*r, path, gate, en.back());
    }
    path.resize(base);
  }

  void advance(Runner& r, std::vector<AgentId>& path, SpinGate& gate, AgentId id) {
    bool spin = r.spin(id);
    r.step(id);
    gate.stepped(id, spin);
    path.push_back(id);
  }

  std::unique_ptr<Runner> replay(const std::vector<AgentId>& path) {
    auto r = make_();
    for (AgentId id : path) r->step(id);
    return r;
  }

  void leaf(const Outcome& o) {
    ++result_.counts[o];
    if (++result_.schedules > max_schedules_) {
      throw StateSpaceTooLarge("more than " + std::to_string(max_schedules_) + " schedules");
    }
  }

  Factory make_;
  std::size_t agents_;
  std::uint64_t max_schedules_;
  std::uint32_t max_steps_;
  OutcomeSet result_;
};

}  // namespace

std::set<Outcome> OutcomeSet::outcomes() const {
  std::set<Outcome> s;
  for (const auto& [o, n] : counts) s.insert(o);
  return s;
}

Scenario lowering_scenario(const LitmusProgram& program, Scenario scenario) {
  if (program.needs_stealing && scenario == Scenario::Baseline) return Scenario::StealOnly;
  return scenario;
}

OutcomeSet exhaustive(const LitmusProgram& program, Scenario scenario, const VerifierOptions& opts) {
  Explorer ex([&] { return std::make_unique<EngineRunner>(program, scenario, opts); }, program.agents,
              opts.max_schedules, opts.max_steps);
  return ex.run();
}

OutcomeSet sample(const LitmusProgram& program, Scenario scenario, std::uint64_t n, std::uint64_t seed,
                  const VerifierOptions& opts) {
  std::mt19937_64 rng(seed);
  OutcomeSet result;
  for (std::uint64_t s = 0; s < n; ++s) {
    EngineRunner r(program, scenario, opts);
    SpinGate gate(program.agents);
    std::uint32_t steps = 0;
    bool livelock = false;
    for (;;) {
      auto en = gate.enabled(r);
      if (en.empty()) break;
      if (steps++ >= opts.max_steps) {
        livelock = true;
        break;
      }
      AgentId id = en[std::uniform_int_distribution<std::size_t>(0, en.size() - 1)(rng)];
      bool spin = r.spin(id);
      r.step(id);
      gate.stepped(id, spin);
    }
    ++result.counts[livelock ? kLivelock : r.outcome()];
    ++result.schedules;
  }
  return result;
}

std::set<Outcome> sc_oracle(const LitmusProgram& program, const VerifierOptions& opts) {
  Explorer ex([&] { return std::make_unique<ScRunner>(program); }, program.agents, opts.max_schedules,
              opts.max_steps);
  return ex.run().outcomes();
}

Verdict verify(const LitmusProgram& program, Scenario scenario, VerifyMode mode, std::uint64_t schedules,
               std::uint64_t seed, const std::optional<std::set<Outcome>>& oracle, const VerifierOptions& opts) {
  Verdict v;
  v.program = program.name;
  v.scenario = scenario;
  try {
    v.set = mode == VerifyMode::Exhaustive ? exhaustive(program, scenario, opts)
                                           : sample(program, scenario, schedules, seed, opts);
  } catch (const StateSpaceTooLarge&) {
    throw;
  } catch (const std::exception& e) {
    v.detail = e.what();
    return v;
  }
  v.schedules = v.set.schedules;
  v.outcomes = v.set.counts.size();
  v.pass = true;
  for (const auto& [o, n] : v.set.counts) {
    if (!program.allowed(o)) {
      v.pass = false;
      v.detail = "forbidden outcome " + format_outcome(o);
      return v;
    }
    if (program.drf && oracle && !oracle->contains(o)) {
      v.pass = false;
      v.detail = "outcome outside the SC set: " + format_outcome(o);
      return v;
    }
  }
  if (mode == VerifyMode::Exhaustive && program.required) {
    bool seen = std::any_of(v.set.counts.begin(), v.set.counts.end(),
                            [&](const auto& e) { return program.required(e.first); });
    if (!seen) {
      v.pass = false;
      v.detail = "required outcome never observed";
    }
  }
  return v;
}

std::string format_verdict(const Verdict& v) {
  std::ostringstream os;
  os << v.program << ' ' << to_string(v.scenario) << ' ' << v.schedules << ' ' << v.outcomes << ' '
     << (v.pass ? "PASS" : "FAIL");
  return os.str();
}

}  // namespace scopesim
