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

#include "scopesim/workloads.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace scopesim {

std::string_view to_string(Kernel k) { return k == Kernel::SsspLite ? "sssp" : "prk"; }

std::optional<Kernel> parse_kernel(std::string_view name) {
  if (name == "sssp") return Kernel::SsspLite;
  if (name == "prk") return Kernel::PageRankLite;
  return std::nullopt;
}

std::size_t TaskSet::total() const {
  std::size_t n = 0;
  for (const auto& d : deques) n += d.size();
  return n;
}

TaskSet gen_tasks(const Graph& g, Kernel kernel, std::uint32_t num_wg, double imbalance) {
  if (num_wg == 0) throw std::invalid_argument("num_wg must be at least 1");
  if (!(imbalance >= 0.0 && imbalance <= 1.0)) throw std::invalid_argument("imbalance outside [0,1]");
  TaskSet ts;
  ts.kernel = kernel;
  ts.deques.resize(num_wg);
  auto skewed = static_cast<std::uint32_t>(std::floor(imbalance * g.n));
  for (std::uint32_t v = 0; v < g.n; ++v) {
    std::uint32_t wg = v < skewed ? 0 : (v - skewed) % num_wg;
    ts.deques[wg].push_back(v);
  }
  return ts;
}

std::vector<std::uint64_t> sssp_initial(const Graph& g, std::uint32_t source) {
  std::vector<std::uint64_t> d(g.n, kInfinity);
  if (g.n == 0) return d;
  if (source >= g.n) throw std::invalid_argument("source out of range");
  std::uint64_t wmax = 0;
  for (auto w : g.weights) wmax = std::max<std::uint64_t>(wmax, w);
  std::vector<std::uint64_t> level(g.n, UINT64_MAX);
  std::deque<std::uint32_t> q{source};
  level[source] = 0;
  while (!q.empty()) {
    auto u = q.front();
    q.pop_front();
    for (auto e = g.offsets[u]; e < g.offsets[u + 1]; ++e) {
      auto v = g.targets[e];
      if (level[v] == UINT64_MAX) {
        level[v] = level[u] + 1;
        q.push_back(v);
      }
    }
  }
  for (std::uint32_t v = 0; v < g.n; ++v) {
    if (level[v] != UINT64_MAX) d[v] = level[v] * wmax;
  }
  return d;
}

std::vector<std::uint64_t> sssp_reference(const Graph& g, const std::vector<std::uint64_t>& d0) {
  auto d1 = d0;
  for (std::uint32_t u = 0; u < g.n; ++u) {
    if (d0[u] >= kInfinity) continue;
    for (auto e = g.offsets[u]; e < g.offsets[u + 1]; ++e) {
      d1[g.targets[e]] = std::min(d1[g.targets[e]], d0[u] + g.weights[e]);
    }
  }
  return d1;
}

std::uint64_t pagerank_contribution(std::uint64_t rank, std::uint32_t degree) {
  return degree == 0 ? 0 : rank * kDampingPercent / (100 * std::uint64_t{degree});
}

std::vector<std::uint64_t> pagerank_reference(const Graph& g) {
  std::vector<std::uint64_t> next(g.n, (100 - kDampingPercent) * kRankScale / 100);
  for (std::uint32_t u = 0; u < g.n; ++u) {
    auto c = pagerank_contribution(kRankScale, g.degree(u));
    for (auto e = g.offsets[u]; e < g.offsets[u + 1]; ++e) next[g.targets[e]] += c;
  }
  return next;
}

std::uint64_t read_word(const std::map<std::uint64_t, BlockBytes>& memory, Address addr,
                        std::uint32_t block_size) {
  auto blk = block_of(addr, block_size);
  auto it = memory.find(blk.value);
  if (it == memory.end()) return 0;
  return read_bytes(it->second, static_cast<std::uint32_t>(addr.value % block_size), 8);
}

// ---------------------------------------------------------------------------

KernelWorkload::KernelWorkload(Graph graph, Params params) : graph_(std::move(graph)), params_(params) {
  graph_.validate();
  if (graph_.n > 0 && params_.source >= graph_.n) throw std::invalid_argument("source out of range");
}

void KernelWorkload::initialize(Engine& engine) {
  const Config& c = engine.config();
  block_size_ = c.block_size;
  num_wg_ = c.num_cus;
  log_.clear();
  per_wg_.assign(num_wg_, 0);

  MemoryLayout mem(block_size_);
  const std::uint32_t n = graph_.n;
  offsets_ = mem.alloc(8ull * (n + 1));
  targets_ = mem.alloc(8ull * graph_.m());
  weights_ = mem.alloc(8ull * graph_.m());
  in_ = mem.alloc(8ull * n);
  out_ = mem.alloc(8ull * n);
  contrib_ = mem.alloc(8ull * n);
  done_ = mem.alloc(8ull * n);

  Poke poke = [&engine](Address a, std::uint64_t v) { engine.poke(a, v); };
  for (std::uint32_t i = 0; i <= n; ++i) poke(word(offsets_, i), graph_.offsets[i]);
  for (std::size_t e = 0; e < graph_.m(); ++e) {
    poke(word(targets_, e), graph_.targets[e]);
    poke(word(weights_, e), graph_.weights[e]);
  }
  if (params_.kernel == Kernel::SsspLite) {
    d0_ = sssp_initial(graph_, params_.source);
    for (std::uint32_t v = 0; v < n; ++v) {
      poke(word(in_, v), d0_[v]);
      poke(word(out_, v), d0_[v]);
    }
  } else {
    for (std::uint32_t v = 0; v < n; ++v) {
      poke(word(in_, v), kRankScale);
      poke(word(out_, v), (100 - kDampingPercent) * kRankScale / 100);
    }
  }

  auto tasks = gen_tasks(graph_, params_.kernel, num_wg_, params_.imbalance);
  deques_.clear();
  for (std::uint32_t w = 0; w < num_wg_; ++w) {
    // Stolen batches are appended at the tail and the array is never
    // rewound, so leave room for them.
    auto cap = static_cast<std::uint32_t>(tasks.deques[w].size()) + 2 * n + 1;
    auto d = allocate_deque(mem, cap, w);
    init_deque(d, tasks.deques[w], poke);
    deques_.push_back(d);
  }
}

Task<void> KernelWorkload::sssp_task(Agent& agent, std::uint32_t u) {
  std::uint64_t du = co_await agent.load(word(in_, u));
  if (du >= kInfinity) co_return;
  std::uint64_t begin = co_await agent.load(word(offsets_, u));
  std::uint64_t end = co_await agent.load(word(offsets_, u + 1));
  for (std::uint64_t e = begin; e < end; ++e) {
    std::uint64_t v = co_await agent.load(word(targets_, e));
    std::uint64_t w = co_await agent.load(word(weights_, e));
    std::uint64_t cand = du + w;
    std::uint64_t cur = co_await agent.atomic(OpKind::AtomicLoad, word(out_, v), Ordering::Relaxed,
                                              Scope::Device, false);
    bool retry = false;
    while (cand < cur) {
      std::uint64_t old = co_await agent.atomic(OpKind::AtomicCAS, word(out_, v), Ordering::Relaxed,
                                                Scope::Device, false, cand, cur, retry);
      if (old == cur) break;
      cur = old;
      retry = true;
    }
  }
}

Task<void> KernelWorkload::prk_task(Agent& agent, std::uint32_t u) {
  std::uint64_t rank = co_await agent.load(word(in_, u));
  std::uint64_t begin = co_await agent.load(word(offsets_, u));
  std::uint64_t end = co_await agent.load(word(offsets_, u + 1));
  if (end == begin) co_return;
  std::uint64_t c = pagerank_contribution(rank, static_cast<std::uint32_t>(end - begin));
  co_await agent.store(word(contrib_, u), c);
  for (std::uint64_t e = begin; e < end; ++e) {
    std::uint64_t v = co_await agent.load(word(targets_, e));
    co_await agent.atomic(OpKind::AtomicAdd, word(out_, v), Ordering::Relaxed, Scope::Device, false, c);
  }
}

Task<void> KernelWorkload::execute(Agent& agent, std::uint32_t vertex) {
  std::uint32_t wg = agent.issuer().work_group;
  log_.push_back(TaskRecord{wg, per_wg_[wg]++, vertex});
  ++agent.counters().tasks_executed;
  if (params_.kernel == Kernel::SsspLite) {
    co_await sssp_task(agent, vertex);
  } else {
    co_await prk_task(agent, vertex);
  }
  co_await agent.store(word(done_, vertex), wg + 1);
}

Task<void> KernelWorkload::drain_own(Agent& agent) {
  const DequeLayout& own = deques_.at(agent.issuer().work_group);
  for (;;) {
    auto r = co_await deque_pop_tail(agent, own);
    if (r.status != DequeStatus::Task) break;
    co_await execute(agent, r.task);
  }
}

Task<bool> KernelWorkload::steal_once(Agent& agent) {
  std::uint32_t wg = agent.issuer().work_group;
  for (std::uint32_t i = 1; i < num_wg_; ++i) {
    const DequeLayout& victim = deques_[(wg + i) % num_wg_];
    ++agent.counters().steals_attempted;
    auto r = co_await deque_steal_head(agent, victim, std::nullopt, params_.max_steal_batch, 2 * num_wg_);
    if (r.status != DequeStatus::Task) continue;
    ++agent.counters().steals_succeeded;
    // The first task runs now; the rest become stealable work in the own deque.
    std::uint32_t first = r.batch.front();
    std::vector<std::uint32_t> rest(r.batch.begin() + 1, r.batch.end());
    if (!rest.empty()) {
      auto p = co_await deque_push_tail(agent, deques_[wg], rest);
      if (p.status != DequeStatus::Task) {
        for (auto v : rest) co_await execute(agent, v);
      }
    }
    co_await execute(agent, first);
    co_return true;
  }
  co_return false;
}

Task<void> KernelWorkload::program(Agent& agent) {
  co_await drain_own(agent);
  if (!stealing_enabled(agent.scenario()) || num_wg_ < 2) co_return;
  // Stop after a full pass over the victims finds nothing.
  while (co_await steal_once(agent)) co_await drain_own(agent);
}

std::vector<std::uint64_t> KernelWorkload::results(const std::map<std::uint64_t, BlockBytes>& memory) const {
  std::vector<std::uint64_t> out(graph_.n);
  for (std::uint32_t v = 0; v < graph_.n; ++v) out[v] = read_word(memory, word(out_, v), block_size_);
  return out;
}

std::vector<std::uint64_t> KernelWorkload::reference() const {
  if (params_.kernel == Kernel::SsspLite) return sssp_reference(graph_, sssp_initial(graph_, params_.source));
  return pagerank_reference(graph_);
}

std::string KernelWorkload::format_task_log() const {
  std::ostringstream os;
  for (const auto& r : log_) os << r.wg << ' ' << r.seq << ' ' << r.vertex << '\n';
  return os.str();
}

bool KernelWorkload::tasks_conserved() const {
  std::vector<std::uint32_t> seen(graph_.n, 0);
  for (const auto& r : log_) {
    if (r.vertex >= graph_.n) return false;
    ++seen[r.vertex];
  }
  return std::all_of(seen.begin(), seen.end(), [](std::uint32_t c) { return c == 1; });
}

// ---------------------------------------------------------------------------

void MutexWorkload::initialize(Engine& engine) {
  const Config& c = engine.config();
  block_size_ = c.block_size;
  num_cus_ = c.num_cus;
  stealing_ = stealing_enabled(engine.scenario());
  MemoryLayout mem(block_size_);
  lock_ = mem.alloc(8);
  counter_ = mem.alloc(8);
  private_.clear();
  for (std::uint32_t cu = 0; cu < num_cus_; ++cu) {
    private_.push_back(mem.alloc(std::uint64_t{block_size_} * params_.private_blocks));
  }
  engine.poke(lock_, 0);
  engine.poke(counter_, 0);
  owner_done_ = 0;
  thieves_active_ = stealing_ ? num_cus_ - 1 : 0;
}

Task<void> MutexWorkload::private_work(Agent& agent, Address region, std::uint32_t round) {
  for (std::uint32_t b = 0; b < params_.private_blocks; ++b) {
    Address a{region.value + std::uint64_t{b} * block_size_};
    std::uint64_t v = co_await agent.load(a);
    co_await agent.store(a, v + round);
  }
}

Task<void> MutexWorkload::owner(Agent& agent) {
  // The owner keeps using the lock while any thief is still active, so
  // every remote operation meets a busy local sharer.
  for (std::uint32_t i = 0; i < params_.owner_sections || thieves_active_ > 0; ++i) {
    bool retry = false;
    while (co_await agent.sync(SyncRole::OwnerPop, OpKind::AtomicCAS, lock_, Ordering::AcqRel, 1, 0, retry) != 0) {
      retry = true;
    }
    std::uint64_t c = co_await agent.load(counter_);
    co_await agent.store(counter_, c + 1);
    co_await agent.sync(SyncRole::OwnerPush, OpKind::AtomicStore, lock_, Ordering::Release, 0);
    ++owner_done_;
    co_await private_work(agent, private_[0], i + 1);
    co_await agent.delay(params_.owner_think);
  }
}

Task<void> MutexWorkload::thief(Agent& agent) {
  Address region = private_[agent.issuer().cu];
  std::uint32_t round = 0;
  // Spread the first attempts over one think period so thieves do not
  // arrive in lockstep.
  std::uint32_t offset = params_.thief_rounds * (agent.issuer().cu - 1) / (num_cus_ - 1);
  for (std::uint32_t r = 0; r < offset; ++r) {
    co_await private_work(agent, region, ++round);
    co_await agent.delay(params_.round_gap);
  }
  for (std::uint32_t i = 0; i < params_.thief_sections; ++i) {
    // A failed attempt goes back to private work instead of spinning.
    for (;;) {
      for (std::uint32_t r = 0; r < params_.thief_rounds; ++r) {
        co_await private_work(agent, region, ++round);
        co_await agent.delay(params_.round_gap);
      }
      ++agent.counters().steals_attempted;
      if (co_await agent.sync(SyncRole::ThiefSteal, OpKind::AtomicCAS, lock_, Ordering::Acquire, 1, 0) == 0) {
        break;
      }
    }
    ++agent.counters().steals_succeeded;
    std::uint64_t c = co_await agent.load(counter_);
    co_await agent.store(counter_, c + 1);
    co_await agent.sync(SyncRole::ThiefSteal, OpKind::AtomicStore, lock_, Ordering::Release, 0);
  }
  --thieves_active_;
  // Finished thieves keep their caches warm until every thief is done.
  while (thieves_active_ > 0) {
    co_await private_work(agent, region, ++round);
    co_await agent.delay(params_.round_gap);
  }
}

Task<void> MutexWorkload::program(Agent& agent) {
  if (agent.issuer().cu == 0) {
    co_await owner(agent);
  } else if (stealing_) {
    co_await thief(agent);
  }
}

std::uint64_t MutexWorkload::counter(const std::map<std::uint64_t, BlockBytes>& memory) const {
  return read_word(memory, counter_, block_size_);
}

std::uint64_t MutexWorkload::expected_counter() const {
  std::uint64_t n = owner_done_;
  if (stealing_) n += std::uint64_t{params_.thief_sections} * (num_cus_ - 1);
  return n;
}

}  // namespace scopesim
