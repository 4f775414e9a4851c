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
 * @file workloads.hpp
 * @brief Work-stealing graph kernels and the asymmetric mutex microbenchmark.
 *
 * SsspLite performs one Bellman-Ford relaxation round over every vertex,
 * starting from hop-count upper bounds, with device-scope atomic-min updates.
 * PageRankLite performs one integer PageRank iteration with device-scope
 * atomic adds. Both produce results independent of execution order, so the
 * final memory can be compared exactly against a sequential reference.
 */

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scopesim/deque.hpp"
#include "scopesim/engine.hpp"
#include "scopesim/graph.hpp"

namespace scopesim {

enum class Kernel : std::uint8_t { SsspLite, PageRankLite };

/// "sssp" and "prk".
std::string_view to_string(Kernel k);
std::optional<Kernel> parse_kernel(std::string_view name);

constexpr std::uint64_t kInfinity = std::uint64_t{1} << 62;
constexpr std::uint64_t kRankScale = 1'000'000;
constexpr std::uint64_t kDampingPercent = 85;

/// Initial deque contents, one task (vertex id) per vertex. The first
/// floor(imbalance * n) vertices go to deque 0; the rest are dealt
/// round-robin over all deques.
struct TaskSet {
  Kernel kernel = Kernel::SsspLite;
  std::vector<std::vector<std::uint32_t>> deques;
  std::size_t total() const;
};
TaskSet gen_tasks(const Graph& g, Kernel kernel, std::uint32_t num_wg, double imbalance);

/// Hop count from `source` times the maximum weight; kInfinity when unreachable.
std::vector<std::uint64_t> sssp_initial(const Graph& g, std::uint32_t source);
/// One relaxation round over all vertices, sequentially.
std::vector<std::uint64_t> sssp_reference(const Graph& g, const std::vector<std::uint64_t>& d0);
std::vector<std::uint64_t> pagerank_reference(const Graph& g);
std::uint64_t pagerank_contribution(std::uint64_t rank, std::uint32_t degree);

/// One executed task, for conservation checks.
struct TaskRecord {
  std::uint32_t wg = 0;
  std::uint32_t seq = 0;  // position in the work-group's own log
  std::uint32_t vertex = 0;
};

/// Reads an 8-byte word from a final memory image.
std::uint64_t read_word(const std::map<std::uint64_t, BlockBytes>& memory, Address addr,
                        std::uint32_t block_size);

class KernelWorkload final : public Workload {
 public:
  struct Params {
    Kernel kernel = Kernel::SsspLite;
    double imbalance = 0.0;
    std::uint32_t source = 0;
    /// Upper bound on tasks claimed per steal; each steal takes at most
    /// 1/(2 * work-groups) of the victim's visible tasks.
    std::uint32_t max_steal_batch = 16;
  };

  KernelWorkload(Graph graph, Params params);

  std::string name() const override { return std::string(to_string(params_.kernel)); }
  void initialize(Engine& engine) override;
  Task<void> program(Agent& agent) override;

  /// Per-vertex results (d1 or next) read from a final memory image.
  std::vector<std::uint64_t> results(const std::map<std::uint64_t, BlockBytes>& memory) const;
  std::vector<std::uint64_t> reference() const;

  std::size_t initial_task_count() const { return graph_.n; }
  const std::vector<TaskRecord>& task_log() const { return log_; }
  /// "wg task vertex" lines.
  std::string format_task_log() const;
  /// True when every vertex ran exactly once.
  bool tasks_conserved() const;

 private:
  Task<void> execute(Agent& agent, std::uint32_t vertex);
  Task<void> sssp_task(Agent& agent, std::uint32_t u);
  Task<void> prk_task(Agent& agent, std::uint32_t u);
  Task<void> drain_own(Agent& agent);
  Task<bool> steal_once(Agent& agent);
  Address word(Address base, std::uint64_t i) const { return Address{base.value + 8 * i}; }

  Graph graph_;
  Params params_;
  std::uint32_t block_size_ = 64;
  std::uint32_t num_wg_ = 0;
  std::vector<DequeLayout> deques_;
  Address offsets_, targets_, weights_, in_, out_, contrib_, done_;
  std::vector<std::uint64_t> d0_;
  std::vector<TaskRecord> log_;
  std::vector<std::uint32_t> per_wg_;
};

/**
 * One owner on CU 0 enters a critical section at least `owner_sections`
 * times, and for as long as any thief is active, with work-group scope
 * synchronization; every other CU is a thief entering `thief_sections`
 * times through the thief path. Each section increments a
 * shared counter with plain accesses. Every CU keeps rewriting its own
 * private blocks, so its L1 holds dirty data whenever a remote operation
 * arrives. Thieves start staggered over one think period and stay idle
 * when stealing is disabled.
 */
class MutexWorkload final : public Workload {
 public:
  struct Params {
    std::uint32_t owner_sections = 64;
    std::uint32_t thief_sections = 4;
    std::uint32_t private_blocks = 8;
    Tick owner_think = 40;
    /// Private work rounds a thief runs before each lock attempt.
    std::uint32_t thief_rounds = 256;
    /// Gap between two private work rounds.
    Tick round_gap = 40;
  };

  explicit MutexWorkload(Params params) : params_(params) {}

  std::string name() const override { return "mutex"; }
  void initialize(Engine& engine) override;
  Task<void> program(Agent& agent) override;

  std::uint64_t counter(const std::map<std::uint64_t, BlockBytes>& memory) const;
  /// Owner sections actually run plus thief sections; valid after a run.
  std::uint64_t expected_counter() const;
  Address lock_address() const { return lock_; }

 private:
  Task<void> owner(Agent& agent);
  Task<void> thief(Agent& agent);
  Task<void> private_work(Agent& agent, Address region, std::uint32_t round);

  Params params_;
  std::uint32_t block_size_ = 64;
  std::uint32_t num_cus_ = 0;
  bool stealing_ = false;
  Address lock_, counter_;
  std::vector<Address> private_;
  std::uint64_t owner_done_ = 0;
  std::uint32_t thieves_active_ = 0;
};

}  // namespace scopesim
