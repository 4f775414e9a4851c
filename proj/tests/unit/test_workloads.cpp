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

#include <algorithm>

#include "helpers.hpp"
#include "scopesim/verifier.hpp"
#include "scopesim/workloads.hpp"

using namespace scopesim;
using scopesim::testing::options_for;
using scopesim::testing::small_config;

namespace {

/// One deque owned by CU 0 and a scripted sequence of deque calls per agent.
class DequeScript final : public Workload {
 public:
  using Body = Task<void> (*)(Agent&, const DequeLayout&);
  DequeScript(std::uint32_t agents, std::vector<std::uint32_t> tasks, Body body)
      : agents_(agents), tasks_(std::move(tasks)), body_(body) {}

  std::string name() const override { return "deque"; }
  std::uint32_t agent_count(const Config&) const override { return agents_; }
  void initialize(Engine& engine) override {
    MemoryLayout layout(engine.config().block_size);
    d_ = allocate_deque(layout, 8, 0);
    init_deque(d_, tasks_, [&](Address a, std::uint64_t v) { engine.poke(a, v); });
  }
  Task<void> program(Agent& agent) override { return body_(agent, d_); }
  const DequeLayout& layout() const { return d_; }

 private:
  std::uint32_t agents_;
  std::vector<std::uint32_t> tasks_;
  Body body_;
  DequeLayout d_;
};

void record(Agent& a, const std::string& prefix, const DequeResult& r) {
  a.record(prefix + "_status", static_cast<std::uint64_t>(r.status));
  a.record(prefix + "_task", r.task);
}


}  // namespace

TEST_SUITE("workloads") {
  TEST_CASE("parse_dimacs builds CSR") {
    Graph g = parse_dimacs("c tiny\nc more\np sp 2 1\na 1 2 7\n");
    CHECK(g.n == 2);
    CHECK(g.m() == 1);
    CHECK(g.offsets == std::vector<std::uint32_t>{0, 1, 1});
    CHECK(g.targets == std::vector<std::uint32_t>{1});
    CHECK(g.weights == std::vector<std::uint32_t>{7});
    CHECK(parse_dimacs(format_dimacs(g)).targets == g.targets);
  }

  TEST_CASE("parse_dimacs rejects malformed input") {
    try {
      parse_dimacs("p sp 2 1\na 3 1 5\n");
      FAIL("expected Malformed");
    } catch (const Malformed& e) {
      CHECK(e.line_no() == 2);
      CHECK(e.reason() == "vertex out of range");
    }
    CHECK_THROWS_AS(parse_dimacs("c nothing\n"), MissingHeader);
    CHECK_THROWS_AS(parse_dimacs("a 1 2 3\n"), Malformed);
    CHECK_THROWS_AS(parse_dimacs("p sp 2 2\na 1 2 7\n"), Malformed);
    CHECK_THROWS_AS(parse_dimacs("p sp 2 1\na 1 2\n"), Malformed);
    CHECK_THROWS_AS(parse_dimacs("p sp 2 1\nx 1 2 3\n"), Malformed);
  }

  TEST_CASE("bundled grid graph matches the generator") {
    Graph file = load_dimacs_file(std::string(SCOPESIM_SOURCE_DIR) + "/data/grid30.gr");
    Graph gen = make_grid_graph(30, 30, 100, 7);
    CHECK(file.n == 900);
    CHECK(file.offsets == gen.offsets);
    CHECK(file.targets == gen.targets);
    CHECK(file.weights == gen.weights);
  }

  TEST_CASE("gen_tasks places tasks by imbalance") {
    Graph g = make_grid_graph(2, 4, 10, 1);
    REQUIRE(g.n == 8);
    auto even = gen_tasks(g, Kernel::SsspLite, 4, 0.0);
    REQUIRE(even.deques.size() == 4);
    for (const auto& d : even.deques) CHECK(d.size() == 2);
    auto skewed = gen_tasks(g, Kernel::SsspLite, 4, 1.0);
    CHECK(skewed.deques[0].size() == 8);
    for (std::size_t i = 1; i < 4; ++i) CHECK(skewed.deques[i].empty());
    CHECK(skewed.total() == 8);
  }

  TEST_CASE("sssp on two vertices") {
    Graph g = parse_dimacs("p sp 2 1\na 1 2 7\n");
    KernelWorkload w(g, {Kernel::SsspLite, 0.0, 0});
    auto r = run(w, small_config(1), options_for(Scenario::SRSP));
    auto d = w.results(r.memory);
    REQUIRE(d.size() == 2);
    CHECK(d[0] == 0);
    CHECK(d[1] == 7);
    CHECK(d == w.reference());
  }

  TEST_CASE("kernels match the reference in every scenario") {
    Graph g = make_grid_graph(10, 10, 100, 5);
    for (auto kernel : {Kernel::SsspLite, Kernel::PageRankLite}) {
      for (auto s : kAllScenarios) {
        CAPTURE(to_string(s));
        CAPTURE(to_string(kernel));
        KernelWorkload w(g, {kernel, 0.9, 0});
        auto r = run(w, small_config(4), options_for(s));
        CHECK(w.results(r.memory) == w.reference());
        CHECK(w.tasks_conserved());
        CHECK(w.task_log().size() == g.n);
        if (stealing_enabled(s)) {
          CHECK(r.stats.steals_succeeded > 0);
        } else {
          CHECK(r.stats.steals_succeeded == 0);
        }
      }
    }
  }

  TEST_CASE("task log lists every executed task") {
    Graph g = make_grid_graph(3, 3, 10, 2);
    KernelWorkload w(g, {Kernel::PageRankLite, 0.9, 0});
    run(w, small_config(2), options_for(Scenario::SRSP));
    auto log = w.format_task_log();
    CHECK(std::count(log.begin(), log.end(), '\n') == 9);
  }

  TEST_CASE("owner pop takes the last task") {
    DequeScript w(1, {5}, [](Agent& a, const DequeLayout& d) -> Task<void> {
      record(a, "first", co_await deque_pop_tail(a, d));
      record(a, "second", co_await deque_pop_tail(a, d));
    });
    Engine e(small_config(1), options_for(Scenario::SRSP));
    w.initialize(e);
    e.add_agent(0);
    e.spawn(0, w.program(e.agent(0)));
    e.run();
    const auto& regs = e.agent(0).registers();
    CHECK(regs.at("first_status") == static_cast<std::uint64_t>(DequeStatus::Task));
    CHECK(regs.at("first_task") == 5);
    CHECK(regs.at("second_status") == static_cast<std::uint64_t>(DequeStatus::Empty));
  }

  TEST_CASE("steal from an empty deque reports Empty") {
    DequeScript w(2, {}, [](Agent& a, const DequeLayout& d) -> Task<void> {
      if (a.id() == 1) record(a, "steal", co_await deque_steal_head(a, d));
    });
    Engine e(small_config(2), options_for(Scenario::SRSP));
    w.initialize(e);
    e.add_agent(0);
    e.add_agent(1);
    e.spawn(0, w.program(e.agent(0)));
    e.spawn(1, w.program(e.agent(1)));
    e.run();
    CHECK(e.agent(1).registers().at("steal_status") == static_cast<std::uint64_t>(DequeStatus::Empty));
  }

  TEST_CASE("steal takes from the head and push appends at the tail") {
    DequeScript w(2, {1, 2, 3}, [](Agent& a, const DequeLayout& d) -> Task<void> {
      if (a.id() == 1) {
        record(a, "steal", co_await deque_steal_head(a, d));
      } else {
        co_await a.delay(2000);
        co_await deque_push_tail(a, d, {9});
        record(a, "pop", co_await deque_pop_tail(a, d));
        record(a, "pop2", co_await deque_pop_tail(a, d));
      }
    });
    Engine e(small_config(2), options_for(Scenario::SRSP));
    w.initialize(e);
    e.add_agent(0);
    e.add_agent(1);
    e.spawn(0, w.program(e.agent(0)));
    e.spawn(1, w.program(e.agent(1)));
    e.run();
    CHECK(e.agent(1).registers().at("steal_task") == 1);
    CHECK(e.agent(0).registers().at("pop_task") == 9);
    CHECK(e.agent(0).registers().at("pop2_task") == 3);
  }

  TEST_CASE("thief operations are rejected where stealing is off") {
    DequeScript w(2, {1}, [](Agent& a, const DequeLayout& d) -> Task<void> {
      if (a.id() == 1) co_await deque_steal_head(a, d);
    });
    CHECK_THROWS_AS(run(w, small_config(2), options_for(Scenario::ScopeOnly)), StealingDisabled);
  }

  TEST_CASE("owner and thief race for one task") {
    auto p = deque_race();
    for (auto s : {Scenario::Baseline, Scenario::RSP, Scenario::SRSP}) {
      CAPTURE(to_string(s));
      auto set = exhaustive(p, s);
      CHECK(set.schedules > 1);
      for (const auto& o : set.outcomes()) {
        CHECK(((o.at("owner") == 7) != (o.at("thief") == 7)));
      }
    }
  }

  TEST_CASE("mutex workload counts every section") {
    for (auto s : kAllScenarios) {
      CAPTURE(to_string(s));
      MutexWorkload::Params p;
      p.owner_sections = 8;
      p.thief_sections = 2;
      p.thief_rounds = 4;
      MutexWorkload w(p);
      auto r = run(w, small_config(4), options_for(s));
      CHECK(w.counter(r.memory) == w.expected_counter());
      if (stealing_enabled(s)) {
        CHECK(w.expected_counter() >= 8 + 3 * 2);
      } else {
        CHECK(w.expected_counter() == 8);
        CHECK(r.stats.steals_succeeded == 0);
      }
    }
  }
}
