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

#include "scopesim/verifier.hpp"

using namespace scopesim;

namespace {

bool stale(const Outcome& o) {
  auto f = o.find("flag");
  auto d = o.find("data");
  return f != o.end() && f->second == 1 && d != o.end() && d->second == 0;
}

LitmusProgram single_agent() {
  LitmusProgram p;
  p.name = "single";
  p.agents = 1;
  p.observed = {{"x", Address{0x100}}};
  p.body = [](Agent& a) -> Task<void> {
    co_await a.store(Address{0x100}, 3);
    co_await a.litmus(OpKind::AtomicAdd, Address{0x100}, Ordering::AcqRel, Scope::WorkGroup, false, 2);
    a.record("r", co_await a.load(Address{0x100}));
  };
  p.allowed = [](const Outcome& o) { return o.at("x") == 5 && o.at("r") == 5; };
  return p;
}

}  // namespace

TEST_SUITE("verifier") {
  TEST_CASE("remote acquire never reads stale data") {
    for (auto s : {Scenario::RSP, Scenario::SRSP}) {
      auto set = exhaustive(mp_remote(), s);
      CHECK(set.schedules > 1);
      for (const auto& o : set.outcomes()) CHECK_FALSE(stale(o));
      bool saw_flag = false;
      for (const auto& o : set.outcomes()) saw_flag |= o.at("flag") == 1;
      CHECK(saw_flag);
    }
  }

  TEST_CASE("naive and selective protocols agree on every corpus program") {
    for (const auto& p : litmus_corpus()) {
      CAPTURE(p.name);
      CHECK(exhaustive(p, Scenario::RSP).outcomes() == exhaustive(p, Scenario::SRSP).outcomes());
    }
  }

  TEST_CASE("a single agent has one outcome") {
    auto set = exhaustive(single_agent(), Scenario::SRSP);
    CHECK(set.schedules == 1);
    CHECK(set.outcomes().size() == 1);
    CHECK(format_outcome(*set.outcomes().begin()) == "r=5 x=5");
  }

  TEST_CASE("sampled mutex keeps mutual exclusion") {
    auto set = sample(asym_mutex(50), Scenario::SRSP, 500, 1);
    CHECK(set.schedules == 500);
    REQUIRE(set.outcomes().size() == 1);
    CHECK(set.outcomes().begin()->at("counter") == 100);
  }

  TEST_CASE("sampling is reproducible") {
    auto a = sample(sb_remote(), Scenario::SRSP, 200, 7);
    auto b = sample(sb_remote(), Scenario::SRSP, 200, 7);
    CHECK(a.counts == b.counts);
    auto one = sample(mp_remote(), Scenario::RSP, 1, 3);
    CHECK(one.schedules == 1);
    CHECK(one.outcomes().size() == 1);
  }

  TEST_CASE("oracle outcomes") {
    auto mp = sc_oracle(mp_remote());
    for (const auto& o : mp) {
      if (o.at("flag") == 1) CHECK(o.at("data") == 1);
    }
    CHECK(mp.size() == 2);
    auto mutex = sc_oracle(asym_mutex(2));
    REQUIRE(mutex.size() == 1);
    CHECK(mutex.begin()->at("counter") == 4);
    auto sb = sc_oracle(sb_remote());
    CHECK(sb.size() == 3);
    CHECK(sb == exhaustive(sb_remote(), Scenario::SRSP).outcomes());
    CHECK_THROWS_AS(sc_oracle(stale_read_negative()), RaceDetected);
  }

  TEST_CASE("missing acquire exposes a stale read") {
    auto set = exhaustive(stale_read_negative(), Scenario::SRSP);
    bool seen = false;
    for (const auto& o : set.outcomes()) seen |= stale(o);
    CHECK(seen);
    auto v = verify(stale_read_negative(), Scenario::SRSP, VerifyMode::Exhaustive, 0, 0, std::nullopt);
    CHECK(v.pass);
  }

  TEST_CASE("verdicts") {
    auto p = mp_remote();
    auto oracle = sc_oracle(p);
    auto v = verify(p, Scenario::SRSP, VerifyMode::Exhaustive, 0, 0, oracle);
    CHECK(v.pass);
    CHECK(format_verdict(v) == "mp_remote srsp " + std::to_string(v.schedules) + " " +
                                   std::to_string(v.outcomes) + " PASS");
    // An allowed-set that rejects everything must fail.
    p.allowed = [](const Outcome&) { return false; };
    CHECK_FALSE(verify(p, Scenario::SRSP, VerifyMode::Exhaustive, 0, 0, oracle).pass);
  }

  TEST_CASE("plain scope lowering breaks the remote mutex") {
    auto v = verify(asym_mutex(1), Scenario::ScopeOnly, VerifyMode::Exhaustive, 0, 0, sc_oracle(asym_mutex(1)));
    CHECK_FALSE(v.pass);
  }

  TEST_CASE("baseline lowering runs stealing programs") {
    CHECK(lowering_scenario(deque_race(), Scenario::Baseline) == Scenario::StealOnly);
    CHECK(lowering_scenario(mp_remote(), Scenario::Baseline) == Scenario::Baseline);
    CHECK(lowering_scenario(deque_race(), Scenario::SRSP) == Scenario::SRSP);
  }

  TEST_CASE("exploration is bounded") {
    VerifierOptions o;
    o.max_schedules = 10;
    CHECK_THROWS_AS(exhaustive(asym_mutex(2), Scenario::SRSP, o), StateSpaceTooLarge);
  }
}
