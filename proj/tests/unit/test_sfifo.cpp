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

#include <deque>
#include <random>

#include "scopesim/sfifo.hpp"

using namespace scopesim;

namespace {

BlockAddr blk(std::uint64_t v) { return BlockAddr{v}; }

}  // namespace

TEST_SUITE("sfifo") {
  TEST_CASE("enqueue hands out increasing sequence numbers") {
    SFifo f(16);
    auto r = f.enqueue(blk(5), RecordKind::DataWrite);
    CHECK(r.handle.seq == 0);
    CHECK_FALSE(r.evicted.has_value());
    auto again = f.enqueue(blk(5), RecordKind::DataWrite);
    CHECK(again.handle.seq == 1);
    CHECK(f.size() == 2);
  }

  TEST_CASE("a full FIFO evicts its oldest record") {
    SFifo f(16);
    for (std::uint64_t i = 0; i < 16; ++i) f.enqueue(blk(i), RecordKind::DataWrite);
    auto r = f.enqueue(blk(9), RecordKind::AtomicWrite);
    CHECK(r.handle.seq == 16);
    REQUIRE(r.evicted.has_value());
    CHECK(r.evicted->seq == 0);
    CHECK(f.size() == 16);
    CHECK(f.head_seq() == 1);
  }

  TEST_CASE("drain_until removes the prefix through the handle") {
    SFifo f(16);
    f.enqueue(blk(1), RecordKind::DataWrite);
    f.enqueue(blk(2), RecordKind::DataWrite);
    auto l = f.enqueue(blk(3), RecordKind::AtomicWrite);
    auto d = f.drain_until(l.handle);
    REQUIRE(d.has_value());
    REQUIRE(d->size() == 3);
    CHECK((*d)[0].block == blk(1));
    CHECK((*d)[2].block == blk(3));
    CHECK(f.empty());

    auto c = f.enqueue(blk(7), RecordKind::DataWrite);
    f.enqueue(blk(8), RecordKind::DataWrite);
    auto part = f.drain_until(c.handle);
    REQUIRE(part.has_value());
    CHECK(part->size() == 1);
    CHECK(f.size() == 1);
    CHECK(f.records().front().block == blk(8));
    CHECK_FALSE(f.drain_until(RecordHandle{2}).has_value());
  }

  TEST_CASE("drain_all keeps order and duplicates") {
    SFifo f(4);
    CHECK(f.drain_all().empty());
    f.enqueue(blk(1), RecordKind::DataWrite);
    f.enqueue(blk(1), RecordKind::DataWrite);
    auto all = f.drain_all();
    REQUIRE(all.size() == 2);
    CHECK(all[0].seq == 0);
    CHECK(all[1].seq == 1);
    CHECK(f.empty());
  }

  TEST_CASE("is_live tracks the window") {
    SFifo f(4);
    for (int i = 0; i < 7; ++i) f.enqueue(blk(i), RecordKind::DataWrite);
    REQUIRE(f.head_seq() == 3);
    REQUIRE(f.next_seq() == 7);
    CHECK(f.is_live(RecordHandle{3}));
    CHECK_FALSE(f.is_live(RecordHandle{2}));
    CHECK_FALSE(f.is_live(RecordHandle{7}));
  }

  TEST_CASE("random operations agree with a reference queue") {
    SFifo f(16);
    std::deque<SFifoRecord> ref;
    std::uint64_t next = 0;
    std::mt19937_64 rng(12345);
    std::uint64_t evicted = 0, drained = 0;
    for (int step = 0; step < 200000; ++step) {
      auto pick = rng() % 10;
      if (pick < 7) {
        BlockAddr b = blk(rng() % 32);
        auto kind = rng() % 2 ? RecordKind::DataWrite : RecordKind::AtomicWrite;
        auto r = f.enqueue(b, kind);
        REQUIRE(r.handle.seq == next);
        std::optional<SFifoRecord> ev;
        if (ref.size() == 16) {
          ev = ref.front();
          ref.pop_front();
          ++evicted;
        }
        ref.push_back(SFifoRecord{b, kind, next++});
        REQUIRE(r.evicted == ev);
      } else if (pick < 9) {
        std::uint64_t seq = next == 0 ? 0 : rng() % (next + 2);
        auto d = f.drain_until(RecordHandle{seq});
        bool live = !ref.empty() && seq >= ref.front().seq && seq <= ref.back().seq;
        REQUIRE(d.has_value() == live);
        if (live) {
          std::vector<SFifoRecord> want;
          while (!ref.empty() && ref.front().seq <= seq) {
            want.push_back(ref.front());
            ref.pop_front();
          }
          drained += want.size();
          REQUIRE(*d == want);
        }
      } else {
        auto all = f.drain_all();
        REQUIRE(all == std::vector<SFifoRecord>(ref.begin(), ref.end()));
        drained += ref.size();
        ref.clear();
      }
      REQUIRE(f.size() == ref.size());
      REQUIRE(f.total_enqueued() == f.total_evicted() + f.total_drained() + f.size());
    }
    CHECK(f.total_evicted() == evicted);
    CHECK(f.total_drained() == drained);
  }
}
