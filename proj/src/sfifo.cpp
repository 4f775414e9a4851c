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

#include "scopesim/sfifo.hpp"

#include <algorithm>
#include <stdexcept>

namespace scopesim {

SFifo::SFifo(std::uint32_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("sFIFO capacity must be positive");
}

SFifo::EnqueueResult SFifo::enqueue(BlockAddr block, RecordKind kind) {
  EnqueueResult result;
  if (queue_.size() == capacity_) {
    result.evicted = queue_.front();
    queue_.pop_front();
    head_seq_ = result.evicted->seq + 1;
    ++evicted_;
  }
  SFifoRecord rec{block, kind, next_seq_++};
  queue_.push_back(rec);
  ++enqueued_;
  result.handle = RecordHandle{rec.seq};
  return result;
}

std::optional<std::vector<SFifoRecord>> SFifo::drain_until(RecordHandle h) {
  if (!is_live(h)) return std::nullopt;
  std::vector<SFifoRecord> out;
  out.reserve(static_cast<std::size_t>(h.seq - head_seq_ + 1));
  while (!queue_.empty() && queue_.front().seq <= h.seq) {
    out.push_back(queue_.front());
    queue_.pop_front();
  }
  head_seq_ = h.seq + 1;
  drained_ += out.size();
  return out;
}

std::vector<SFifoRecord> SFifo::drain_all() {
  std::vector<SFifoRecord> out(queue_.begin(), queue_.end());
  queue_.clear();
  head_seq_ = next_seq_;
  drained_ += out.size();
  return out;
}

bool SFifo::covers(BlockAddr block) const {
  return std::any_of(queue_.begin(), queue_.end(),
                     [&](const SFifoRecord& r) { return r.block == block; });
}

}  // namespace scopesim
