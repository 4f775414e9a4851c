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
 * @file config.hpp
 * @brief Simulator configuration and run statistics.
 */

#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scopesim {

struct Config {
  std::uint32_t num_cus = 16;
  std::uint32_t block_size = 64;
  std::uint32_t l1_size = 16384;
  std::uint32_t l1_ways = 16;
  std::uint32_t l1_latency = 4;
  std::uint32_t l1_sfifo_capacity = 16;
  std::uint32_t l2_size = 524288;
  std::uint32_t l2_ways = 16;
  std::uint32_t l2_latency = 24;
  std::uint32_t l2_sfifo_capacity = 24;
  std::uint32_t mem_latency = 100;
  std::uint32_t patbl_capacity = 16;
  std::uint32_t cas_retry_backoff = 20;
  std::uint64_t seed = 1;

  std::uint32_t l1_sets() const { return l1_size / (block_size * l1_ways); }
  std::uint32_t l2_sets() const { return l2_size / (block_size * l2_ways); }

  bool operator==(const Config&) const = default;
};

/// 64-CU-class GPU parameters scaled to a 16-CU desk configuration.
Config default_config();

/// Every violated invariant as a human-readable message; empty when valid.
std::vector<std::string> validate_config(const Config& c);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses flat `key=value` lines on top of default_config(). Blank lines and
/// lines starting with '#' are skipped; unknown keys and bad values throw.
Config parse_config(std::string_view text);
Config load_config_file(const std::string& path);
std::string format_config(const Config& c);

struct Stats {
  std::uint64_t cycles = 0;
  std::uint64_t l2_accesses = 0;
  std::uint64_t blocks_flushed = 0;
  std::uint64_t blocks_invalidated = 0;
  std::uint64_t selective_flush_requests = 0;
  std::uint64_t selective_invalidate_requests = 0;
  std::uint64_t full_flush_requests = 0;
  std::uint64_t full_invalidate_requests = 0;
  std::uint64_t steals_attempted = 0;
  std::uint64_t steals_succeeded = 0;
  std::uint64_t remote_acquires = 0;
  std::uint64_t remote_releases = 0;
  std::uint64_t cu_stall_cycles = 0;
  // Breakdown of l2_accesses.
  std::uint64_t l2_fetches = 0;
  std::uint64_t l2_writebacks = 0;
  std::uint64_t l2_atomics = 0;
  std::uint64_t promoted_acquires = 0;
  std::uint64_t tasks_executed = 0;

  bool operator==(const Stats&) const = default;
};

std::ostream& operator<<(std::ostream& os, const Stats& s);

}  // namespace scopesim
