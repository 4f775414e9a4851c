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

#include "scopesim/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "scopesim/types.hpp"

namespace scopesim {

Config default_config() { return Config{}; }

std::vector<std::string> validate_config(const Config& c) {
  std::vector<std::string> errors;
  if (c.num_cus == 0) errors.emplace_back("num_cus must be positive");
  if (!is_power_of_two(c.block_size)) {
    errors.emplace_back("block_size not power of two");
  } else if (c.block_size < 8 || c.block_size > 64) {
    errors.emplace_back("block_size must be between 8 and 64 bytes");
  }
  if (c.l1_ways == 0 || c.l2_ways == 0) errors.emplace_back("ways must be positive");
  if (c.l1_sfifo_capacity == 0 || c.l2_sfifo_capacity == 0 || c.patbl_capacity == 0) {
    errors.emplace_back("capacity must be positive");
  }
  if (c.block_size != 0 && c.l1_ways != 0) {
    std::uint64_t unit = std::uint64_t{c.block_size} * c.l1_ways;
    if (c.l1_size == 0 || c.l1_size % unit != 0) {
      errors.emplace_back("l1_size must be a positive multiple of block_size * l1_ways");
    }
  }
  if (c.block_size != 0 && c.l2_ways != 0) {
    std::uint64_t unit = std::uint64_t{c.block_size} * c.l2_ways;
    if (c.l2_size == 0 || c.l2_size % unit != 0) {
      errors.emplace_back("l2_size must be a positive multiple of block_size * l2_ways");
    }
  }
  if (c.l1_latency == 0 || c.l2_latency == 0 || c.mem_latency == 0) {
    errors.emplace_back("latencies must be positive");
  }
  return errors;
}

namespace {

using Field = std::function<void(Config&, std::uint64_t)>;

const std::map<std::string, Field, std::less<>>& fields() {
  static const std::map<std::string, Field, std::less<>> table = {
      {"num_cus", [](Config& c, std::uint64_t v) { c.num_cus = static_cast<std::uint32_t>(v); }},
      {"block_size", [](Config& c, std::uint64_t v) { c.block_size = static_cast<std::uint32_t>(v); }},
      {"l1_size", [](Config& c, std::uint64_t v) { c.l1_size = static_cast<std::uint32_t>(v); }},
      {"l1_ways", [](Config& c, std::uint64_t v) { c.l1_ways = static_cast<std::uint32_t>(v); }},
      {"l1_latency", [](Config& c, std::uint64_t v) { c.l1_latency = static_cast<std::uint32_t>(v); }},
      {"l1_sfifo_capacity",
       [](Config& c, std::uint64_t v) { c.l1_sfifo_capacity = static_cast<std::uint32_t>(v); }},
      {"l2_size", [](Config& c, std::uint64_t v) { c.l2_size = static_cast<std::uint32_t>(v); }},
      {"l2_ways", [](Config& c, std::uint64_t v) { c.l2_ways = static_cast<std::uint32_t>(v); }},
      {"l2_latency", [](Config& c, std::uint64_t v) { c.l2_latency = static_cast<std::uint32_t>(v); }},
      {"l2_sfifo_capacity",
       [](Config& c, std::uint64_t v) { c.l2_sfifo_capacity = static_cast<std::uint32_t>(v); }},
      {"mem_latency", [](Config& c, std::uint64_t v) { c.mem_latency = static_cast<std::uint32_t>(v); }},
      {"patbl_capacity",
       [](Config& c, std::uint64_t v) { c.patbl_capacity = static_cast<std::uint32_t>(v); }},
      {"cas_retry_backoff",
       [](Config& c, std::uint64_t v) { c.cas_retry_backoff = static_cast<std::uint32_t>(v); }},
      {"seed", [](Config& c, std::uint64_t v) { c.seed = v; }},
  };
  return table;
}

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace

Config parse_config(std::string_view text) {
  Config c = default_config();
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
    }
    auto key = trim(line.substr(0, eq));
    auto val = trim(line.substr(eq + 1));
    auto it = fields().find(key);
    if (it == fields().end()) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    }
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
    if (ec != std::errc{} || ptr != val.data() + val.size()) {
      throw ConfigError("line " + std::to_string(line_no) + ": bad value for '" + std::string(key) + "'");
    }
    if (key != "seed" && v > UINT32_MAX) {
      throw ConfigError("line " + std::to_string(line_no) + ": value out of range for '" +
                        std::string(key) + "'");
    }
    it->second(c, v);
  }
  return c;
}

Config load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const Config& c) {
  std::ostringstream os;
  os << "num_cus=" << c.num_cus << '\n'
     << "block_size=" << c.block_size << '\n'
     << "l1_size=" << c.l1_size << '\n'
     << "l1_ways=" << c.l1_ways << '\n'
     << "l1_latency=" << c.l1_latency << '\n'
     << "l1_sfifo_capacity=" << c.l1_sfifo_capacity << '\n'
     << "l2_size=" << c.l2_size << '\n'
     << "l2_ways=" << c.l2_ways << '\n'
     << "l2_latency=" << c.l2_latency << '\n'
     << "l2_sfifo_capacity=" << c.l2_sfifo_capacity << '\n'
     << "mem_latency=" << c.mem_latency << '\n'
     << "patbl_capacity=" << c.patbl_capacity << '\n'
     << "cas_retry_backoff=" << c.cas_retry_backoff << '\n'
     << "seed=" << c.seed << '\n';
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const Stats& s) {
  return os << "cycles=" << s.cycles << " l2_accesses=" << s.l2_accesses
            << " (fetch=" << s.l2_fetches << " wb=" << s.l2_writebacks << " atomic=" << s.l2_atomics
            << ") flushed=" << s.blocks_flushed << " invalidated=" << s.blocks_invalidated
            << " sel_flush=" << s.selective_flush_requests
            << " sel_inv=" << s.selective_invalidate_requests
            << " full_flush=" << s.full_flush_requests << " full_inv=" << s.full_invalidate_requests
            << " steals=" << s.steals_succeeded << '/' << s.steals_attempted
            << " rm_acq=" << s.remote_acquires << " rm_rel=" << s.remote_releases
            << " promoted=" << s.promoted_acquires << " stall=" << s.cu_stall_cycles
            << " tasks=" << s.tasks_executed;
}

}  // namespace scopesim
