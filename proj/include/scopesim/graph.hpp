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
 * @file graph.hpp
 * @brief Directed weighted graphs in CSR form and the DIMACS shortest-path
 *        text format.
 */

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scopesim {

struct Graph {
  std::uint32_t n = 0;
  std::vector<std::uint32_t> offsets{0};  // n + 1 entries
  std::vector<std::uint32_t> targets;
  std::vector<std::uint32_t> weights;

  std::size_t m() const { return targets.size(); }
  std::uint32_t degree(std::uint32_t v) const { return offsets[v + 1] - offsets[v]; }
  /// Throws std::logic_error when the CSR arrays are inconsistent.
  void validate() const;
};

class Malformed : public std::runtime_error {
 public:
  Malformed(std::size_t line_no, std::string reason);
  std::size_t line_no() const { return line_no_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t line_no_;
  std::string reason_;
};

class MissingHeader : public std::runtime_error {
 public:
  MissingHeader() : std::runtime_error("no 'p sp' line") {}
};

/// Accepts `c` comments, one `p sp n m` line and exactly m `a u v w` arcs
/// with 1-based vertices. Arcs keep their input order within a source.
Graph parse_dimacs(std::string_view text);
Graph load_dimacs_file(const std::string& path);
std::string format_dimacs(const Graph& g);

/// rows x cols grid with arcs in both directions between 4-neighbours and
/// seeded weights in [1, max_weight].
Graph make_grid_graph(std::uint32_t rows, std::uint32_t cols, std::uint32_t max_weight,
                      std::uint64_t seed);

}  // namespace scopesim
