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

#include "scopesim/graph.hpp"

#include <charconv>
#include <fstream>
#include <random>
#include <sstream>
#include <tuple>

namespace scopesim {

Malformed::Malformed(std::size_t line_no, std::string reason)
    : std::runtime_error("line " + std::to_string(line_no) + ": " + reason),
      line_no_(line_no),
      reason_(std::move(reason)) {}

void Graph::validate() const {
  if (offsets.size() != static_cast<std::size_t>(n) + 1) throw std::logic_error("offsets size");
  if (offsets.front() != 0 || offsets.back() != m()) throw std::logic_error("offsets bounds");
  for (std::uint32_t v = 0; v < n; ++v) {
    if (offsets[v] > offsets[v + 1]) throw std::logic_error("offsets decrease");
  }
  if (weights.size() != targets.size()) throw std::logic_error("weights size");
  for (auto t : targets) {
    if (t >= n) throw std::logic_error("target out of range");
  }
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::uint64_t number(std::string_view tok, std::size_t line_no, const char* what) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size()) {
    throw Malformed(line_no, std::string("bad ") + what + " '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace

Graph parse_dimacs(std::string_view text) {
  bool have_header = false;
  std::uint64_t n = 0, m = 0;
  std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> arcs;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    auto tok = split(line);
    if (tok.empty() || tok[0] == "c") continue;
    if (tok[0] == "p") {
      if (have_header) throw Malformed(line_no, "duplicate problem line");
      if (tok.size() != 4 || tok[1] != "sp") throw Malformed(line_no, "expected 'p sp n m'");
      n = number(tok[2], line_no, "vertex count");
      m = number(tok[3], line_no, "arc count");
      if (n > UINT32_MAX || m > UINT32_MAX) throw Malformed(line_no, "graph too large");
      have_header = true;
      arcs.reserve(m);
    } else if (tok[0] == "a") {
      if (!have_header) throw Malformed(line_no, "arc before problem line");
      if (tok.size() != 4) throw Malformed(line_no, "expected 'a u v w'");
      auto u = number(tok[1], line_no, "vertex");
      auto v = number(tok[2], line_no, "vertex");
      auto w = number(tok[3], line_no, "weight");
      if (u == 0 || v == 0 || u > n || v > n) throw Malformed(line_no, "vertex out of range");
      if (w > UINT32_MAX) throw Malformed(line_no, "weight out of range");
      if (arcs.size() == m) throw Malformed(line_no, "more arcs than declared");
      arcs.emplace_back(static_cast<std::uint32_t>(u - 1), static_cast<std::uint32_t>(v - 1),
                        static_cast<std::uint32_t>(w));
    } else {
      throw Malformed(line_no, "unknown line type '" + std::string(tok[0]) + "'");
    }
  }
  if (!have_header) throw MissingHeader();
  if (arcs.size() != m) throw Malformed(line_no, "fewer arcs than declared");

  Graph g;
  g.n = static_cast<std::uint32_t>(n);
  g.offsets.assign(g.n + 1, 0);
  for (const auto& [u, v, w] : arcs) ++g.offsets[u + 1];
  for (std::uint32_t i = 0; i < g.n; ++i) g.offsets[i + 1] += g.offsets[i];
  g.targets.resize(m);
  g.weights.resize(m);
  std::vector<std::uint32_t> cursor(g.offsets.begin(), g.offsets.end() - 1);
  for (const auto& [u, v, w] : arcs) {
    auto at = cursor[u]++;
    g.targets[at] = v;
    g.weights[at] = w;
  }
  return g;
}

Graph load_dimacs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_dimacs(ss.str());
}

std::string format_dimacs(const Graph& g) {
  std::ostringstream os;
  os << "p sp " << g.n << ' ' << g.m() << '\n';
  for (std::uint32_t u = 0; u < g.n; ++u) {
    for (auto e = g.offsets[u]; e < g.offsets[u + 1]; ++e) {
      os << "a " << u + 1 << ' ' << g.targets[e] + 1 << ' ' << g.weights[e] << '\n';
    }
  }
  return os.str();
}

Graph make_grid_graph(std::uint32_t rows, std::uint32_t cols, std::uint32_t max_weight,
                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> wdist(1, max_weight);
  Graph g;
  g.n = rows * cols;
  g.offsets.assign(g.n + 1, 0);
  auto id = [cols](std::uint32_t r, std::uint32_t c) { return r * cols + c; };
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) {
      auto add = [&](std::uint32_t v) {
        g.targets.push_back(v);
        g.weights.push_back(wdist(rng));
      };
      if (r > 0) add(id(r - 1, c));
      if (c > 0) add(id(r, c - 1));
      if (c + 1 < cols) add(id(r, c + 1));
      if (r + 1 < rows) add(id(r + 1, c));
      g.offsets[id(r, c) + 1] = static_cast<std::uint32_t>(g.targets.size());
    }
  }
  return g;
}

}  // namespace scopesim
