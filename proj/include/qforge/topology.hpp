#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qforge/error.hpp"

namespace qforge {

// Physical qubit connectivity with optional per-edge fidelity in (0, 1].
struct Topology {
  std::uint32_t node_count = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // a < b, sorted
  std::vector<double> fidelity;  // aligned with edges, default 1.0

  void add_edge(std::uint32_t a, std::uint32_t b, double f = 1.0) {
    if (a == b) throw ValidationError("topology: self-loop rejected");
    if (a >= node_count || b >= node_count)
      throw ValidationError("topology: edge endpoint out of range");
    if (!(f > 0.0 && f <= 1.0))
      throw ValidationError("topology: fidelity must lie in (0, 1]");
    if (a > b) std::swap(a, b);
    auto e = std::make_pair(a, b);
    auto it = std::lower_bound(edges.begin(), edges.end(), e);
    if (it != edges.end() && *it == e)
      throw ValidationError("topology: duplicate edge");
    fidelity.insert(fidelity.begin() + (it - edges.begin()), f);
    edges.insert(it, e);
  }

  bool has_edge(std::uint32_t a, std::uint32_t b) const {
    if (a > b) std::swap(a, b);
    return std::binary_search(edges.begin(), edges.end(), std::make_pair(a, b));
  }

  double edge_fidelity(std::uint32_t a, std::uint32_t b) const {
    if (a > b) std::swap(a, b);
    auto it = std::lower_bound(edges.begin(), edges.end(), std::make_pair(a, b));
    if (it == edges.end() || *it != std::make_pair(a, b))
      throw ValidationError("topology: no such edge");
    return fidelity[it - edges.begin()];
  }

  std::vector<std::vector<std::uint32_t>> adjacency() const {
    std::vector<std::vector<std::uint32_t>> adj(node_count);
    for (auto& [a, b] : edges) {
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    return adj;  // neighbor lists ascending because edges are sorted
  }

  bool connected() const {
    if (node_count == 0) return false;
    if (node_count == 1) return true;
    auto adj = adjacency();
    std::vector<bool> seen(node_count, false);
    std::deque<std::uint32_t> queue{0};
    seen[0] = true;
    std::uint32_t count = 1;
    while (!queue.empty()) {
      auto v = queue.front();
      queue.pop_front();
      for (auto w : adj[v])
        if (!seen[w]) {
          seen[w] = true;
          ++count;
          queue.push_back(w);
        }
    }
    return count == node_count;
  }

  // BFS distances between all node pairs.
  std::vector<std::vector<std::uint32_t>> all_pairs_distance() const {
    auto adj = adjacency();
    std::vector<std::vector<std::uint32_t>> dist(
        node_count, std::vector<std::uint32_t>(node_count, UINT32_MAX));
    for (std::uint32_t s = 0; s < node_count; ++s) {
      dist[s][s] = 0;
      std::deque<std::uint32_t> queue{s};
      while (!queue.empty()) {
        auto v = queue.front();
        queue.pop_front();
        for (auto w : adj[v])
          if (dist[s][w] == UINT32_MAX) {
            dist[s][w] = dist[s][v] + 1;
            queue.push_back(w);
          }
      }
    }
    return dist;
  }

  void validate() const {
    if (node_count == 0) throw ValidationError("topology: no nodes");
    if (!connected()) throw ValidationError("topology: graph is disconnected");
  }
};

inline Topology make_path_topology(std::uint32_t n) {
  Topology t;
  t.node_count = n;
  for (std::uint32_t i = 0; i + 1 < n; ++i) t.add_edge(i, i + 1);
  return t;
}

inline Topology make_ring_topology(std::uint32_t n) {
  Topology t = make_path_topology(n);
  if (n >= 3) t.add_edge(0, n - 1);
  return t;
}

inline Topology make_grid_topology(std::uint32_t rows, std::uint32_t cols) {
  Topology t;
  t.node_count = rows * cols;
  for (std::uint32_t r = 0; r < rows; ++r)
    for (std::uint32_t c = 0; c < cols; ++c) {
      if (c + 1 < cols) t.add_edge(r * cols + c, r * cols + c + 1);
      if (r + 1 < rows) t.add_edge(r * cols + c, (r + 1) * cols + c);
    }
  return t;
}

// Line format: `nodes N`, then `edge a b [fidelity]` lines; `#` comments.
inline Topology parse_topology(const std::string& text) {
  Topology topo;
  bool have_nodes = false;
  std::istringstream in(text);
  std::string line;
  std::uint32_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    if (word == "nodes") {
      if (have_nodes)
        throw ParseError(ParseErrorKind::Syntax, lineno, 0,
                         "duplicate nodes declaration");
      if (!(ls >> topo.node_count))
        throw ParseError(ParseErrorKind::Syntax, lineno, 0,
                         "nodes needs a count");
      have_nodes = true;
    } else if (word == "edge") {
      if (!have_nodes)
        throw ParseError(ParseErrorKind::Syntax, lineno, 0,
                         "edge before nodes declaration");
      std::uint32_t a, b;
      if (!(ls >> a >> b))
        throw ParseError(ParseErrorKind::Syntax, lineno, 0,
                         "edge needs two node indices");
      double f = 1.0;
      ls >> f;
      try {
        topo.add_edge(a, b, f);
      } catch (const ValidationError& e) {
        throw ParseError(ParseErrorKind::RangeError, lineno, 0, e.what());
      }
    } else {
      throw ParseError(ParseErrorKind::UnknownMnemonic, lineno, 0,
                       "expected 'nodes' or 'edge', got '" + word + "'");
    }
    std::string trailing;
    if (ls >> trailing)
      throw ParseError(ParseErrorKind::Syntax, lineno, 0,
                       "unexpected trailing token '" + trailing + "'");
  }
  if (!have_nodes)
    throw ParseError(ParseErrorKind::Syntax, lineno ? lineno : 1, 0,
                     "missing nodes declaration");
  topo.validate();
  return topo;
}

}  // namespace qforge
