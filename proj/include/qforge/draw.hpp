#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "qforge/circuit.hpp"
#include "qforge/dag.hpp"
#include "qforge/error.hpp"

namespace qforge {

namespace detail {

// Code-point count; every glyph used by the drawer is single-width.
inline std::size_t display_width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++w;
  return w;
}

inline std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline std::string gate_label(const Gate& g) {
  std::string name = gate_name(g.kind);
  if (!g.params.empty()) {
    name += '(';
    for (std::size_t i = 0; i < g.params.size(); ++i) {
      if (i) name += ',';
      name += short_number(g.params[i]);
    }
    name += ')';
  }
  if (g.dagger) name += "†";  // dagger sign
  return name;
}

}  // namespace detail

// Console rendering: one row per qubit, one column per dependency layer
// (overlapping gates spill into extra columns).  Wires are `─`, controls `●`,
// CNOT/TOFFOLI targets `⊕`, SWAP ends `×`, measurements `M`; unrelated wires
// crossed by a link show `┼`.
inline std::string draw(const Program& p) {
  if (!p.is_flat())
    throw FlatCircuitRequired("drawing requires a flat program");

  const CircuitDAG dag = build_dag(p);
  const auto order = topo_order(dag);

  // Column assignment: after all predecessors, in the first column where the
  // node's row span is free.
  std::vector<std::size_t> col(dag.nodes.size(), 0);
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> spans;
  for (auto v : order) {
    std::uint32_t lo = UINT32_MAX, hi = 0;
    for (auto q : dag.nodes[v].qubits) {
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    std::size_t c = 0;
    for (auto u : dag.pred[v]) c = std::max(c, col[u] + 1);
    auto overlaps = [&](std::size_t cc) {
      if (cc >= spans.size()) return false;
      for (auto& [a, b] : spans[cc])
        if (lo <= b && a <= hi) return true;
      return false;
    };
    while (overlaps(c)) ++c;
    col[v] = c;
    if (c >= spans.size()) spans.resize(c + 1);
    spans[c].push_back({lo, hi});
  }
  const std::size_t ncols = spans.size();

  // Cell text per (row, column); empty means plain wire.
  std::vector<std::vector<std::string>> cell(
      p.qubit_count, std::vector<std::string>(ncols));
  for (std::size_t v = 0; v < dag.nodes.size(); ++v) {
    const auto& node = dag.nodes[v];
    const std::size_t c = col[v];
    std::uint32_t lo = UINT32_MAX, hi = 0;
    for (auto q : node.qubits) {
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    if (node.is_measure()) {
      cell[node.measure().qubit][c] = "M";
      continue;
    }
    const Gate& g = node.gate();
    for (auto q : g.controls) cell[q][c] = "●";  // ●
    switch (g.kind) {
      case GateKind::CNOT:
        cell[g.targets[0]][c] = "●";
        cell[g.targets[1]][c] = "⊕";  // ⊕
        break;
      case GateKind::TOFFOLI:
        cell[g.targets[0]][c] = "●";
        cell[g.targets[1]][c] = "●";
        cell[g.targets[2]][c] = "⊕";
        break;
      case GateKind::CZ:
        cell[g.targets[0]][c] = "●";
        cell[g.targets[1]][c] = "●";
        break;
      case GateKind::SWAP:
        cell[g.targets[0]][c] = "×";  // ×
        cell[g.targets[1]][c] = "×";
        break;
      case GateKind::Custom:
        for (auto t : g.targets)
          cell[t][c] = g.dagger ? "U†" : "U";
        break;
      default:
        cell[g.targets[0]][c] = detail::gate_label(g);
        break;
    }
    for (std::uint32_t q = lo + 1; q < hi; ++q)
      if (cell[q][c].empty()) cell[q][c] = "┼";  // ┼ crossing wire
  }

  std::vector<std::size_t> width(ncols, 1);
  for (std::size_t c = 0; c < ncols; ++c)
    for (std::uint32_t q = 0; q < p.qubit_count; ++q)
      width[c] = std::max(width[c], detail::display_width(cell[q][c]));

  std::size_t label_w = 0;
  std::vector<std::string> labels(p.qubit_count);
  for (std::uint32_t q = 0; q < p.qubit_count; ++q) {
    labels[q] = "q[" + std::to_string(q) + "]: ";
    label_w = std::max(label_w, labels[q].size());
  }

  std::string out;
  for (std::uint32_t q = 0; q < p.qubit_count; ++q) {
    out += labels[q] + std::string(label_w - labels[q].size(), ' ');
    for (std::size_t c = 0; c < ncols; ++c) {
      out += "─";  // ─
      const std::string& body = cell[q][c];
      // Center over the wire, padding with wire segments.
      const std::size_t have = detail::display_width(body);
      const std::size_t left = (width[c] - have) / 2;
      for (std::size_t k = 0; k < left; ++k) out += "─";
      out += body;
      for (std::size_t k = 0; k < width[c] - have - left; ++k) out += "─";
    }
    out += "─\n";
  }
  return out;
}

}  // namespace qforge
