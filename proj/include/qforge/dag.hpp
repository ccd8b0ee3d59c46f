#pragma once

#include <cstdint>
#include <set>
#include <variant>
#include <vector>

#include "qforge/circuit.hpp"
#include "qforge/error.hpp"

namespace qforge {

// Dependency graph node: a gate or a measurement from a flat program.
struct DagNode {
  std::variant<Gate, MeasureOp> op;
  std::size_t program_index = 0;        // position in Program::body
  std::vector<std::uint32_t> qubits;    // touched qubits, controls first

  bool is_measure() const { return std::holds_alternative<MeasureOp>(op); }
  const Gate& gate() const { return std::get<Gate>(op); }
  const MeasureOp& measure() const { return std::get<MeasureOp>(op); }
};

// Gate dependency DAG of a flat program.  Edges follow per-qubit program
// order (and per-classical-bit order between measurements, so measurement
// records are preserved by any linearization); operations on disjoint qubits
// are unordered.
struct CircuitDAG {
  std::vector<DagNode> nodes;
  std::vector<std::vector<std::size_t>> succ;
  std::vector<std::vector<std::size_t>> pred;
  std::vector<std::size_t> roots;  // in-degree 0, ascending program index
};

// Throws FlatCircuitRequired when the program contains QIf/QWhile.  Classical
// assignments are skipped: they touch no qubits.
inline CircuitDAG build_dag(const Program& p) {
  if (!p.is_flat())
    throw FlatCircuitRequired("dependency graph requires a flat program");

  CircuitDAG dag;
  std::size_t index = 0;
  for (const auto& ins : p.body) {
    if (auto* g = std::get_if<GateOp>(&ins)) {
      dag.nodes.push_back({g->gate, index, g->gate.qubits()});
    } else if (auto* m = std::get_if<MeasureOp>(&ins)) {
      dag.nodes.push_back({*m, index, {m->qubit}});
    }
    ++index;
  }

  const std::size_t n = dag.nodes.size();
  dag.succ.assign(n, {});
  dag.pred.assign(n, {});

  std::vector<std::int64_t> last_on_qubit(p.qubit_count, -1);
  std::vector<std::int64_t> last_on_cbit(p.cbit_count, -1);
  auto link = [&](std::int64_t from, std::size_t to) {
    if (from < 0) return;
    auto& s = dag.succ[static_cast<std::size_t>(from)];
    if (!s.empty() && s.back() == to) return;  // already linked via another wire
    for (auto x : s)
      if (x == to) return;
    s.push_back(to);
    dag.pred[to].push_back(static_cast<std::size_t>(from));
  };

  for (std::size_t i = 0; i < n; ++i) {
    for (auto q : dag.nodes[i].qubits) {
      link(last_on_qubit[q], i);
      last_on_qubit[q] = static_cast<std::int64_t>(i);
    }
    if (dag.nodes[i].is_measure()) {
      auto c = dag.nodes[i].measure().cbit;
      link(last_on_cbit[c], i);
      last_on_cbit[c] = static_cast<std::int64_t>(i);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (dag.pred[i].empty()) dag.roots.push_back(i);
  return dag;
}

// Deterministic topological order: repeatedly take the ready node with the
// lowest program index.
inline std::vector<std::size_t> topo_order(const CircuitDAG& dag) {
  std::vector<std::size_t> indeg(dag.nodes.size());
  for (std::size_t i = 0; i < dag.nodes.size(); ++i)
    indeg[i] = dag.pred[i].size();
  std::set<std::size_t> ready(dag.roots.begin(), dag.roots.end());
  std::vector<std::size_t> order;
  order.reserve(dag.nodes.size());
  while (!ready.empty()) {
    std::size_t v = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(v);
    for (auto s : dag.succ[v])
      if (--indeg[s] == 0) ready.insert(s);
  }
  if (order.size() != dag.nodes.size())
    throw Error("dependency graph has a cycle");
  return order;
}

// Layer of each node: longest path from any root, in node order.
inline std::vector<std::uint32_t> dag_layers(const CircuitDAG& dag) {
  std::vector<std::uint32_t> layer(dag.nodes.size(), 0);
  for (auto v : topo_order(dag))
    for (auto s : dag.succ[v])
      layer[s] = std::max(layer[s], layer[v] + 1);
  return layer;
}

// Depth of a flat program counting every gate and measurement as one step.
inline std::uint32_t circuit_depth(const Program& p) {
  CircuitDAG dag = build_dag(p);
  if (dag.nodes.empty()) return 0;
  auto layers = dag_layers(dag);
  std::uint32_t d = 0;
  for (auto l : layers) d = std::max(d, l);
  return d + 1;
}

}  // namespace qforge
