#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "qforge/circuit.hpp"
#include "qforge/dag.hpp"
#include "qforge/gates.hpp"

namespace qforge {

namespace detail {

// Fuses one gate run into blocks of at most max_fused_qubits qubits.
// Greedy over the dependency graph: among ready gates, prefer one that fits
// the open block (ties to the lowest touched qubit, then program order);
// when none fits, the block is flushed.  Gates wider than the budget pass
// through unchanged.
inline void fuse_gate_run(const std::vector<Gate>& gates, std::uint32_t nq,
                          std::uint32_t max_fused_qubits,
                          std::vector<Gate>& out) {
  Program seg(nq, 0);
  for (const auto& g : gates) seg.add(g);
  CircuitDAG dag = build_dag(seg);

  std::vector<std::size_t> indeg(dag.nodes.size());
  for (std::size_t i = 0; i < dag.nodes.size(); ++i)
    indeg[i] = dag.pred[i].size();

  // Ready set ordered by (lowest touched qubit, program index).
  auto key = [&](std::size_t v) {
    std::uint32_t mq = *std::min_element(dag.nodes[v].qubits.begin(),
                                         dag.nodes[v].qubits.end());
    return std::pair<std::uint32_t, std::size_t>(mq, v);
  };
  std::set<std::pair<std::uint32_t, std::size_t>> ready;
  for (auto r : dag.roots) ready.insert(key(r));

  std::set<std::uint32_t> block_qubits;
  std::vector<std::size_t> block_nodes;

  auto flush = [&]() {
    if (block_nodes.empty()) return;
    if (block_nodes.size() == 1) {
      out.push_back(dag.nodes[block_nodes[0]].gate());
    } else {
      // Block qubits ascending; local bit i is block qubit i, so the target
      // list (most significant first) is the descending order.
      std::vector<std::uint32_t> qs(block_qubits.begin(), block_qubits.end());
      const std::uint32_t k = static_cast<std::uint32_t>(qs.size());
      CMatrix m = CMatrix::Identity(1 << k, 1 << k);
      for (auto v : block_nodes) {
        const Gate& g = dag.nodes[v].gate();
        std::vector<std::uint32_t> bits;  // local bits, most significant first
        for (auto q : g.qubits()) {
          auto it = std::lower_bound(qs.begin(), qs.end(), q);
          bits.push_back(static_cast<std::uint32_t>(it - qs.begin()));
        }
        m = embed_on_bits(gate_matrix(g), bits, k) * m;
      }
      std::vector<std::uint32_t> targets(qs.rbegin(), qs.rend());
      out.push_back(make_custom_gate(std::move(targets), std::move(m)));
    }
    block_nodes.clear();
    block_qubits.clear();
  };

  auto fits = [&](std::size_t v) {
    std::set<std::uint32_t> u = block_qubits;
    for (auto q : dag.nodes[v].qubits) u.insert(q);
    return u.size() <= max_fused_qubits;
  };

  while (!ready.empty()) {
    // Prefer a ready gate that extends the current block.
    std::size_t chosen = static_cast<std::size_t>(-1);
    for (const auto& [mq, v] : ready) {
      if (fits(v)) {
        chosen = v;
        break;
      }
    }
    if (chosen == static_cast<std::size_t>(-1)) {
      flush();
      chosen = ready.begin()->second;
    }
    ready.erase(key(chosen));
    for (auto s : dag.succ[chosen])
      if (--indeg[s] == 0) ready.insert(key(s));

    if (dag.nodes[chosen].qubits.size() > max_fused_qubits) {
      flush();
      out.push_back(dag.nodes[chosen].gate());
      continue;
    }
    for (auto q : dag.nodes[chosen].qubits) block_qubits.insert(q);
    block_nodes.push_back(chosen);
  }
  flush();
}

}  // namespace detail

// Rewrites a flat program into equivalent multi-qubit unitary blocks.  Runs
// of gates between measurements are fused independently; measurements pass
// through.  The block count never exceeds the input gate count.
inline Program fuse_circuit(const Program& p, std::uint32_t max_fused_qubits = 3) {
  if (!p.is_flat())
    throw FlatCircuitRequired("gate fusion requires a flat program");
  if (max_fused_qubits < 1)
    throw ValidationError("max_fused_qubits must be at least 1");

  Program out(p.qubit_count, p.cbit_count);
  std::vector<Gate> run;
  auto flush_run = [&]() {
    if (run.empty()) return;
    std::vector<Gate> fused;
    detail::fuse_gate_run(run, p.qubit_count, max_fused_qubits, fused);
    for (auto& g : fused) out.add(std::move(g));
    run.clear();
  };
  for (const auto& ins : p.body) {
    if (auto* g = std::get_if<GateOp>(&ins)) {
      run.push_back(g->gate);
    } else {
      flush_run();
      out.body.push_back(ins);
    }
  }
  flush_run();
  return out;
}

}  // namespace qforge
