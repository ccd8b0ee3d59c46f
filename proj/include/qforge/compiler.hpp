#pragma once

#include <string>
#include <vector>

#include "qforge/basis.hpp"
#include "qforge/circuit.hpp"
#include "qforge/dag.hpp"
#include "qforge/decompose.hpp"
#include "qforge/error.hpp"
#include "qforge/mapping.hpp"
#include "qforge/peephole.hpp"
#include "qforge/statevector.hpp"
#include "qforge/topology.hpp"

namespace qforge {

struct StageStats {
  std::string stage;
  std::size_t gates = 0;
  std::size_t two_qubit_gates = 0;
  std::size_t depth = 0;
};

inline std::size_t count_two_qubit(const Program& p) {
  std::size_t n = 0;
  for (const auto& ins : p.body)
    if (auto* op = std::get_if<GateOp>(&ins))
      if (op->gate.qubits().size() == 2) ++n;
  return n;
}

inline StageStats stage_stats(std::string name, const Program& p) {
  StageStats s;
  s.stage = std::move(name);
  s.gates = p.gate_count();
  s.two_qubit_gates = count_two_qubit(p);
  s.depth = circuit_depth(p);
  return s;
}

struct CompileReport {
  std::vector<StageStats> stages;  // source, decomposed, rebased, peephole,
                                   // mapped, optimized
  std::size_t swap_count = 0;
  bool verified = false;  // equivalence self-check ran and passed

  const StageStats& source() const { return find("source"); }
  const StageStats& compiled() const { return find("mapped"); }
  const StageStats& optimized() const { return find("optimized"); }

 private:
  const StageStats& find(const std::string& name) const {
    for (const auto& s : stages)
      if (s.stage == name) return s;
    throw Error("no stage named " + name + " in compile report");
  }
};

struct CompileResult {
  Program program;
  Layout initial;
  Layout final_layout;
  CompileReport report;
};

// True when every multi-qubit gate acts on a topology edge.
inline bool is_hardware_legal(const Program& p, const Topology& topo) {
  for (const auto& ins : p.body) {
    if (auto* op = std::get_if<GateOp>(&ins)) {
      const auto qs = op->gate.qubits();
      if (qs.size() > 2) return false;
      if (qs.size() == 2 && !topo.has_edge(qs[0], qs[1])) return false;
    }
  }
  return true;
}

namespace detail {

inline bool gates_only(const Program& p) {
  for (const auto& ins : p.body)
    if (!std::holds_alternative<GateOp>(ins)) return false;
  return true;
}

inline StateVector evolve_basis_state(const Program& p, std::uint32_t n,
                                      std::uint64_t x,
                                      const std::vector<std::uint32_t>& bits) {
  StateVector sv(n);
  for (std::uint32_t q = 0; q < bits.size(); ++q)
    if ((x >> q) & 1) sv.apply_gate(make_gate(GateKind::X, {bits[q]}));
  for (const auto& ins : p.body)
    sv.apply_gate(std::get<GateOp>(ins).gate);
  return sv;
}

// Checks that the mapped program acts as the source, with logical qubit q
// read in at node initial(q) and read out at node final(q), ancilla nodes
// pinned to |0>, and one overall global phase shared across all input basis
// states.
inline bool mapped_equivalent(const Program& source, const CompileResult& r,
                              double tol) {
  const std::uint32_t n = source.qubit_count;
  const std::uint32_t N = r.program.qubit_count;
  std::vector<std::uint32_t> ident(n);
  for (std::uint32_t q = 0; q < n; ++q) ident[q] = q;

  cdouble phase(0, 0);
  for (std::uint64_t x = 0; x < (1ull << n); ++x) {
    const StateVector got =
        evolve_basis_state(r.program, N, x, r.initial.phys);
    const StateVector want = evolve_basis_state(source, n, x, ident);

    // Expected mapped amplitudes: logical bit q sits at node final(q).
    std::vector<cdouble> expect(std::size_t(1) << N, cdouble(0));
    for (std::uint64_t y = 0; y < (1ull << n); ++y) {
      std::uint64_t j = 0;
      for (std::uint32_t q = 0; q < n; ++q)
        if ((y >> q) & 1) j |= (1ull << r.final_layout(q));
      expect[j] = want.amplitude(y);
    }

    if (std::abs(phase) == 0.0) {
      // Fix the phase from the largest expected amplitude.
      std::size_t ref = 0;
      double best = -1.0;
      for (std::size_t j = 0; j < expect.size(); ++j)
        if (std::abs(expect[j]) > best) {
          best = std::abs(expect[j]);
          ref = j;
        }
      if (best <= tol) continue;
      phase = got.amplitude(ref) / expect[ref];
      if (std::abs(std::abs(phase) - 1.0) > tol) return false;
    }
    for (std::size_t j = 0; j < expect.size(); ++j)
      if (std::abs(got.amplitude(j) - phase * expect[j]) > tol) return false;
  }
  return true;
}

}  // namespace detail

// Full pipeline: decompose multi-control gates, rewrite into the basis,
// optimize, map onto the topology, optimize again.  The report records gate
// count, 2-qubit gate count and depth after every stage.  On eight or fewer
// physical qubits (and a measurement-free source) the output is
// equivalence-checked against the source before returning.
inline CompileResult compile(const Program& p, const Topology& topo,
                             const BasisSet& basis = BasisSet::u3_cz()) {
  CompileResult r;
  auto& stages = r.report.stages;
  stages.push_back(stage_stats("source", p));

  Program work = decompose_multicontrol(p);
  stages.push_back(stage_stats("decomposed", work));

  work = to_basis(work, basis);
  stages.push_back(stage_stats("rebased", work));

  work = peephole(work);
  stages.push_back(stage_stats("peephole", work));

  MappingResult mapped = map_to_topology(work, topo);
  stages.push_back(stage_stats("mapped", mapped.program));
  r.initial = mapped.initial;
  r.final_layout = mapped.final_layout;
  r.report.swap_count = mapped.swap_count;

  r.program = peephole(mapped.program);
  stages.push_back(stage_stats("optimized", r.program));

  if (!is_hardware_legal(r.program, topo))
    throw Error("compiled program violates the topology; this is a bug");

  if (topo.node_count <= 8 && detail::gates_only(p)) {
    if (!detail::mapped_equivalent(p, r, 1e-8))
      throw Error("compiled program is not equivalent to its source");
    r.report.verified = true;
  }
  return r;
}

}  // namespace qforge
