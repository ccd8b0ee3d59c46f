#pragma once

#include <set>

#include "qforge/circuit.hpp"
#include "qforge/error.hpp"
#include "qforge/euler.hpp"
#include "qforge/gates.hpp"

namespace qforge {

struct BasisSet {
  std::set<GateKind> one_qubit{GateKind::U3};
  std::set<GateKind> two_qubit{GateKind::CZ};

  static BasisSet u3_cz() { return BasisSet{}; }
  static BasisSet u3_cnot() {
    return BasisSet{{GateKind::U3}, {GateKind::CNOT}};
  }

  void validate() const {
    if (one_qubit.empty() || two_qubit.empty())
      throw ValidationError("basis set must name 1- and 2-qubit gates");
    if (!one_qubit.count(GateKind::U3))
      throw ValidationError("basis rewriting targets U3; include it");
    for (auto k : two_qubit)
      if (k != GateKind::CZ && k != GateKind::CNOT && k != GateKind::SWAP)
        throw ValidationError("2-qubit basis restricted to CZ/CNOT/SWAP");
  }
};

namespace detail {

inline Gate u3_of(const CMatrix& m, std::uint32_t q) {
  const ZyzResult z = zyz_decompose(m);
  return make_gate(GateKind::U3, {q},
                   {z.params.theta, z.params.phi, z.params.lambda});
}

inline Gate u3_h(std::uint32_t q) {
  return make_gate(GateKind::U3, {q}, {kPi / 2, 0.0, kPi});
}

inline void rewrite_to_basis(const Gate& g, const BasisSet& basis,
                             std::vector<Gate>& out) {
  // A named 1-qubit gate carrying one control is its 2-qubit counterpart.
  if (!g.controls.empty()) {
    Gate eq = g;
    if (g.kind == GateKind::X && g.controls.size() == 1) {
      eq.kind = GateKind::CNOT;
      eq.targets = {g.controls[0], g.targets[0]};
      eq.controls.clear();
      eq.dagger = false;
      rewrite_to_basis(eq, basis, out);
      return;
    }
    if (g.kind == GateKind::Z && g.controls.size() == 1) {
      eq.kind = GateKind::CZ;
      eq.targets = {g.controls[0], g.targets[0]};
      eq.controls.clear();
      eq.dagger = false;
      rewrite_to_basis(eq, basis, out);
      return;
    }
    throw UnsupportedError(
        "basis rewriting expects decomposed input (controls present on " +
        std::string(gate_name(g.kind)) + ")");
  }

  if (g.targets.size() == 1) {
    if (g.kind != GateKind::Custom && !g.dagger &&
        basis.one_qubit.count(g.kind)) {
      out.push_back(g);
      return;
    }
    out.push_back(u3_of(base_matrix(g), g.targets[0]));
    return;
  }

  // 2-qubit gates.
  if (g.kind == GateKind::Custom)
    throw UnsupportedError(
        "2-qubit custom unitary synthesis is not supported; decompose "
        "upstream");
  if (basis.two_qubit.count(g.kind)) {
    Gate kept = g;
    kept.dagger = false;  // CNOT/CZ/SWAP are self-inverse
    out.push_back(kept);
    return;
  }
  const std::uint32_t a = g.targets[0], b = g.targets[1];
  switch (g.kind) {
    case GateKind::CNOT:
      if (basis.two_qubit.count(GateKind::CZ)) {
        // CNOT = (I (x) H) CZ (I (x) H).
        out.push_back(u3_h(b));
        out.push_back(make_gate(GateKind::CZ, {a, b}));
        out.push_back(u3_h(b));
        return;
      }
      break;
    case GateKind::CZ:
      if (basis.two_qubit.count(GateKind::CNOT)) {
        // CZ = (I (x) H) CNOT (I (x) H).
        out.push_back(u3_h(b));
        out.push_back(make_gate(GateKind::CNOT, {a, b}));
        out.push_back(u3_h(b));
        return;
      }
      break;
    case GateKind::SWAP: {
      // SWAP = CNOT(a,b) CNOT(b,a) CNOT(a,b), each CNOT then rewritten.
      rewrite_to_basis(make_gate(GateKind::CNOT, {a, b}), basis, out);
      rewrite_to_basis(make_gate(GateKind::CNOT, {b, a}), basis, out);
      rewrite_to_basis(make_gate(GateKind::CNOT, {a, b}), basis, out);
      return;
    }
    default:
      break;
  }
  throw UnsupportedError(std::string("no basis rewrite from ") +
                         gate_name(g.kind) + " into the requested basis");
}

}  // namespace detail

// Rewrites every 1-qubit gate into the basis (U3 via ZYZ decomposition) and
// every named 2-qubit gate by rule.  Equivalent up to global phase.
inline Program to_basis(const Program& p, const BasisSet& basis = BasisSet::u3_cz()) {
  basis.validate();
  if (!p.is_flat())
    throw FlatCircuitRequired("basis rewriting requires a flat program");
  Program out(p.qubit_count, p.cbit_count);
  for (const auto& ins : p.body) {
    if (auto* op = std::get_if<GateOp>(&ins)) {
      if (op->gate.qubits().size() > 2)
        throw UnsupportedError(
            "basis rewriting expects 1-/2-qubit gates; run decomposition "
            "first");
      std::vector<Gate> gates;
      detail::rewrite_to_basis(op->gate, basis, gates);
      for (auto& g : gates) out.add(std::move(g));
    } else {
      out.body.push_back(ins);
    }
  }
  return out;
}

}  // namespace qforge
