#pragma once

#include <vector>

#include "qforge/circuit.hpp"
#include "qforge/error.hpp"
#include "qforge/euler.hpp"
#include "qforge/gates.hpp"

namespace qforge {

namespace detail {

// Standard 6-CNOT realization of the doubly-controlled X (controls a, b,
// target t), exact up to nothing: the product equals the 8x8 permutation.
inline void emit_toffoli_network(std::uint32_t a, std::uint32_t b,
                                 std::uint32_t t, std::vector<Gate>& out) {
  auto tdg = [&](std::uint32_t q) {
    Gate g = make_gate(GateKind::T, {q});
    g.dagger = true;
    return g;
  };
  out.push_back(make_gate(GateKind::H, {t}));
  out.push_back(make_gate(GateKind::CNOT, {b, t}));
  out.push_back(tdg(t));
  out.push_back(make_gate(GateKind::CNOT, {a, t}));
  out.push_back(make_gate(GateKind::T, {t}));
  out.push_back(make_gate(GateKind::CNOT, {b, t}));
  out.push_back(tdg(t));
  out.push_back(make_gate(GateKind::CNOT, {a, t}));
  out.push_back(make_gate(GateKind::T, {b}));
  out.push_back(make_gate(GateKind::T, {t}));
  out.push_back(make_gate(GateKind::H, {t}));
  out.push_back(make_gate(GateKind::CNOT, {a, b}));
  out.push_back(make_gate(GateKind::T, {a}));
  out.push_back(tdg(b));
  out.push_back(make_gate(GateKind::CNOT, {a, b}));
}

// Controlled-U from the ABC decomposition: with U = e^{ia} Rz(f) Ry(th) Rz(l),
//   A = Rz(f) Ry(th/2),  B = Ry(-th/2) Rz(-(f+l)/2),  C = Rz((l-f)/2)
// satisfy A B C = I and A X B X C = Rz(f) Ry(th) Rz(l), so
//   CU = (Rz(a) on control, up to phase) . A_t . CNOT . B_t . CNOT . C_t.
inline void emit_controlled_unitary(const CMatrix& u, std::uint32_t c,
                                    std::uint32_t t, std::vector<Gate>& out) {
  const ZyzResult z = zyz_decompose(u);
  const double th = z.params.theta;
  const double f = z.params.phi;
  const double l = z.params.lambda;
  const double alpha = z.global_phase + (f + l) / 2;

  auto rot = [&](GateKind k, std::uint32_t q, double angle) {
    if (wrap_to_half_period(angle, 4 * kPi) != 0.0)
      out.push_back(make_gate(k, {q}, {angle}));
  };
  // Emission in circuit order (applied left to right): C, CNOT, B, CNOT, A.
  rot(GateKind::RZ, t, (l - f) / 2);
  out.push_back(make_gate(GateKind::CNOT, {c, t}));
  rot(GateKind::RZ, t, -(f + l) / 2);
  rot(GateKind::RY, t, -th / 2);
  out.push_back(make_gate(GateKind::CNOT, {c, t}));
  rot(GateKind::RY, t, th / 2);
  rot(GateKind::RZ, t, f);
  // diag(1, e^{i alpha}) on the control is Rz(alpha) up to global phase.
  rot(GateKind::RZ, c, alpha);
}

inline void emit_multicontrol(const CMatrix& u,
                              std::span<const std::uint32_t> controls,
                              std::uint32_t t, std::vector<Gate>& out);

// X with any number of controls, preferring the named forms.
inline void emit_multicontrol_x(std::span<const std::uint32_t> controls,
                                std::uint32_t t, std::vector<Gate>& out) {
  switch (controls.size()) {
    case 0:
      out.push_back(make_gate(GateKind::X, {t}));
      return;
    case 1:
      out.push_back(make_gate(GateKind::CNOT, {controls[0], t}));
      return;
    case 2:
      emit_toffoli_network(controls[0], controls[1], t, out);
      return;
    default:
      emit_multicontrol(standard_gate_matrix(GateKind::X), controls, t, out);
      return;
  }
}

// Recursive multi-control reduction: C^k(U) with controls c_1..c_k splits as
//   CV(c_k, t) . C^{k-1}X(c_1..c_{k-1}; c_k) . CV^dag(c_k, t)
//   . C^{k-1}X(c_1..c_{k-1}; c_k) . C^{k-1}V(c_1..c_{k-1}; t),  V = sqrt(U).
inline void emit_multicontrol(const CMatrix& u,
                              std::span<const std::uint32_t> controls,
                              std::uint32_t t, std::vector<Gate>& out) {
  if (controls.empty()) {
    // Bare 1-qubit unitary: emit as a custom gate; to_basis turns it into U3.
    out.push_back(make_custom_gate({t}, u));
    return;
  }
  if (controls.size() == 1) {
    emit_controlled_unitary(u, controls[0], t, out);
    return;
  }
  const CMatrix v = unitary_sqrt_2x2(u);
  const CMatrix vd = v.adjoint();
  const std::uint32_t ck = controls.back();
  std::span<const std::uint32_t> rest = controls.subspan(0, controls.size() - 1);

  emit_controlled_unitary(v, ck, t, out);
  emit_multicontrol_x(rest, ck, out);
  emit_controlled_unitary(vd, ck, t, out);
  emit_multicontrol_x(rest, ck, out);
  emit_multicontrol(v, rest, t, out);
}

// Rewrites one gate into 1- and 2-qubit gates.
inline void decompose_gate(const Gate& g, std::vector<Gate>& out) {
  const std::size_t nc = g.controls.size();

  // Total-control normal form: base operation plus full control list.
  switch (g.kind) {
    case GateKind::I:
      out.push_back(g.controls.empty() ? g : make_gate(GateKind::I, {g.targets[0]}));
      return;
    case GateKind::X:
    case GateKind::CNOT:
    case GateKind::TOFFOLI: {
      std::vector<std::uint32_t> cs = g.controls;
      std::uint32_t t;
      if (g.kind == GateKind::X) {
        t = g.targets[0];
      } else if (g.kind == GateKind::CNOT) {
        cs.push_back(g.targets[0]);
        t = g.targets[1];
      } else {
        cs.push_back(g.targets[0]);
        cs.push_back(g.targets[1]);
        t = g.targets[2];
      }
      emit_multicontrol_x(cs, t, out);
      return;
    }
    case GateKind::Z:
    case GateKind::CZ: {
      std::vector<std::uint32_t> cs = g.controls;
      std::uint32_t t;
      if (g.kind == GateKind::Z) {
        t = g.targets[0];
      } else {
        cs.push_back(g.targets[0]);
        t = g.targets[1];
      }
      if (cs.size() <= 1) {
        out.push_back(cs.empty() ? make_gate(GateKind::Z, {t})
                                 : make_gate(GateKind::CZ, {cs[0], t}));
      } else {
        // C^k Z = H_t C^k X H_t.
        out.push_back(make_gate(GateKind::H, {t}));
        emit_multicontrol_x(cs, t, out);
        out.push_back(make_gate(GateKind::H, {t}));
      }
      return;
    }
    case GateKind::SWAP: {
      const std::uint32_t a = g.targets[0], b = g.targets[1];
      if (nc == 0) {
        out.push_back(g);
        return;
      }
      // Controlled SWAP: CNOT(b,a) . (X on b controlled by controls + a)
      // . CNOT(b,a).
      out.push_back(make_gate(GateKind::CNOT, {b, a}));
      std::vector<std::uint32_t> cs = g.controls;
      cs.push_back(a);
      emit_multicontrol_x(cs, b, out);
      out.push_back(make_gate(GateKind::CNOT, {b, a}));
      return;
    }
    case GateKind::Custom: {
      if (g.targets.size() == 1) {
        if (nc == 0) {
          out.push_back(g);
        } else if (nc == 1) {
          emit_controlled_unitary(base_matrix(g), g.controls[0], g.targets[0],
                                  out);
        } else {
          emit_multicontrol(base_matrix(g), g.controls, g.targets[0], out);
        }
        return;
      }
      if (g.targets.size() == 2 && nc == 0) {
        out.push_back(g);
        return;
      }
      throw UnsupportedError(
          "no decomposition rule for custom gates beyond 2 qubits");
    }
    default: {
      // Remaining kinds are 1-qubit (Y, H, S, T, RX, RY, RZ, U3).
      if (nc == 0) {
        out.push_back(g);
      } else if (nc == 1) {
        emit_controlled_unitary(base_matrix(g), g.controls[0], g.targets[0],
                                out);
      } else {
        emit_multicontrol(base_matrix(g), g.controls, g.targets[0], out);
      }
      return;
    }
  }
}

}  // namespace detail

// Rewrites every gate into 1- and 2-qubit gates: Toffoli through the standard
// 6-CNOT network, k-controlled gates by recursive square-root reduction,
// singly-controlled unitaries by the ABC decomposition.  Equivalent to the
// input up to global phase.
inline Program decompose_multicontrol(const Program& p) {
  if (!p.is_flat())
    throw FlatCircuitRequired("decomposition requires a flat program");
  Program out(p.qubit_count, p.cbit_count);
  for (const auto& ins : p.body) {
    if (auto* op = std::get_if<GateOp>(&ins)) {
      std::vector<Gate> gates;
      detail::decompose_gate(op->gate, gates);
      for (auto& g : gates) out.add(std::move(g));
    } else {
      out.body.push_back(ins);
    }
  }
  return out;
}

}  // namespace qforge
