#pragma once

#include <cstddef>
#include <vector>

#include "qforge/circuit.hpp"
#include "qforge/error.hpp"
#include "qforge/euler.hpp"
#include "qforge/gates.hpp"
#include "qforge/linalg.hpp"

namespace qforge {

namespace detail {

inline constexpr double kPeepholeTol = 1e-12;

// Operand lists that denote the same gate instance (CZ and SWAP are symmetric
// in their operands; TOFFOLI in its two controls).
inline bool same_operands(const Gate& a, const Gate& b) {
  if (a.controls != b.controls) return false;
  if (a.targets == b.targets) return true;
  switch (a.kind) {
    case GateKind::CZ:
    case GateKind::SWAP:
      return a.targets.size() == 2 && b.targets.size() == 2 &&
             a.targets[0] == b.targets[1] && a.targets[1] == b.targets[0];
    case GateKind::TOFFOLI:
      return a.targets.size() == 3 && b.targets.size() == 3 &&
             a.targets[0] == b.targets[1] && a.targets[1] == b.targets[0] &&
             a.targets[2] == b.targets[2];
    default:
      return false;
  }
}

// True when applying b right after a yields the identity.  With extra
// controls present the product must be exactly I (a controlled global phase
// is observable), so only exact inverses qualify.
inline bool cancels(const Gate& a, const Gate& b) {
  if (a.kind != b.kind || !same_operands(a, b)) return false;
  switch (a.kind) {
    case GateKind::S:
    case GateKind::T:
      return a.dagger != b.dagger;
    case GateKind::Custom: {
      if (a.custom->rows() != b.custom->rows()) return false;
      CMatrix ma = *a.custom;
      if (a.dagger) ma = ma.adjoint().eval();
      CMatrix mb = *b.custom;
      if (b.dagger) mb = mb.adjoint().eval();
      const CMatrix prod = mb * ma;
      const CMatrix id = CMatrix::Identity(prod.rows(), prod.cols());
      if (a.controls.empty())
        return equal_up_to_global_phase(prod, id, kPeepholeTol);
      return max_abs_diff(prod, id) <= kPeepholeTol;
    }
    default:
      return gate_is_self_inverse(a.kind);
  }
}

// Signed rotation angle with the dagger folded in.
inline double rotation_angle(const Gate& g) {
  return g.dagger ? -g.params[0] : g.params[0];
}

inline bool zero_rotation(double angle) {
  return std::abs(wrap_to_half_period(angle, 4 * kPi)) <= kPeepholeTol;
}

// A gate whose action is the identity.  Plain gates may be identity up to a
// global phase; controlled gates must match I exactly.
inline bool is_identity_gate(const Gate& g) {
  switch (g.kind) {
    case GateKind::I:
      return true;
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
      return zero_rotation(rotation_angle(g));
    case GateKind::U3:
    case GateKind::Custom: {
      const CMatrix m = base_matrix(g);
      const CMatrix id = CMatrix::Identity(m.rows(), m.cols());
      if (g.controls.empty())
        return equal_up_to_global_phase(m, id, kPeepholeTol);
      return max_abs_diff(m, id) <= kPeepholeTol;
    }
    default:
      return false;
  }
}

}  // namespace detail

// Local rewrite pass, run to a fixpoint:
//   (a) adjacent self-inverse pairs on identical qubits are deleted,
//   (b) adjacent same-axis rotations on one qubit merge into a summed angle,
//   (c) rotations with angle = 0 (mod 4pi, within 1e-12) are deleted,
//   (d) adjacent uncontrolled U3 pairs merge via the matrix product,
//   (e) gates equal to the identity are deleted.
// Adjacency is judged per wire: two gates are adjacent when no intervening
// instruction touches any qubit of the earlier gate.  Gate count never
// increases; the result is unitary-equivalent up to global phase.
inline Program peephole(const Program& p) {
  if (!p.is_flat())
    throw FlatCircuitRequired("peephole optimization requires a flat program");

  std::vector<Instruction> items = p.body;
  std::vector<bool> live(items.size(), true);

  auto touched = [&](std::size_t i) -> std::vector<std::uint32_t> {
    if (auto* g = std::get_if<GateOp>(&items[i])) return g->gate.qubits();
    if (auto* m = std::get_if<MeasureOp>(&items[i])) return {m->qubit};
    return {};  // assignments touch no wires
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (!live[i]) continue;
      auto* op = std::get_if<GateOp>(&items[i]);
      if (!op) continue;
      Gate& g1 = op->gate;

      if (detail::is_identity_gate(g1)) {
        live[i] = false;
        changed = true;
        continue;
      }

      // The only pairing candidate is the first later instruction that
      // touches any of g1's qubits; it must cover all of them.
      const std::vector<std::uint32_t> q1 = g1.qubits();
      std::size_t j = items.size();
      for (std::size_t k = i + 1; k < items.size(); ++k) {
        if (!live[k]) continue;
        bool hit = false;
        for (auto q : touched(k))
          for (auto r : q1)
            if (q == r) hit = true;
        if (hit) {
          j = k;
          break;
        }
      }
      if (j == items.size()) continue;
      auto* op2 = std::get_if<GateOp>(&items[j]);
      if (!op2) continue;
      Gate& g2 = op2->gate;

      if (detail::cancels(g1, g2)) {
        live[i] = live[j] = false;
        changed = true;
        continue;
      }

      if (gate_is_rotation(g1.kind) && g2.kind == g1.kind &&
          g1.targets == g2.targets && g1.controls == g2.controls) {
        const double sum =
            detail::rotation_angle(g1) + detail::rotation_angle(g2);
        g1.params[0] = sum;
        g1.dagger = false;
        live[j] = false;
        if (detail::zero_rotation(sum)) live[i] = false;
        changed = true;
        continue;
      }

      if (g1.kind == GateKind::U3 && g2.kind == GateKind::U3 &&
          g1.targets == g2.targets && g1.controls.empty() &&
          g2.controls.empty()) {
        const CMatrix prod = base_matrix(g2) * base_matrix(g1);
        const ZyzResult z = zyz_decompose(prod);
        g1.params = {z.params.theta, z.params.phi, z.params.lambda};
        g1.dagger = false;
        live[j] = false;
        if (detail::is_identity_gate(g1)) live[i] = false;
        changed = true;
        continue;
      }
    }
  }

  Program out(p.qubit_count, p.cbit_count);
  for (std::size_t i = 0; i < items.size(); ++i)
    if (live[i]) out.body.push_back(std::move(items[i]));
  return out;
}

}  // namespace qforge
