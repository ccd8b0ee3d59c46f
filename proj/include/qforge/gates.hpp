#pragma once

#include <cmath>
#include <span>

#include "qforge/circuit.hpp"
#include "qforge/error.hpp"
#include "qforge/linalg.hpp"

namespace qforge {

// Matrix of a named gate on its targets alone (no extra controls, no dagger).
// CNOT/CZ/TOFFOLI are returned with their defining controls in the high bits,
// matching the targets-are-most-significant-first operand convention.
inline CMatrix standard_gate_matrix(GateKind kind,
                                    std::span<const double> params = {}) {
  const cdouble i1(0, 1);
  auto m2 = [](cdouble a, cdouble b, cdouble c, cdouble d) {
    CMatrix m(2, 2);
    m << a, b, c, d;
    return m;
  };
  switch (kind) {
    case GateKind::I: return CMatrix::Identity(2, 2);
    case GateKind::X: return m2(0, 1, 1, 0);
    case GateKind::Y: return m2(0, -i1, i1, 0);
    case GateKind::Z: return m2(1, 0, 0, -1);
    case GateKind::H: {
      double s = 1.0 / std::sqrt(2.0);
      return m2(s, s, s, -s);
    }
    case GateKind::S: return m2(1, 0, 0, i1);
    case GateKind::T: return m2(1, 0, 0, std::exp(i1 * (kPi / 4)));
    case GateKind::RX: {
      double c = std::cos(params[0] / 2), s = std::sin(params[0] / 2);
      return m2(c, -i1 * s, -i1 * s, c);
    }
    case GateKind::RY: {
      double c = std::cos(params[0] / 2), s = std::sin(params[0] / 2);
      return m2(c, -s, s, c);
    }
    case GateKind::RZ: {
      return m2(std::exp(-i1 * (params[0] / 2)), 0, 0,
                std::exp(i1 * (params[0] / 2)));
    }
    case GateKind::U3: {
      double th = params[0], ph = params[1], la = params[2];
      double c = std::cos(th / 2), s = std::sin(th / 2);
      return m2(c, -std::exp(i1 * la) * s, std::exp(i1 * ph) * s,
                std::exp(i1 * (la + ph)) * c);
    }
    case GateKind::CNOT: {
      CMatrix m = CMatrix::Identity(4, 4);
      m(2, 2) = 0; m(3, 3) = 0; m(2, 3) = 1; m(3, 2) = 1;
      return m;
    }
    case GateKind::CZ: {
      CMatrix m = CMatrix::Identity(4, 4);
      m(3, 3) = -1;
      return m;
    }
    case GateKind::SWAP: {
      CMatrix m = CMatrix::Identity(4, 4);
      m(1, 1) = 0; m(2, 2) = 0; m(1, 2) = 1; m(2, 1) = 1;
      return m;
    }
    case GateKind::TOFFOLI: {
      CMatrix m = CMatrix::Identity(8, 8);
      m(6, 6) = 0; m(7, 7) = 0; m(6, 7) = 1; m(7, 6) = 1;
      return m;
    }
    case GateKind::Custom:
      throw Error("custom gates have no standard matrix");
  }
  throw Error("unknown gate kind");
}

// Prefixes num_controls control qubits (most significant) to a unitary:
// block-diagonal identity with u in the all-controls-one corner.
inline CMatrix controlled_expand(const CMatrix& u, std::size_t num_controls) {
  CMatrix m = u;
  for (std::size_t c = 0; c < num_controls; ++c) {
    CMatrix next = CMatrix::Identity(m.rows() * 2, m.cols() * 2);
    next.block(m.rows(), m.cols(), m.rows(), m.cols()) = m;
    m = std::move(next);
  }
  return m;
}

// Matrix on the gate's targets only; extra controls excluded, dagger applied.
inline CMatrix base_matrix(const Gate& g) {
  CMatrix m = g.kind == GateKind::Custom
                  ? *g.custom
                  : standard_gate_matrix(g.kind, g.params);
  if (g.dagger) m = m.adjoint().eval();
  return m;
}

// Full matrix over the operand list controls ++ targets (most significant
// first).
inline CMatrix gate_matrix(const Gate& g) {
  return controlled_expand(base_matrix(g), g.controls.size());
}

// Embeds an operator acting on `bits` (local bit positions, most significant
// first, within a k-bit space) into the full 2^k x 2^k space.  Works for any
// linear operator, not just unitaries.
inline CMatrix embed_on_bits(const CMatrix& u,
                             std::span<const std::uint32_t> bits,
                             std::uint32_t k) {
  const std::size_t dim = static_cast<std::size_t>(1) << k;
  const std::size_t ldim = static_cast<std::size_t>(1) << bits.size();
  if (static_cast<std::size_t>(u.rows()) != ldim)
    throw Error("embed_on_bits: matrix/operand mismatch");
  CMatrix out = CMatrix::Zero(dim, dim);
  const std::size_t nb = bits.size();
  // Local index bit b (0 = least significant) lives at space bit
  // bits[nb - 1 - b].
  std::vector<std::size_t> masks(nb);
  for (std::size_t b = 0; b < nb; ++b)
    masks[b] = static_cast<std::size_t>(1) << bits[nb - 1 - b];
  std::size_t op_mask = 0;
  for (auto m : masks) op_mask |= m;

  for (std::size_t col = 0; col < dim; ++col) {
    std::size_t rest = col & ~op_mask;
    std::size_t lc = 0;
    for (std::size_t b = 0; b < nb; ++b)
      if (col & masks[b]) lc |= static_cast<std::size_t>(1) << b;
    for (std::size_t lr = 0; lr < ldim; ++lr) {
      cdouble v = u(static_cast<Eigen::Index>(lr), static_cast<Eigen::Index>(lc));
      if (v == cdouble(0)) continue;
      std::size_t row = rest;
      for (std::size_t b = 0; b < nb; ++b)
        if (lr & (static_cast<std::size_t>(1) << b)) row |= masks[b];
      out(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) += v;
    }
  }
  return out;
}

// Full n-qubit matrix of a gate (qubit 0 = least significant index bit).
// Intended for small n; simulation uses strided kernels instead.
inline CMatrix full_matrix(const Gate& g, std::uint32_t n) {
  std::vector<std::uint32_t> ops = g.qubits();
  return embed_on_bits(gate_matrix(g), ops, n);
}

}  // namespace qforge
