#pragma once

#include <cmath>

#include "qforge/circuit.hpp"
#include "qforge/error.hpp"
#include "qforge/gates.hpp"
#include "qforge/linalg.hpp"

namespace qforge {

struct U3Params {
  double theta = 0, phi = 0, lambda = 0;
};

inline CMatrix u3_matrix(const U3Params& p) {
  return standard_gate_matrix(GateKind::U3, {{p.theta, p.phi, p.lambda}});
}

// U = e^{i global_phase} * U3(theta, phi, lambda).
struct ZyzResult {
  U3Params params;
  double global_phase = 0;
};

inline double normalize_angle(double a) { return wrap_to_half_period(a, 2 * kPi); }

// ZYZ Euler decomposition of a 2x2 unitary.  theta lands in [0, pi]; phi and
// lambda are normalized to (-pi, pi]; gimbal-degenerate matrices
// (|cos(theta/2)| in {0, 1}) take the phi = 0 convention.
inline ZyzResult zyz_decompose(const CMatrix& u) {
  if (u.rows() != 2 || u.cols() != 2 || !is_unitary(u, 1e-9))
    throw ValidationError("zyz_decompose expects a 2x2 unitary");

  // Strip the determinant phase so V is special unitary.
  const cdouble det = u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0);
  const double g0 = std::arg(det) / 2;
  const CMatrix v = std::exp(cdouble(0, -g0)) * u;

  const double a00 = std::abs(v(0, 0));
  const double a10 = std::abs(v(1, 0));
  double theta = 2 * std::atan2(a10, a00);

  double phi, lambda;
  constexpr double eps = 1e-12;
  if (a10 <= eps) {
    // V = diag(v00, v11) with v11 = conj(v00): only phi + lambda matters.
    theta = 0;
    phi = 0;
    lambda = 2 * std::arg(v(1, 1));
  } else if (a00 <= eps) {
    // Anti-diagonal: only phi - lambda matters.
    theta = kPi;
    phi = 0;
    lambda = -2 * std::arg(v(1, 0));
  } else {
    phi = std::arg(v(1, 1)) + std::arg(v(1, 0));
    lambda = std::arg(v(1, 1)) - std::arg(v(1, 0));
  }

  ZyzResult r;
  r.params.theta = theta;
  r.params.phi = normalize_angle(phi);
  r.params.lambda = normalize_angle(lambda);
  // u3 = e^{i(phi+lambda)/2} Rz(phi) Ry(theta) Rz(lambda), and the special
  // unitary part equals v, so the leftover phase is g0 - (phi+lambda)/2.
  r.global_phase = g0 - (phi + lambda) / 2;

  if (max_abs_diff(std::exp(cdouble(0, r.global_phase)) * u3_matrix(r.params),
                   u) > 1e-9)
    throw Error("zyz_decompose reconstruction drifted");
  return r;
}

// Principal square root of a 2x2 unitary: U = e^{ia} R with R special
// unitary, R = cos(t) I + i sin(t) (n . sigma), and
// sqrt(U) = e^{ia/2} (cos(t/2) I + i sin(t/2) (n . sigma)).
inline CMatrix unitary_sqrt_2x2(const CMatrix& u) {
  if (u.rows() != 2 || u.cols() != 2 || !is_unitary(u, 1e-9))
    throw ValidationError("unitary_sqrt_2x2 expects a 2x2 unitary");
  const cdouble det = u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0);
  const double a = std::arg(det) / 2;
  const CMatrix r = std::exp(cdouble(0, -a)) * u;

  double cost = std::real(r(0, 0) + r(1, 1)) / 2;
  cost = std::clamp(cost, -1.0, 1.0);
  const double t = std::acos(cost);
  const double sint = std::sin(t);

  CMatrix root(2, 2);
  const cdouble i1(0, 1);
  if (sint < 1e-9) {
    if (cost > 0) {
      root = CMatrix::Identity(2, 2);  // R = I
    } else {
      // R = -I: pick sqrt(-I) = i Z.
      root = i1 * standard_gate_matrix(GateKind::Z);
    }
  } else {
    const double nx = std::imag(r(0, 1) + r(1, 0)) / (2 * sint);
    const double ny = std::real(r(0, 1) - r(1, 0)) / (2 * sint);
    const double nz = std::imag(r(0, 0) - r(1, 1)) / (2 * sint);
    const double c2 = std::cos(t / 2), s2 = std::sin(t / 2);
    root = c2 * CMatrix::Identity(2, 2) +
           i1 * s2 *
               (nx * standard_gate_matrix(GateKind::X) +
                ny * standard_gate_matrix(GateKind::Y) +
                nz * standard_gate_matrix(GateKind::Z));
  }
  CMatrix result = std::exp(cdouble(0, a / 2)) * root;
  if (max_abs_diff(result * result, u) > 1e-9)
    throw Error("unitary square root drifted");
  return result;
}

}  // namespace qforge
