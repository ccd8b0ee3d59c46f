#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>

namespace qforge {

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kPi = std::numbers::pi;

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline double max_abs_diff(const CMatrix& a, const CMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline bool is_unitary(const CMatrix& m, double tol = 1e-10) {
  if (m.rows() != m.cols()) return false;
  CMatrix id = CMatrix::Identity(m.rows(), m.cols());
  return max_abs_diff(m.adjoint() * m, id) <= tol;
}

// True when a == e^{i phi} b for some real phi.
inline bool equal_up_to_global_phase(const CMatrix& a, const CMatrix& b,
                                     double tol = 1e-10) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  // Pick the largest entry of b as phase reference.
  Eigen::Index ri = 0, ci = 0;
  double best = -1;
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j)
      if (std::abs(b(i, j)) > best) best = std::abs(b(i, j)), ri = i, ci = j;
  if (best <= tol) return max_abs_diff(a, b) <= tol;
  if (std::abs(a(ri, ci)) <= tol) return false;
  cdouble phase = a(ri, ci) / b(ri, ci);
  phase /= std::abs(phase);
  return max_abs_diff(a, phase * b) <= tol;
}

// Reduces an angle to (-period/2, period/2].
inline double wrap_to_half_period(double a, double period) {
  double r = std::remainder(a, period);
  if (r == -period / 2) r = period / 2;
  return r;
}

}  // namespace qforge
