#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "qforge/circuit.hpp"
#include "qforge/error.hpp"
#include "qforge/gates.hpp"
#include "qforge/linalg.hpp"

namespace qforge {

// Kernel tuning.  Kernels run single-threaded below parallel_threshold state
// amplitudes; workers = 0 uses the OpenMP default.  Results are bitwise
// identical for every worker count: parallel loops write disjoint amplitude
// groups and reductions accumulate fixed-size chunks in index order.
struct KernelOptions {
  std::uint64_t parallel_threshold = 1ull << 14;
  int workers = 0;
};

namespace detail {

inline int resolve_workers(int workers) {
#ifdef _OPENMP
  return workers > 0 ? workers : omp_get_max_threads();
#else
  (void)workers;
  return 1;
#endif
}

// Enumerates base indices that have zero bits at a set of reserved positions
// and forced one bits at control positions.
struct GroupIndexer {
  std::vector<std::uint32_t> slots;  // reserved bit positions, ascending
  std::size_t force_mask = 0;        // control bits, set after insertion

  void add_target(std::uint32_t q) { slots.push_back(q); }
  void add_control(std::uint32_t q) {
    slots.push_back(q);
    force_mask |= static_cast<std::size_t>(1) << q;
  }
  void finish() { std::sort(slots.begin(), slots.end()); }

  std::size_t groups(std::uint32_t n) const {
    return static_cast<std::size_t>(1) << (n - slots.size());
  }
  std::size_t base(std::size_t g) const {
    std::size_t x = g;
    for (auto pos : slots) {
      std::size_t low = x & ((static_cast<std::size_t>(1) << pos) - 1);
      x = ((x >> pos) << (pos + 1)) | low;
    }
    return x | force_mask;
  }
};

// Dense local matvec over every amplitude group.  LDIM is a compile-time
// constant so the gather, accumulate and scatter loops unroll; coefficients
// arrive planar and column-major (see apply_matrix).
template <std::size_t LDIM>
inline void dense_group_kernel(cdouble* amps, const GroupIndexer& ix,
                               const std::size_t* offset, const double* mre,
                               const double* mim, std::size_t groups, bool par,
                               const KernelOptions& ko) {
  (void)par;
  (void)ko;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (par) \
    num_threads(resolve_workers(ko.workers))
#endif
  for (long long g = 0; g < static_cast<long long>(groups); ++g) {
    const std::size_t base = ix.base(static_cast<std::size_t>(g));
    double vre[LDIM], vim[LDIM], wre[LDIM], wim[LDIM];
    for (std::size_t p = 0; p < LDIM; ++p) {
      const cdouble a = amps[base + offset[p]];
      vre[p] = a.real();
      vim[p] = a.imag();
      wre[p] = 0.0;
      wim[p] = 0.0;
    }
    for (std::size_t c = 0; c < LDIM; ++c) {
      const double xr = vre[c];
      const double xi = vim[c];
      const double* __restrict col_re = mre + c * LDIM;
      const double* __restrict col_im = mim + c * LDIM;
#ifdef _OPENMP
#pragma omp simd
#endif
      for (std::size_t r = 0; r < LDIM; ++r) {
        wre[r] += col_re[r] * xr - col_im[r] * xi;
        wim[r] += col_re[r] * xi + col_im[r] * xr;
      }
    }
    for (std::size_t p = 0; p < LDIM; ++p)
      amps[base + offset[p]] = cdouble(wre[p], wim[p]);
  }
}

// Sum of f(i) over [0, size) with a fixed chunk structure, so the result does
// not depend on how chunks are executed.
template <class F>
double chunked_sum(std::size_t size, const KernelOptions& ko, F&& f) {
  constexpr std::size_t kChunk = 1u << 12;
  const std::size_t nchunks = (size + kChunk - 1) / kChunk;
  std::vector<double> partial(nchunks, 0.0);
#ifdef _OPENMP
  const bool par = size >= ko.parallel_threshold && nchunks > 1;
#pragma omp parallel for schedule(static) if (par) \
    num_threads(resolve_workers(ko.workers))
#endif
  for (long long c = 0; c < static_cast<long long>(nchunks); ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * kChunk;
    const std::size_t hi = std::min(size, lo + kChunk);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += f(i);
    partial[static_cast<std::size_t>(c)] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

}  // namespace detail

class StateVector {
 public:
  explicit StateVector(std::uint32_t num_qubits) : n_(num_qubits) {
    if (num_qubits > 30)
      throw ValidationError("state vector limited to 30 qubits");
    amps_.assign(static_cast<std::size_t>(1) << n_, cdouble(0));
    amps_[0] = cdouble(1);
  }

  static StateVector from_amplitudes(std::uint32_t n,
                                     std::vector<cdouble> amps) {
    StateVector sv(n);
    if (amps.size() != sv.dimension())
      throw ValidationError("amplitude count does not match qubit count");
    sv.amps_ = std::move(amps);
    return sv;
  }

  std::uint32_t num_qubits() const { return n_; }
  std::size_t dimension() const { return amps_.size(); }
  std::span<const cdouble> amplitudes() const { return amps_; }
  std::span<cdouble> mutable_amplitudes() { return amps_; }
  cdouble amplitude(std::size_t i) const { return amps_[i]; }

  double norm_squared(const KernelOptions& ko = {}) const {
    return detail::chunked_sum(amps_.size(), ko, [&](std::size_t i) {
      return std::norm(amps_[i]);
    });
  }

  void scale(cdouble f) {
    for (auto& a : amps_) a *= f;
  }

  // --- gate application -----------------------------------------------------

  void apply_gate(const Gate& g, const KernelOptions& ko = {});

  // General dense application of an operator on targets (most significant
  // first) with optional extra controls.  The matrix need not be unitary;
  // measurement projectors and Kraus operators reuse this path.
  void apply_matrix(std::span<const std::uint32_t> targets, const CMatrix& m,
                    std::span<const std::uint32_t> controls = {},
                    const KernelOptions& ko = {});

  // --- measurement ----------------------------------------------------------

  double probability_of_one(std::uint32_t q, const KernelOptions& ko = {}) const {
    const std::size_t bit = static_cast<std::size_t>(1) << q;
    return detail::chunked_sum(amps_.size(), ko, [&](std::size_t i) {
      return (i & bit) ? std::norm(amps_[i]) : 0.0;
    });
  }

  // Outcome probabilities of a qubit subset: result index bit i corresponds
  // to qubits[i].
  std::vector<double> probabilities(std::span<const std::uint32_t> qubits,
                                    const KernelOptions& ko = {}) const {
    if (qubits.empty())
      throw ValidationError("probabilities: empty qubit subset");
    for (auto q : qubits)
      if (q >= n_) throw ValidationError("probabilities: qubit out of range");
    std::vector<double> out(static_cast<std::size_t>(1) << qubits.size(), 0.0);
    (void)ko;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
      double p = std::norm(amps_[i]);
      if (p == 0.0) continue;
      std::size_t key = 0;
      for (std::size_t b = 0; b < qubits.size(); ++b)
        if (i & (static_cast<std::size_t>(1) << qubits[b]))
          key |= static_cast<std::size_t>(1) << b;
      out[key] += p;
    }
    return out;
  }

  std::vector<double> probabilities(const KernelOptions& ko = {}) const {
    (void)ko;
    std::vector<double> out(amps_.size());
    for (std::size_t i = 0; i < amps_.size(); ++i) out[i] = std::norm(amps_[i]);
    return out;
  }

  // Collapses qubit q.  The outcome is 0 when u < P(outcome 0), else 1; the
  // state is renormalized.  u must come from a uniform [0,1) draw.
  int measure_collapse(std::uint32_t q, double u, const KernelOptions& ko = {}) {
    double p1 = probability_of_one(q, ko);
    double p0 = 1.0 - p1;
    int outcome = (u < p0) ? 0 : 1;
    collapse(q, outcome, outcome ? p1 : p0, ko);
    return outcome;
  }

  // Forces qubit q to a known outcome with known probability.
  void collapse(std::uint32_t q, int outcome, double prob,
                const KernelOptions& ko = {}) {
    if (prob <= 0.0)
      throw Error("collapse onto a zero-probability outcome");
    const double inv = 1.0 / std::sqrt(prob);
    const std::size_t bit = static_cast<std::size_t>(1) << q;
    const std::size_t size = amps_.size();
#ifdef _OPENMP
    const bool par = size >= ko.parallel_threshold;
#pragma omp parallel for schedule(static) if (par) \
    num_threads(detail::resolve_workers(ko.workers))
#endif
    for (long long i = 0; i < static_cast<long long>(size); ++i) {
      const bool one = (static_cast<std::size_t>(i) & bit) != 0;
      if (one == (outcome == 1))
        amps_[static_cast<std::size_t>(i)] *= inv;
      else
        amps_[static_cast<std::size_t>(i)] = cdouble(0);
    }
  }

 private:
  std::uint32_t n_;
  std::vector<cdouble> amps_;

  void apply_1q(std::uint32_t q, const std::array<cdouble, 4>& m,
                std::span<const std::uint32_t> controls,
                const KernelOptions& ko);
  void apply_diag_1q(std::uint32_t q, cdouble d0, cdouble d1,
                     std::span<const std::uint32_t> controls,
                     const KernelOptions& ko);
  void apply_flip(std::uint32_t q, std::span<const std::uint32_t> controls,
                  const KernelOptions& ko);
  void apply_swap2(std::uint32_t a, std::uint32_t b,
                   std::span<const std::uint32_t> controls,
                   const KernelOptions& ko);
};

// --- kernel implementations -------------------------------------------------

inline void StateVector::apply_1q(std::uint32_t q,
                                  const std::array<cdouble, 4>& m,
                                  std::span<const std::uint32_t> controls,
                                  const KernelOptions& ko) {
  detail::GroupIndexer ix;
  ix.add_target(q);
  for (auto c : controls) ix.add_control(c);
  ix.finish();
  const std::size_t bit = static_cast<std::size_t>(1) << q;
  const std::size_t groups = ix.groups(n_);
#ifdef _OPENMP
  const bool par = amps_.size() >= ko.parallel_threshold;
#pragma omp parallel for schedule(static) if (par) \
    num_threads(detail::resolve_workers(ko.workers))
#endif
  for (long long g = 0; g < static_cast<long long>(groups); ++g) {
    const std::size_t i0 = ix.base(static_cast<std::size_t>(g));
    const std::size_t i1 = i0 | bit;
    const cdouble a = amps_[i0], b = amps_[i1];
    amps_[i0] = m[0] * a + m[1] * b;
    amps_[i1] = m[2] * a + m[3] * b;
  }
}

inline void StateVector::apply_diag_1q(std::uint32_t q, cdouble d0, cdouble d1,
                                       std::span<const std::uint32_t> controls,
                                       const KernelOptions& ko) {
  detail::GroupIndexer ix;
  const bool skip_zero = (d0 == cdouble(1));
  if (skip_zero)
    ix.add_control(q);  // only amplitudes with the bit set change
  else
    ix.add_target(q);
  for (auto c : controls) ix.add_control(c);
  ix.finish();
  const std::size_t bit = static_cast<std::size_t>(1) << q;
  const std::size_t groups = ix.groups(n_);
#ifdef _OPENMP
  const bool par = amps_.size() >= ko.parallel_threshold;
#pragma omp parallel for schedule(static) if (par) \
    num_threads(detail::resolve_workers(ko.workers))
#endif
  for (long long g = 0; g < static_cast<long long>(groups); ++g) {
    const std::size_t i0 = ix.base(static_cast<std::size_t>(g));
    if (skip_zero) {
      amps_[i0] *= d1;
    } else {
      amps_[i0] *= d0;
      amps_[i0 | bit] *= d1;
    }
  }
}

inline void StateVector::apply_flip(std::uint32_t q,
                                    std::span<const std::uint32_t> controls,
                                    const KernelOptions& ko) {
  detail::GroupIndexer ix;
  ix.add_target(q);
  for (auto c : controls) ix.add_control(c);
  ix.finish();
  const std::size_t bit = static_cast<std::size_t>(1) << q;
  const std::size_t groups = ix.groups(n_);
#ifdef _OPENMP
  const bool par = amps_.size() >= ko.parallel_threshold;
#pragma omp parallel for schedule(static) if (par) \
    num_threads(detail::resolve_workers(ko.workers))
#endif
  for (long long g = 0; g < static_cast<long long>(groups); ++g) {
    const std::size_t i0 = ix.base(static_cast<std::size_t>(g));
    std::swap(amps_[i0], amps_[i0 | bit]);
  }
}

inline void StateVector::apply_swap2(std::uint32_t a, std::uint32_t b,
                                     std::span<const std::uint32_t> controls,
                                     const KernelOptions& ko) {
  detail::GroupIndexer ix;
  ix.add_target(a);
  ix.add_target(b);
  for (auto c : controls) ix.add_control(c);
  ix.finish();
  const std::size_t ba = static_cast<std::size_t>(1) << a;
  const std::size_t bb = static_cast<std::size_t>(1) << b;
  const std::size_t groups = ix.groups(n_);
#ifdef _OPENMP
  const bool par = amps_.size() >= ko.parallel_threshold;
#pragma omp parallel for schedule(static) if (par) \
    num_threads(detail::resolve_workers(ko.workers))
#endif
  for (long long g = 0; g < static_cast<long long>(groups); ++g) {
    const std::size_t base = ix.base(static_cast<std::size_t>(g));
    std::swap(amps_[base | ba], amps_[base | bb]);
  }
}

inline void StateVector::apply_matrix(std::span<const std::uint32_t> targets,
                                      const CMatrix& m,
                                      std::span<const std::uint32_t> controls,
                                      const KernelOptions& ko) {
  const std::size_t k = targets.size();
  if (k + controls.size() > n_)
    throw ValidationError("apply_matrix: too many operands");
  const std::size_t ldim = static_cast<std::size_t>(1) << k;
  if (static_cast<std::size_t>(m.rows()) != ldim ||
      static_cast<std::size_t>(m.cols()) != ldim)
    throw ValidationError("apply_matrix: matrix does not match target count");

  if (k == 1) {
    apply_1q(targets[0], {m(0, 0), m(0, 1), m(1, 0), m(1, 1)}, controls, ko);
    return;
  }

  detail::GroupIndexer ix;
  for (auto t : targets) ix.add_target(t);
  for (auto c : controls) ix.add_control(c);
  ix.finish();

  // Local bit b of the k-qubit pattern lives at state bit targets[k - 1 - b].
  std::vector<std::size_t> offset(ldim, 0);
  for (std::size_t p = 0; p < ldim; ++p)
    for (std::size_t b = 0; b < k; ++b)
      if (p & (static_cast<std::size_t>(1) << b))
        offset[p] |= static_cast<std::size_t>(1) << targets[k - 1 - b];

  // Planar column-major coefficients: the accumulation below updates all
  // output rows independently per input column, so there is no serial
  // complex-multiply chain and the row loop vectorizes.
  std::vector<double> mre(ldim * ldim), mim(ldim * ldim);
  for (std::size_t c = 0; c < ldim; ++c)
    for (std::size_t r = 0; r < ldim; ++r) {
      const cdouble e = m(static_cast<Eigen::Index>(r),
                          static_cast<Eigen::Index>(c));
      mre[c * ldim + r] = e.real();
      mim[c * ldim + r] = e.imag();
    }

  const std::size_t groups = ix.groups(n_);
#ifdef _OPENMP
  const bool par = amps_.size() >= ko.parallel_threshold;
#else
  const bool par = false;
#endif
  switch (k) {
    case 2:
      detail::dense_group_kernel<4>(amps_.data(), ix, offset.data(),
                                    mre.data(), mim.data(), groups, par, ko);
      return;
    case 3:
      detail::dense_group_kernel<8>(amps_.data(), ix, offset.data(),
                                    mre.data(), mim.data(), groups, par, ko);
      return;
    case 4:
      detail::dense_group_kernel<16>(amps_.data(), ix, offset.data(),
                                     mre.data(), mim.data(), groups, par, ko);
      return;
    case 5:
      detail::dense_group_kernel<32>(amps_.data(), ix, offset.data(),
                                     mre.data(), mim.data(), groups, par, ko);
      return;
    case 6:
      detail::dense_group_kernel<64>(amps_.data(), ix, offset.data(),
                                     mre.data(), mim.data(), groups, par, ko);
      return;
    default:
      break;
  }

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (par) \
    num_threads(detail::resolve_workers(ko.workers))
#endif
  for (long long g = 0; g < static_cast<long long>(groups); ++g) {
    const std::size_t base = ix.base(static_cast<std::size_t>(g));
    std::vector<double> heap(4 * ldim);
    double* vre = heap.data();
    double* vim = vre + ldim;
    double* wre = vim + ldim;
    double* wim = wre + ldim;
    for (std::size_t p = 0; p < ldim; ++p) {
      const cdouble a = amps_[base + offset[p]];
      vre[p] = a.real();
      vim[p] = a.imag();
    }
    for (std::size_t c = 0; c < ldim; ++c) {
      const double xr = vre[c];
      const double xi = vim[c];
      const double* __restrict col_re = &mre[c * ldim];
      const double* __restrict col_im = &mim[c * ldim];
#ifdef _OPENMP
#pragma omp simd
#endif
      for (std::size_t r = 0; r < ldim; ++r) {
        wre[r] += col_re[r] * xr - col_im[r] * xi;
        wim[r] += col_re[r] * xi + col_im[r] * xr;
      }
    }
    for (std::size_t p = 0; p < ldim; ++p)
      amps_[base + offset[p]] = cdouble(wre[p], wim[p]);
  }
}

inline void StateVector::apply_gate(const Gate& g, const KernelOptions& ko) {
  const cdouble i1(0, 1);
  auto with_extra = [&](std::initializer_list<std::uint32_t> defining) {
    std::vector<std::uint32_t> cs(g.controls);
    cs.insert(cs.end(), defining.begin(), defining.end());
    return cs;
  };
  switch (g.kind) {
    case GateKind::I:
      return;
    case GateKind::X:
      apply_flip(g.targets[0], g.controls, ko);
      return;
    case GateKind::CNOT: {
      auto cs = with_extra({g.targets[0]});
      apply_flip(g.targets[1], cs, ko);
      return;
    }
    case GateKind::TOFFOLI: {
      auto cs = with_extra({g.targets[0], g.targets[1]});
      apply_flip(g.targets[2], cs, ko);
      return;
    }
    case GateKind::Z:
      apply_diag_1q(g.targets[0], 1, -1, g.controls, ko);
      return;
    case GateKind::CZ: {
      auto cs = with_extra({g.targets[0]});
      apply_diag_1q(g.targets[1], 1, -1, cs, ko);
      return;
    }
    case GateKind::S:
      apply_diag_1q(g.targets[0], 1, g.dagger ? -i1 : i1, g.controls, ko);
      return;
    case GateKind::T: {
      cdouble d = std::exp(i1 * (kPi / 4));
      apply_diag_1q(g.targets[0], 1, g.dagger ? std::conj(d) : d, g.controls,
                    ko);
      return;
    }
    case GateKind::RZ: {
      double th = g.dagger ? -g.params[0] : g.params[0];
      apply_diag_1q(g.targets[0], std::exp(-i1 * (th / 2)),
                    std::exp(i1 * (th / 2)), g.controls, ko);
      return;
    }
    case GateKind::SWAP:
      apply_swap2(g.targets[0], g.targets[1], g.controls, ko);
      return;
    case GateKind::Y:
    case GateKind::H:
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::U3: {
      CMatrix m = base_matrix(g);
      apply_1q(g.targets[0], {m(0, 0), m(0, 1), m(1, 0), m(1, 1)}, g.controls,
               ko);
      return;
    }
    case GateKind::Custom: {
      if (!g.custom) throw ValidationError("custom gate has no matrix");
      if (!is_unitary(*g.custom, 1e-10))
        throw ValidationError("custom matrix is not unitary within 1e-10");
      CMatrix m = base_matrix(g);
      apply_matrix(g.targets, m, g.controls, ko);
      return;
    }
  }
  throw Error("unknown gate kind");
}

// Cumulative-probability sampler over basis states.  Built once per state;
// each draw is a binary search, so repeated sampling is cheap.
class BasisSampler {
 public:
  explicit BasisSampler(const StateVector& sv) : cum_(sv.dimension()) {
    double acc = 0.0;
    auto amps = sv.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
      acc += std::norm(amps[i]);
      cum_[i] = acc;
    }
    total_ = acc;
  }

  std::size_t sample(double u) const {
    const double target = u * total_;
    std::size_t lo = 0, hi = cum_.size() - 1;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (cum_[mid] > target)
        hi = mid;
      else
        lo = mid + 1;
    }
    return lo;
  }

 private:
  std::vector<double> cum_;
  double total_;
};

}  // namespace qforge
