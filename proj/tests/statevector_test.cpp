// Strided kernels against dense-matrix references, plus fusion and the
// parallel-path determinism contract.

#include <gtest/gtest.h>

#include <random>
#include <set>

#include <qforge/fusion.hpp>
#include <qforge/gates.hpp>
#include <qforge/statevector.hpp>

#include "test_util.hpp"

using namespace qforge;

namespace {

StateVector random_state(std::uint32_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<cdouble> amps(std::size_t(1) << n);
  double norm = 0;
  for (auto& a : amps) {
    a = cdouble(g(rng), g(rng));
    norm += std::norm(a);
  }
  for (auto& a : amps) a /= std::sqrt(norm);
  return StateVector::from_amplitudes(n, std::move(amps));
}

CVector to_eigen(const StateVector& sv) {
  CVector v(static_cast<Eigen::Index>(sv.dimension()));
  for (std::size_t i = 0; i < sv.dimension(); ++i)
    v(static_cast<Eigen::Index>(i)) = sv.amplitude(i);
  return v;
}

double apply_and_diff(const Gate& g, std::uint32_t n, std::uint64_t seed) {
  StateVector sv = random_state(n, seed);
  CVector want = oracle::gate_full(g, n) * to_eigen(sv);
  sv.apply_gate(g);
  return (to_eigen(sv) - want).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(GroupIndexer, EnumeratesEveryBasePairExactlyOnce) {
  detail::GroupIndexer ix;
  ix.add_target(1);
  ix.add_control(3);
  ix.finish();
  const std::uint32_t n = 4;
  ASSERT_EQ(ix.groups(n), 4u);  // 16 states / 2 slots / 2 (control half)
  std::set<std::size_t> seen;
  for (std::size_t gidx = 0; gidx < ix.groups(n); ++gidx) {
    std::size_t base = ix.base(gidx);
    EXPECT_EQ(base & (1u << 1), 0u);        // target slot clear
    EXPECT_NE(base & (1u << 3), 0u);        // control bit forced
    EXPECT_TRUE(seen.insert(base).second);  // no duplicates
  }
}

TEST(Kernels, EveryNamedGateMatchesDenseReference) {
  const std::uint32_t n = 4;
  std::uint64_t seed = 11;
  for (GateKind k : {GateKind::I, GateKind::X, GateKind::Y, GateKind::Z,
                     GateKind::H, GateKind::S, GateKind::T}) {
    for (std::uint32_t q = 0; q < n; ++q) {
      Gate g = make_gate(k, {q});
      EXPECT_LT(apply_and_diff(g, n, ++seed), 1e-13) << gate_name(k) << " q" << q;
      g.dagger = true;
      EXPECT_LT(apply_and_diff(g, n, ++seed), 1e-13) << gate_name(k) << "+dag";
    }
  }
  for (GateKind k : {GateKind::RX, GateKind::RY, GateKind::RZ}) {
    Gate g = make_gate(k, {2}, {1.234});
    EXPECT_LT(apply_and_diff(g, n, ++seed), 1e-13) << gate_name(k);
  }
  Gate u3 = make_gate(GateKind::U3, {1}, {0.3, -1.1, 2.5});
  EXPECT_LT(apply_and_diff(u3, n, ++seed), 1e-13);
}

TEST(Kernels, TwoAndThreeQubitGatesAllOperandOrders) {
  const std::uint32_t n = 4;
  std::uint64_t seed = 101;
  for (GateKind k : {GateKind::CNOT, GateKind::CZ, GateKind::SWAP}) {
    for (std::uint32_t a = 0; a < n; ++a)
      for (std::uint32_t b = 0; b < n; ++b) {
        if (a == b) continue;
        Gate g = make_gate(k, {a, b});
        EXPECT_LT(apply_and_diff(g, n, ++seed), 1e-13)
            << gate_name(k) << " " << a << "," << b;
      }
  }
  Gate tof = make_gate(GateKind::TOFFOLI, {3, 0, 2});
  EXPECT_LT(apply_and_diff(tof, n, ++seed), 1e-13);
}

TEST(Kernels, ControlledAndCustomGates) {
  const std::uint32_t n = 5;
  std::uint64_t seed = 202;

  Gate crx = make_gate(GateKind::RX, {0}, {0.9});
  crx.controls = {4, 2};
  EXPECT_LT(apply_and_diff(crx, n, ++seed), 1e-13);

  Gate cswap = make_gate(GateKind::SWAP, {1, 3});
  cswap.controls = {0};
  EXPECT_LT(apply_and_diff(cswap, n, ++seed), 1e-13);

  // Random 2-qubit unitary via QR of a random complex matrix.
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gau;
  CMatrix m(4, 4);
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 4; ++j) m(i, j) = cdouble(gau(rng), gau(rng));
  Eigen::HouseholderQR<CMatrix> qr(m);
  CMatrix q = qr.householderQ();
  Gate cu = make_custom_gate({3, 1}, q);
  cu.controls = {2};
  cu.dagger = true;
  EXPECT_LT(apply_and_diff(cu, n, ++seed), 1e-12);
}

TEST(Kernels, ParallelPathBitwiseEqualsSerial) {
  // Force the OpenMP path with a tiny threshold; amplitudes must be bitwise
  // identical to the serial path for several worker counts.
  const std::uint32_t n = 10;
  Program prog = oracle::random_circuit(n, 40, 99, true);

  auto run_with = [&](std::uint64_t threshold, int workers) {
    StateVector sv(n);
    KernelOptions ko{threshold, workers};
    for (const auto& ins : prog.body)
      sv.apply_gate(std::get<GateOp>(ins).gate, ko);
    return std::vector<cdouble>(sv.amplitudes().begin(),
                                sv.amplitudes().end());
  };
  auto serial = run_with(UINT64_MAX, 0);
  for (int workers : {1, 2, 8}) {
    auto par = run_with(1, workers);
    ASSERT_EQ(par.size(), serial.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
      EXPECT_EQ(serial[i].real(), par[i].real()) << i;
      EXPECT_EQ(serial[i].imag(), par[i].imag()) << i;
    }
  }
}

TEST(Kernels, ChunkedSumMatchesSerialBitwise) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::vector<double> vals(100000);
  for (auto& v : vals) v = g(rng);

  auto f = [&](std::size_t i) { return vals[i]; };
  KernelOptions serial{UINT64_MAX, 0};
  const double want = detail::chunked_sum(vals.size(), serial, f);
  for (int workers : {1, 2, 8}) {
    KernelOptions ko{1, workers};
    EXPECT_EQ(detail::chunked_sum(vals.size(), ko, f), want);
  }
}

TEST(Probabilities, MarginalsAndSingleQubit) {
  StateVector sv(2);
  sv.apply_gate(make_gate(GateKind::H, {0}));
  sv.apply_gate(make_gate(GateKind::CNOT, {0, 1}));
  EXPECT_NEAR(sv.probability_of_one(0), 0.5, 1e-12);
  EXPECT_NEAR(sv.probability_of_one(1), 0.5, 1e-12);

  std::vector<std::uint32_t> both = {0, 1};
  auto pr = sv.probabilities(both);
  ASSERT_EQ(pr.size(), 4u);
  EXPECT_NEAR(pr[0], 0.5, 1e-12);
  EXPECT_NEAR(pr[3], 0.5, 1e-12);
  EXPECT_NEAR(pr[1] + pr[2], 0.0, 1e-12);

  auto full = sv.probabilities();
  double sum = 0;
  for (double p : full) sum += p;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Collapse, MeasureCollapsesAndRenormalizes) {
  StateVector sv(2);
  sv.apply_gate(make_gate(GateKind::H, {0}));
  sv.apply_gate(make_gate(GateKind::CNOT, {0, 1}));

  StateVector low = sv;
  EXPECT_EQ(low.measure_collapse(0, 0.25), 0);  // u below P(0) = 0.5
  EXPECT_NEAR(std::abs(low.amplitude(0)), 1.0, 1e-12);

  StateVector high = sv;
  EXPECT_EQ(high.measure_collapse(0, 0.75), 1);
  EXPECT_NEAR(std::abs(high.amplitude(3)), 1.0, 1e-12);
  EXPECT_NEAR(high.norm_squared(), 1.0, 1e-12);
}

TEST(StateVectorModel, ConstructionAndValidation) {
  StateVector sv(3);
  EXPECT_EQ(sv.dimension(), 8u);
  EXPECT_EQ(sv.amplitude(0), cdouble(1));
  EXPECT_THROW(StateVector(31), ValidationError);
  EXPECT_THROW(StateVector::from_amplitudes(2, {cdouble(1)}), ValidationError);
}

TEST(Fusion, FusedCircuitPreservesStateAndShrinks) {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    Program p = oracle::random_circuit(4, 30, seed, true);
    for (std::uint32_t maxk : {2u, 3u}) {
      Program fused = fuse_circuit(p, maxk);
      EXPECT_LE(fused.gate_count(), p.gate_count());
      // Fused blocks respect the cap; only pass-through input gates (never
      // Custom in this corpus) may be wider.
      for (const auto& ins : fused.body) {
        const Gate& g = std::get<GateOp>(ins).gate;
        if (g.kind == GateKind::Custom) {
          EXPECT_LE(g.qubits().size(), maxk);
        }
      }
      CVector a = oracle::program_state(p);
      CVector b = oracle::program_state(fused);
      EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-11) << "seed " << seed;
    }
  }
}

TEST(Fusion, AdjacentSingleQubitGatesBecomeOneBlock) {
  Program p(1, 0);
  p.add(GateKind::H, {0});
  p.add(GateKind::T, {0});
  p.add(GateKind::H, {0});
  Program fused = fuse_circuit(p, 3);
  EXPECT_EQ(fused.gate_count(), 1u);
  const Gate& g = std::get<GateOp>(fused.body[0]).gate;
  EXPECT_EQ(g.kind, GateKind::Custom);
  CMatrix want = oracle::named_matrix(GateKind::H) *
                 oracle::named_matrix(GateKind::T) *
                 oracle::named_matrix(GateKind::H);
  EXPECT_LT(max_abs_diff(*g.custom, want), 1e-13);
}
