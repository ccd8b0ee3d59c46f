// Kraus channel families, density-matrix evolution, trajectory sampling, and
// the noise configuration text format.

#include <gtest/gtest.h>

#include <qforge/noise.hpp>

#include "test_util.hpp"

using namespace qforge;

namespace {

// Channel matrices written out once more by hand, element by element.
std::vector<CMatrix> ref_damping(double p) {
  return {oracle::mat2(1, 0, 0, std::sqrt(1 - p)),
          oracle::mat2(0, std::sqrt(p), 0, 0)};
}

std::vector<CMatrix> ref_dephasing(double p) {
  return {oracle::mat2(std::sqrt(1 - p), 0, 0, std::sqrt(1 - p)),
          oracle::mat2(std::sqrt(p), 0, 0, -std::sqrt(p))};
}

double ops_diff(const std::vector<CMatrix>& a, const std::vector<CMatrix>& b) {
  EXPECT_EQ(a.size(), b.size());
  double d = 0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i)
    d = std::max(d, max_abs_diff(a[i], b[i]));
  return d;
}

}  // namespace

TEST(Channels, DampingMatchesClosedForm) {
  for (double p : {0.0, 0.1, 0.5, 1.0}) {
    auto ch = make_channel(ChannelFamily::Damping, p);
    EXPECT_LT(ops_diff(ch.ops, ref_damping(p)), 1e-15);
    EXPECT_LT(ch.completeness_defect(), 1e-12);
  }
}

TEST(Channels, DephasingMatchesClosedForm) {
  auto ch = make_channel(ChannelFamily::Dephasing, 0.3);
  EXPECT_LT(ops_diff(ch.ops, ref_dephasing(0.3)), 1e-15);
}

TEST(Channels, DepolarizingMatchesClosedForm) {
  const double p = 0.4;
  auto ch = make_channel(ChannelFamily::Depolarizing, p);
  const double s = std::sqrt(p) / 2;
  std::vector<CMatrix> want = {
      std::sqrt(1 - 3 * p / 4) * CMatrix::Identity(2, 2),
      s * oracle::named_matrix(GateKind::X),
      s * oracle::named_matrix(GateKind::Y),
      s * oracle::named_matrix(GateKind::Z)};
  EXPECT_LT(ops_diff(ch.ops, want), 1e-15);
}

TEST(Channels, BitPhaseFlipMatchesClosedForm) {
  const double p = 0.25;
  const cdouble i1(0, 1);
  auto ch = make_channel(ChannelFamily::BitPhaseFlip, p);
  std::vector<CMatrix> want = {
      std::sqrt(1 - p) * CMatrix::Identity(2, 2),
      oracle::mat2(0, -i1 * std::sqrt(p), i1 * std::sqrt(p), 0)};
  EXPECT_LT(ops_diff(ch.ops, want), 1e-15);
}

TEST(Channels, PhaseDampingMatchesClosedForm) {
  const double p = 0.6;
  auto ch = make_channel(ChannelFamily::PhaseDamping, p);
  std::vector<CMatrix> want = {oracle::mat2(1, 0, 0, std::sqrt(1 - p)),
                               oracle::mat2(0, 0, 0, std::sqrt(p))};
  EXPECT_LT(ops_diff(ch.ops, want), 1e-15);
}

TEST(Channels, DecoherenceIsDampingDephasingProductFamily) {
  DecoherenceParams dp{1.5, 40.0, 30.0};
  EXPECT_NEAR(dp.damping_probability(), 1 - std::exp(-1.5 / 40.0), 1e-15);
  EXPECT_NEAR(dp.dephasing_probability(),
              0.5 * (1 - std::exp(-(1.5 / 30.0 - 1.5 / 80.0))), 1e-15);

  auto ch = make_decoherence_channel(dp);
  ASSERT_EQ(ch.ops.size(), 4u);
  auto damp = ref_damping(dp.damping_probability());
  auto deph = ref_dephasing(dp.dephasing_probability());
  std::vector<CMatrix> want;
  for (const auto& kd : damp)
    for (const auto& kp : deph) want.push_back(kd * kp);
  EXPECT_LT(ops_diff(ch.ops, want), 1e-15);
  EXPECT_LT(ch.completeness_defect(), 1e-12);

  EXPECT_THROW(make_decoherence_channel({1.0, 10.0, 25.0}), ValidationError);
  EXPECT_THROW(make_channel(ChannelFamily::Decoherence, 0.1), ValidationError);
  EXPECT_THROW(make_channel(ChannelFamily::Damping, 1.5), ValidationError);
}

TEST(Channels, ValidateRejectsIncompleteSets) {
  KrausChannel broken;
  broken.ops = {oracle::mat2(0.5, 0, 0, 0.5)};
  EXPECT_THROW(broken.validate(), ValidationError);
  EXPECT_THROW(KrausChannel{}.validate(), ValidationError);
}

TEST(Density, DampingDrainsExcitedPopulation) {
  // rho = |1><1| under damping(p) goes to p|0><0| + (1-p)|1><1|.
  const double p = 0.37;
  CMatrix rho = CMatrix::Zero(2, 2);
  rho(1, 1) = 1;
  std::vector<std::uint32_t> q0 = {0};
  CMatrix out = evolve_density(rho, make_channel(ChannelFamily::Damping, p),
                               q0, 1);
  EXPECT_NEAR(std::real(out(0, 0)), p, 1e-12);
  EXPECT_NEAR(std::real(out(1, 1)), 1 - p, 1e-12);
}

TEST(Density, DephasingKillsCoherencesOnTheRightQubit) {
  // Build |+>|0> and dephase qubit 1 (the |+> one) at p = 0.5, the point
  // where rho -> (rho + Z rho Z)/2 removes off-diagonals exactly;
  // populations survive.
  CMatrix plus = oracle::mat2(0.5, 0.5, 0.5, 0.5);
  CMatrix zero = oracle::mat2(1, 0, 0, 0);
  CMatrix rho = oracle::kron2(plus, zero);  // qubit 1 is the high bit
  std::vector<std::uint32_t> q1 = {1};
  CMatrix out =
      evolve_density(rho, make_channel(ChannelFamily::Dephasing, 0.5), q1, 2);
  EXPECT_NEAR(std::real(out(0, 0)), 0.5, 1e-12);
  EXPECT_NEAR(std::real(out(2, 2)), 0.5, 1e-12);
  EXPECT_NEAR(std::abs(out(0, 2)), 0.0, 1e-12);
}

TEST(Density, InputValidation) {
  CMatrix rho = CMatrix::Identity(2, 2);  // trace 2
  std::vector<std::uint32_t> q0 = {0};
  EXPECT_THROW(
      evolve_density(rho, make_channel(ChannelFamily::Damping, 0.1), q0, 1),
      ValidationError);
}

TEST(Trajectories, FullDampingAlwaysResets) {
  NoiseModel nm;
  nm.add(GateKind::X, make_channel(ChannelFamily::Damping, 1.0));
  Program p(1, 1);
  p.add(GateKind::X, {0});
  p.measure(0, 0);
  auto result = run_noisy(p, nm, {}, 200);
  ASSERT_EQ(result.counts.size(), 1u);
  EXPECT_EQ(result.counts.begin()->first, "0");
  EXPECT_EQ(result.counts.begin()->second, 200u);
}

TEST(Trajectories, MatchDensityOracleOnSmallCircuit) {
  NoiseModel nm;
  nm.add(GateKind::H, make_channel(ChannelFamily::Depolarizing, 0.2));
  nm.add(GateKind::CNOT, make_channel(ChannelFamily::Damping, 0.15));

  Program p(2, 2);
  p.add(GateKind::H, {0});
  p.add(GateKind::CNOT, {0, 1});
  p.measure(0, 0);
  p.measure(1, 1);

  auto dist = noisy_outcome_distribution(p, nm);
  std::map<std::string, double> want;
  for (std::size_t k = 0; k < dist.size(); ++k) {
    std::string key = "00";
    if (k & 1) key[1] = '1';
    if (k & 2) key[0] = '1';
    want[key] = dist[k];
  }

  SimOptions opts;
  opts.seed = 12;
  auto counts = run_noisy(p, nm, opts, 60000).counts;
  EXPECT_LT(oracle::tv_distance(oracle::normalize_counts(counts), want),
            0.015);
}

TEST(Trajectories, PerQubitRuleRestrictionFilters) {
  // Full damping attached to H on qubit 1 only; H on qubit 0 stays clean.
  NoiseModel nm;
  nm.add(GateKind::H, make_channel(ChannelFamily::Damping, 1.0),
         std::vector<std::uint32_t>{1});
  Program p(2, 2);
  p.add(GateKind::H, {0});
  p.add(GateKind::H, {1});
  p.measure(0, 0);
  p.measure(1, 1);

  SimOptions opts;
  opts.seed = 9;
  auto counts = run_noisy(p, nm, opts, 2000).counts;
  std::uint64_t q0_ones = 0, q1_ones = 0, total = 0;
  for (auto& [key, c] : counts) {
    total += c;
    if (key[1] == '1') q0_ones += c;  // c[0] rightmost
    if (key[0] == '1') q1_ones += c;
  }
  EXPECT_EQ(q1_ones, 0u);  // damped to |0> every time
  EXPECT_NEAR(static_cast<double>(q0_ones) / static_cast<double>(total), 0.5,
              0.05);
}

TEST(Trajectories, ChannelArityMismatchIsAnError) {
  KrausChannel two_qubit;
  CMatrix id4 = CMatrix::Identity(4, 4);
  two_qubit.ops = {id4};
  NoiseModel nm;
  nm.add(GateKind::H, two_qubit);  // 2-qubit channel on a 1-qubit gate
  Program p(1, 0);
  p.add(GateKind::H, {0});
  EXPECT_THROW(run_noisy(p, nm, {}, 1), ValidationError);
}

TEST(Readout, ConfusionFlipsRecordedBits) {
  NoiseModel nm;
  nm.set_readout(0, {0.0, 0.3});  // p10 = 0.3: a true 1 reads 0 sometimes
  Program p(1, 1);
  p.add(GateKind::X, {0});
  p.measure(0, 0);

  auto dist = noisy_outcome_distribution(p, nm);
  ASSERT_EQ(dist.size(), 2u);
  EXPECT_NEAR(dist[0], 0.3, 1e-12);
  EXPECT_NEAR(dist[1], 0.7, 1e-12);

  SimOptions opts;
  opts.seed = 31;
  auto counts = run_noisy(p, nm, opts, 50000).counts;
  EXPECT_NEAR(static_cast<double>(counts["0"]) / 50000.0, 0.3, 0.02);
}

TEST(Trajectories, CountsIdenticalAcrossWorkerCounts) {
  NoiseModel nm;
  nm.add(GateKind::H, make_channel(ChannelFamily::Depolarizing, 0.1));
  Program p(2, 2);
  p.add(GateKind::H, {0});
  p.add(GateKind::CNOT, {0, 1});
  p.add(GateKind::H, {1});
  p.measure(0, 0);
  p.measure(1, 1);

  std::map<std::string, std::uint64_t> reference;
  for (int workers : {1, 2, 8}) {
    SimOptions opts;
    opts.seed = 77;
    opts.workers = workers;
    opts.parallel_threshold = 1;
    auto counts = run_noisy(p, nm, opts, 500).counts;
    if (workers == 1)
      reference = counts;
    else
      EXPECT_EQ(counts, reference);
  }
}

TEST(NoiseConfig, ParsesRulesAndReadout) {
  const std::string text =
      "# comment line\n"
      "noise damping 0.1 X H\n"
      "noise decoherence 1.0 50 30 CNOT on 0,1\n"
      "readout 2 0.01 0.02\n";
  NoiseModel nm = parse_noise_config(text);
  ASSERT_EQ(nm.rules().size(), 3u);  // damping fans out to X and H
  EXPECT_EQ(nm.rules()[0].kind, GateKind::X);
  EXPECT_EQ(nm.rules()[1].kind, GateKind::H);
  EXPECT_EQ(nm.rules()[2].kind, GateKind::CNOT);
  ASSERT_TRUE(nm.rules()[2].qubits.has_value());
  EXPECT_EQ(*nm.rules()[2].qubits, (std::vector<std::uint32_t>{0, 1}));
  ASSERT_EQ(nm.readout().size(), 1u);
  EXPECT_NEAR(nm.readout().at(2).p01, 0.01, 1e-15);
}

TEST(NoiseConfig, ReportsLineNumbers) {
  try {
    parse_noise_config("noise damping 0.1 X\nbogus line\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 2u);
  }
  EXPECT_THROW(parse_noise_config("noise mystery 0.1 X\n"), ParseError);
  EXPECT_THROW(parse_noise_config("noise damping 0.1\n"), ParseError);
}
