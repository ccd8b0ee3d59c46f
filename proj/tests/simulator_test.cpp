// End-to-end state-vector execution: sampling, classical control flow, and
// the worker-count determinism contract.

#include <gtest/gtest.h>

#include <qforge/rng.hpp>
#include <qforge/simulator.hpp>

#include "test_util.hpp"

using namespace qforge;

TEST(RngStreams, PinnedDerivations) {
  // uniform() is (next() >> 11) * 2^-53 and derive() re-seeds through
  // splitmix64; both checked against direct evaluation.
  Rng a(42);
  Rng b(42);
  const std::uint64_t raw = b.next();
  EXPECT_EQ(a.uniform(), static_cast<double>(raw >> 11) * 0x1.0p-53);

  Rng c(7);
  EXPECT_EQ(Rng::derive(7, 3).next(),
            Rng(splitmix64(7ull ^ splitmix64(3ull + 1))).next());
  EXPECT_EQ(Rng(9).below(10), Rng(9).next() % 10);
}

TEST(Run, FinalStateMatchesOracle) {
  for (std::uint64_t seed : {10u, 11u, 12u}) {
    Program p = oracle::random_circuit(4, 25, seed, true);
    auto result = run(p);
    ASSERT_TRUE(result.final_state.has_value());
    CVector want = oracle::program_state(p);
    for (std::size_t i = 0; i < result.final_state->dimension(); ++i)
      EXPECT_LT(std::abs(result.final_state->amplitude(i) -
                         want(static_cast<Eigen::Index>(i))),
                1e-11);
  }
}

TEST(Run, BellPairCountsAreCorrelated) {
  Program p(2, 2);
  p.add(GateKind::H, {0});
  p.add(GateKind::CNOT, {0, 1});
  p.measure(0, 0);
  p.measure(1, 1);

  SimOptions opts;
  opts.seed = 7;
  auto result = run(p, opts, 4000);
  std::uint64_t total = 0;
  for (auto& [key, count] : result.counts) {
    EXPECT_TRUE(key == "00" || key == "11") << key;
    total += count;
  }
  EXPECT_EQ(total, 4000u);
  EXPECT_NEAR(static_cast<double>(result.counts["00"]) / 4000.0, 0.5, 0.05);
}

TEST(Run, CountKeyPutsCbitZeroRightmost) {
  Program p(2, 2);
  p.add(GateKind::X, {0});
  p.measure(0, 0);  // c0 = 1
  p.measure(1, 1);  // c1 = 0
  auto result = run(p, {}, 10);
  ASSERT_EQ(result.counts.size(), 1u);
  EXPECT_EQ(result.counts.begin()->first, "01");
}

TEST(Run, MidCircuitMeasurementFeedsConditional) {
  // Measure |+> then apply X to qubit 1 only when the outcome was 1: the
  // classical register always reads c1 == c0.
  Program then_body(2, 2);
  then_body.add(GateKind::X, {1});

  Program p(2, 2);
  p.add(GateKind::H, {0});
  p.measure(0, 0);
  p.if_then(ClassicalExpr::cbit(0), then_body);
  p.measure(1, 1);

  SimOptions opts;
  opts.seed = 3;
  auto result = run(p, opts, 2000);
  std::uint64_t ones = 0;
  for (auto& [key, count] : result.counts) {
    EXPECT_TRUE(key == "00" || key == "11") << key;
    if (key == "11") ones += count;
  }
  EXPECT_NEAR(static_cast<double>(ones) / 2000.0, 0.5, 0.06);
}

TEST(Run, ElseBranchTaken) {
  Program then_body(1, 1), else_body(1, 1);
  then_body.add(GateKind::I, {0});
  else_body.add(GateKind::X, {0});

  Program p(1, 1);
  p.if_then(ClassicalExpr::cbit(0), then_body, else_body);  // c0 starts 0
  p.measure(0, 0);
  auto result = run(p, {}, 5);
  ASSERT_EQ(result.counts.size(), 1u);
  EXPECT_EQ(result.counts.begin()->first, "1");
}

TEST(Run, WhileLoopCountsDownViaAssignments) {
  // c1 = 3; while (c1) { X q0; c1 = c1 - 1; }  Three X gates leave q0 at 1.
  Program body(1, 2);
  body.add(GateKind::X, {0});
  body.assign(1, ClassicalExpr::binary(BinOp::Sub, ClassicalExpr::cbit(1),
                                       ClassicalExpr::constant(1)));

  Program p(1, 2);
  p.assign(1, ClassicalExpr::constant(3));
  p.while_loop(ClassicalExpr::cbit(1), body);
  p.measure(0, 0);

  auto result = run(p, {}, 3);
  ASSERT_EQ(result.counts.size(), 1u);
  EXPECT_EQ(result.counts.begin()->first, "01");  // c1 back to 0, c0 = 1
}

TEST(Run, RunawayLoopTripsGuard) {
  Program body(1, 1);
  body.add(GateKind::X, {0});
  Program p(1, 1);
  p.while_loop(ClassicalExpr::constant(1), body);

  SimOptions opts;
  opts.max_while_iterations = 50;
  EXPECT_THROW(run(p, opts, 1), NonTerminationGuard);
}

TEST(Run, ShotsIdenticalAcrossWorkerCounts) {
  Program flat = oracle::random_circuit(3, 15, 77);
  flat.cbit_count = 3;
  for (std::uint32_t q = 0; q < 3; ++q) flat.measure(q, q);

  // Mid-circuit branch variant exercises the per-shot executor path.
  Program branchy(2, 2);
  branchy.add(GateKind::H, {0});
  branchy.measure(0, 0);
  Program fix(2, 2);
  fix.add(GateKind::X, {1});
  branchy.if_then(ClassicalExpr::cbit(0), fix);
  branchy.measure(1, 1);

  for (const Program& p : {flat, branchy}) {
    SimOptions base;
    base.seed = 5;
    base.parallel_threshold = 1;  // force parallel kernels even at 3 qubits
    std::map<std::string, std::uint64_t> reference;
    for (int workers : {1, 2, 8}) {
      SimOptions opts = base;
      opts.workers = workers;
      auto counts = run(p, opts, 3000).counts;
      if (workers == 1)
        reference = counts;
      else
        EXPECT_EQ(counts, reference) << "workers " << workers;
    }
  }
}

TEST(Run, FusionDoesNotChangeTheFinalState) {
  Program p = oracle::random_circuit(5, 40, 123, true);
  SimOptions plain;
  SimOptions fused;
  fused.fusion_enabled = true;
  auto a = run(p, plain);
  auto b = run(p, fused);
  for (std::size_t i = 0; i < a.final_state->dimension(); ++i)
    EXPECT_LT(std::abs(a.final_state->amplitude(i) -
                       b.final_state->amplitude(i)),
              1e-11);
}

TEST(Run, OptionValidation) {
  Program p(1, 0);
  p.add(GateKind::H, {0});
  SimOptions opts;
  opts.parallel_threshold = 0;
  EXPECT_THROW(run(p, opts), ValidationError);
  opts = {};
  opts.max_fused_qubits = 9;
  EXPECT_THROW(run(p, opts), ValidationError);
  opts = {};
  opts.workers = -1;
  EXPECT_THROW(run(p, opts), ValidationError);
}
