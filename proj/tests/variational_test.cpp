// Pauli-string operator algebra, expectation values, parameterized circuit
// templates, and parameter-shift gradients.

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <qforge/pauli.hpp>
#include <qforge/variational.hpp>

#include "test_util.hpp"

using namespace qforge;

namespace {

// Dense form of one Pauli string built through the gate-embedding oracle:
// letters on distinct qubits commute, so their embedded product equals the
// tensor.  Independent of PauliOperator::to_matrix.
CMatrix term_dense(const PauliOperator::Term& t, std::uint32_t n) {
  const std::size_t dim = std::size_t(1) << n;
  CMatrix m = CMatrix::Identity(dim, dim);
  for (const auto& [q, letter] : t) {
    const GateKind k = letter == 'X'   ? GateKind::X
                       : letter == 'Y' ? GateKind::Y
                                       : GateKind::Z;
    m = oracle::gate_full(make_gate(k, {q}), n) * m;
  }
  return m;
}

CMatrix op_dense(const PauliOperator& H, std::uint32_t n) {
  const std::size_t dim = std::size_t(1) << n;
  CMatrix m = CMatrix::Zero(dim, dim);
  for (const auto& [t, c] : H.terms()) m += c * term_dense(t, n);
  return m;
}

PauliOperator random_pauli(std::uint32_t n, std::size_t terms,
                           std::uint64_t seed, bool hermitian) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  const char letters[] = {'X', 'Y', 'Z'};
  PauliOperator out;
  for (std::size_t k = 0; k < terms; ++k) {
    std::string word;
    for (std::uint32_t q = 0; q < n; ++q)
      if (rng() % 2) {
        word += letters[rng() % 3];
        word += std::to_string(q);
        word += ' ';
      }
    const cdouble c = hermitian ? cdouble(coeff(rng), 0)
                                : cdouble(coeff(rng), coeff(rng));
    out += PauliOperator::term(word, c);
  }
  return out;
}

}  // namespace

TEST(PauliOps, SingleQubitProductsCarryTheRightPhase) {
  const auto X0 = PauliOperator::term("X0");
  const auto Y0 = PauliOperator::term("Y0");
  const auto Z0 = PauliOperator::term("Z0");
  const cdouble i1(0, 1);

  EXPECT_TRUE(pauli_multiply(X0, Y0) == PauliOperator::term("Z0", i1));
  EXPECT_TRUE(pauli_multiply(Y0, X0) == PauliOperator::term("Z0", -i1));
  EXPECT_TRUE(pauli_multiply(Y0, Z0) == PauliOperator::term("X0", i1));
  EXPECT_TRUE(pauli_multiply(Z0, Y0) == PauliOperator::term("X0", -i1));
  EXPECT_TRUE(pauli_multiply(Z0, X0) == PauliOperator::term("Y0", i1));
  EXPECT_TRUE(pauli_multiply(X0, Z0) == PauliOperator::term("Y0", -i1));
  EXPECT_TRUE(pauli_multiply(X0, X0) == PauliOperator::identity());

  // Disjoint qubits simply concatenate.
  EXPECT_TRUE(pauli_multiply(X0, PauliOperator::term("Z1")) ==
              PauliOperator::term("X0 Z1"));
}

TEST(PauliOps, MultiplicationIsAMatrixHomomorphism) {
  const std::uint32_t n = 3;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    PauliOperator a = random_pauli(n, 4, 5100 + seed, false);
    PauliOperator b = random_pauli(n, 4, 5200 + seed, false);
    CMatrix want = op_dense(a, n) * op_dense(b, n);
    CMatrix got = op_dense(pauli_multiply(a, b), n);
    EXPECT_LT((want - got).cwiseAbs().maxCoeff(), 1e-12) << "seed " << seed;
  }
}

TEST(PauliOps, LinearCombinationAndPruning) {
  PauliOperator h = PauliOperator::term("X0", 0.5);
  h += PauliOperator::term("X0", 0.25);
  EXPECT_EQ(h.term_count(), 1u);
  EXPECT_EQ(h.terms().begin()->second, cdouble(0.75, 0));

  h -= PauliOperator::term("X0", 0.75);
  EXPECT_TRUE(h.empty());
  EXPECT_EQ(h.to_string(), "0");

  PauliOperator s = PauliOperator::identity(2.0) * cdouble(0.5, 0);
  EXPECT_TRUE(s == PauliOperator::identity());
  EXPECT_TRUE((s * cdouble(0, 0)).empty());
}

TEST(PauliOps, TermParsing) {
  // Order and case do not matter; identity letters vanish.
  EXPECT_TRUE(PauliOperator::term("Z2 X0") == PauliOperator::term("x0 z2"));
  EXPECT_TRUE(PauliOperator::term("I") == PauliOperator::identity());
  EXPECT_TRUE(PauliOperator::term("") == PauliOperator::identity());
  EXPECT_TRUE(PauliOperator::term("X3 I Z1") ==
              PauliOperator::term("Z1 X3"));

  EXPECT_THROW(PauliOperator::term("X"), ValidationError);
  EXPECT_THROW(PauliOperator::term("Q0"), ValidationError);
  EXPECT_THROW(PauliOperator::term("X0 Y0"), ValidationError);

  auto two = PauliOperator::from_terms({{"X0", 0.5}, {"Z0 Z1", -1.0}});
  EXPECT_EQ(two.term_count(), 2u);
  EXPECT_EQ(two.num_qubits(), 2u);
}

TEST(PauliOps, DenseMatrixPlacesQubitZeroLowest) {
  // X on qubit 0 of two: I (x) X in tensor order (qubit 1 is the high bit).
  CMatrix got = PauliOperator::term("X0").to_matrix(2);
  CMatrix want = CMatrix::Zero(4, 4);
  want(0, 1) = want(1, 0) = want(2, 3) = want(3, 2) = 1;
  EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-15);

  // Hand-built Z (x) X for the string X0 Z1.
  CMatrix zx = CMatrix::Zero(4, 4);
  zx(0, 1) = zx(1, 0) = 1;
  zx(2, 3) = zx(3, 2) = -1;
  EXPECT_LT((PauliOperator::term("X0 Z1").to_matrix(2) - zx)
                .cwiseAbs()
                .maxCoeff(),
            1e-15);

  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    PauliOperator h = random_pauli(3, 3, 5300 + seed, true);
    EXPECT_LT((h.to_matrix(3) - op_dense(h, 3)).cwiseAbs().maxCoeff(), 1e-13);
  }

  EXPECT_THROW(PauliOperator::term("Z3").to_matrix(2), ValidationError);
}

TEST(PauliOps, HermiticityFollowsTheCoefficients) {
  EXPECT_TRUE(random_pauli(3, 5, 42, true).is_hermitian());
  EXPECT_FALSE(PauliOperator::term("X0", cdouble(0, 1)).is_hermitian());
  EXPECT_EQ(PauliOperator::identity().num_qubits(), 0u);
  EXPECT_EQ(PauliOperator::term("Z3").num_qubits(), 4u);
}

TEST(ExpectationValue, ClosedFormStates) {
  Program zero(1, 0);
  EXPECT_NEAR(expectation(zero, PauliOperator::term("Z0")), 1.0, 1e-12);

  Program one(1, 0);
  one.add(GateKind::X, {0});
  EXPECT_NEAR(expectation(one, PauliOperator::term("Z0")), -1.0, 1e-12);

  Program plus(1, 0);
  plus.add(GateKind::H, {0});
  EXPECT_NEAR(expectation(plus, PauliOperator::term("X0")), 1.0, 1e-12);
  EXPECT_NEAR(expectation(plus, PauliOperator::term("Z0")), 0.0, 1e-12);

  Program bell(2, 0);
  bell.add(GateKind::H, {0});
  bell.add(GateKind::CNOT, {0, 1});
  EXPECT_NEAR(expectation(bell, PauliOperator::term("Z0 Z1")), 1.0, 1e-12);
  EXPECT_NEAR(expectation(bell, PauliOperator::term("X0 X1")), 1.0, 1e-12);
  EXPECT_NEAR(expectation(bell, PauliOperator::term("Z0")), 0.0, 1e-12);

  // RY(t)|0> has <Z> = cos t and <X> = sin t.
  const double t = 0.71;
  Program ry(1, 0);
  ry.add(GateKind::RY, {0}, {t});
  EXPECT_NEAR(expectation(ry, PauliOperator::term("Z0")), std::cos(t), 1e-12);
  EXPECT_NEAR(expectation(ry, PauliOperator::term("X0")), std::sin(t), 1e-12);
}

TEST(ExpectationValue, MatchesDenseQuadraticForm) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const std::uint32_t n = 4;
    Program p = oracle::random_circuit(n, 18, 6000 + seed, true);
    PauliOperator H = random_pauli(n, 5, 6100 + seed, true);
    const CVector psi = oracle::program_state(p);
    const double want = (psi.adjoint() * op_dense(H, n) * psi)(0, 0).real();
    EXPECT_NEAR(expectation(p, H), want, 1e-10) << "seed " << seed;
  }
}

TEST(ExpectationValue, RejectsBadInputs) {
  Program p(1, 1);
  p.add(GateKind::H, {0});
  EXPECT_THROW(expectation(p, PauliOperator::term("X0", cdouble(0, 1))),
               ValidationError);
  EXPECT_THROW(expectation(p, PauliOperator::term("Z1")), ValidationError);

  Program measured(1, 1);
  measured.measure(0, 0);
  EXPECT_THROW(expectation(measured, PauliOperator::term("Z0")),
               ValidationError);
}

TEST(ParamCircuitTest, BindFillsEverySlot) {
  ParamCircuit pc(2);
  pc.add(GateKind::H, {0});
  pc.add_param(GateKind::RY, 0, "a");
  pc.add(GateKind::CNOT, {0, 1});
  pc.add_param(GateKind::RZ, 1, "b");
  pc.add_param(GateKind::RY, 1, "a");  // reused name

  EXPECT_EQ(pc.parameter_names(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(pc.slot_count(), 3u);
  EXPECT_EQ(pc.slots_of("a"), (std::vector<std::size_t>{0, 2}));

  Program p = pc.bind({{"a", 0.5}, {"b", -1.5}});
  ASSERT_EQ(p.body.size(), 5u);
  EXPECT_EQ(std::get<GateOp>(p.body[1]).gate.params[0], 0.5);
  EXPECT_EQ(std::get<GateOp>(p.body[3]).gate.params[0], -1.5);
  EXPECT_EQ(std::get<GateOp>(p.body[4]).gate.params[0], 0.5);

  Program shifted = pc.bind_shifted({{"a", 0.5}, {"b", -1.5}}, 2, 0.25);
  EXPECT_EQ(std::get<GateOp>(shifted.body[1]).gate.params[0], 0.5);
  EXPECT_EQ(std::get<GateOp>(shifted.body[4]).gate.params[0], 0.75);
}

TEST(ParamCircuitTest, RejectsBadUsage) {
  ParamCircuit pc(1);
  EXPECT_THROW(pc.add_param(GateKind::H, 0, "a"), UnsupportedError);
  pc.add_param(GateKind::RX, 0, "a");
  EXPECT_THROW(pc.bind({}), ValidationError);
  EXPECT_THROW(pc.bind({{"wrong", 1.0}}), ValidationError);
  EXPECT_THROW(pc.bind_shifted({{"a", 1.0}}, 5, 0.1), std::out_of_range);
  EXPECT_TRUE(pc.slots_of("nope").empty());
}

TEST(GradientTest, AnalyticSingleRotation) {
  // <Z> of RY(t)|0> is cos t, so the gradient is -sin t.
  ParamCircuit pc(1);
  pc.add_param(GateKind::RY, 0, "t");
  const double t = 0.3;
  auto g = gradient(pc, PauliOperator::term("Z0"), {{"t", t}});
  ASSERT_EQ(g.size(), 1u);
  EXPECT_NEAR(g[0], -std::sin(t), 1e-12);
}

TEST(GradientTest, MatchesCentralFiniteDifferences) {
  // Two-qubit ansatz with a shared parameter, so the shift rule must sum
  // over occurrences.
  ParamCircuit pc(2);
  pc.add(GateKind::H, {0});
  pc.add_param(GateKind::RY, 0, "a");
  pc.add_param(GateKind::RX, 1, "b");
  pc.add(GateKind::CNOT, {0, 1});
  pc.add_param(GateKind::RZ, 1, "c");
  pc.add_param(GateKind::RY, 1, "a");
  pc.add(GateKind::CNOT, {1, 0});
  pc.add_param(GateKind::RX, 0, "b");

  PauliOperator H = PauliOperator::from_terms(
      {{"Z0", 0.75}, {"X0 X1", -0.5}, {"Z0 Z1", 0.25}, {"Y1", 0.4}});

  const std::map<std::string, double> at = {
      {"a", 0.37}, {"b", -1.1}, {"c", 2.3}};
  const auto grad = gradient(pc, H, at);
  ASSERT_EQ(grad.size(), 3u);

  const double h = 1e-5;
  std::size_t i = 0;
  for (const auto& name : pc.parameter_names()) {
    auto up = at, dn = at;
    up[name] += h;
    dn[name] -= h;
    const double fd =
        (expectation(pc.bind(up), H) - expectation(pc.bind(dn), H)) / (2 * h);
    EXPECT_NEAR(grad[i], fd, 1e-6) << name;
    ++i;
  }
}

TEST(GradientTest, ZeroForUntouchedObservable) {
  // The parameter rotates qubit 0 but the observable watches qubit 1.
  ParamCircuit pc(2);
  pc.add_param(GateKind::RX, 0, "a");
  auto g = gradient(pc, PauliOperator::term("Z1"), {{"a", 1.2}});
  ASSERT_EQ(g.size(), 1u);
  EXPECT_NEAR(g[0], 0.0, 1e-14);
}
