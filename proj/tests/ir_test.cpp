// Text program format: emit/parse round-trips, parse diagnostics, exchange
// format emitters, and the console circuit drawer.

#include <gtest/gtest.h>

#include <array>
#include <bit>
#include <numbers>

#include <qforge/draw.hpp>
#include <qforge/export.hpp>
#include <qforge/ir.hpp>

#include "test_util.hpp"

using namespace qforge;

namespace {

// Deep round-trip: parse(emit(p)) must reproduce p exactly, and re-emitting
// must reproduce the text (emission is canonical).
void expect_round_trip(const Program& p) {
  const std::string text = emit_ir(p);
  Program back = parse_ir(text);
  EXPECT_TRUE(back == p) << text;
  EXPECT_EQ(emit_ir(back), text);
}

ParseError capture(const std::string& text) {
  try {
    parse_ir(text);
  } catch (const ParseError& e) {
    return e;
  }
  throw std::runtime_error("expected ParseError on:\n" + text);
}

}  // namespace

TEST(IrEmit, HeadersComeFirst) {
  Program p(3, 2);
  p.add(GateKind::H, {0});
  const std::string text = emit_ir(p);
  EXPECT_EQ(text.rfind("QINIT 3\nCREG 2\nH q[0]\n", 0), 0u);
}

TEST(IrEmit, GateSyntaxShapes) {
  Program p(4, 0);
  p.add(GateKind::RZ, {2}, {0.5});
  p.add(GateKind::U3, {0}, {0.25, 0.5, 0.75});
  p.add(GateKind::CNOT, {1, 3});
  Gate sdg = make_gate(GateKind::S, {1});
  sdg.dagger = true;
  p.add(sdg);
  Gate cx = make_gate(GateKind::X, {0});
  cx.controls = {3};
  p.add(cx);

  const std::string text = emit_ir(p);
  EXPECT_NE(text.find("RZ q[2],(0.5)\n"), std::string::npos);
  EXPECT_NE(text.find("U3 q[0],(0.25,0.5,0.75)\n"), std::string::npos);
  EXPECT_NE(text.find("CNOT q[1],q[3]\n"), std::string::npos);
  EXPECT_NE(text.find("DAGGER\nS q[1]\nENDDAGGER\n"), std::string::npos);
  EXPECT_NE(text.find("CONTROL q[3]\nX q[0]\nENDCONTROL\n"),
            std::string::npos);
}

TEST(IrRoundTrip, EveryNamedGate) {
  Program p(4, 0);
  for (auto kind :
       {GateKind::I, GateKind::X, GateKind::Y, GateKind::Z, GateKind::H,
        GateKind::S, GateKind::T}) {
    p.add(kind, {1});
    Gate dg = make_gate(kind, {2});
    dg.dagger = true;
    p.add(dg);
  }
  p.add(GateKind::RX, {0}, {1.0});
  p.add(GateKind::RY, {1}, {-2.5});
  p.add(GateKind::RZ, {2}, {1e-17});
  p.add(GateKind::U3, {3}, {0.1, 0.2, 0.3});
  p.add(GateKind::CNOT, {0, 1});
  p.add(GateKind::CZ, {2, 3});
  p.add(GateKind::SWAP, {1, 2});
  p.add(GateKind::TOFFOLI, {0, 1, 3});
  expect_round_trip(p);
}

TEST(IrRoundTrip, AnglesAreBitExact) {
  // 17 significant digits reproduce any double exactly.
  const std::array<double, 6> angles = {
      std::numbers::pi, 1.0 / 3.0, 0x1.fffffffffffffp-1, 1e-300, -0.0, 2e19};
  Program p(1, 0);
  for (double a : angles) p.add(GateKind::RZ, {0}, {a});
  Program back = parse_ir(emit_ir(p));
  for (std::size_t i = 0; i < angles.size(); ++i) {
    const double got = std::get<GateOp>(back.body[i]).gate.params[0];
    EXPECT_EQ(std::bit_cast<std::uint64_t>(got),
              std::bit_cast<std::uint64_t>(angles[i]))
        << angles[i];
  }
}

TEST(IrRoundTrip, ModifiersNestAndStack) {
  Program p(5, 0);
  Gate g = make_gate(GateKind::RY, {4}, {0.25});
  g.controls = {0, 2};
  g.dagger = true;
  p.add(g);
  expect_round_trip(p);

  // Emission order: CONTROL lines outermost, DAGGER inside.
  const std::string text = emit_ir(p);
  EXPECT_NE(
      text.find("CONTROL q[0]\nCONTROL q[2]\nDAGGER\nRY q[4],(0.25)\n"
                "ENDDAGGER\nENDCONTROL\nENDCONTROL\n"),
      std::string::npos);
}

TEST(IrRoundTrip, CustomMatrixEntries) {
  CMatrix u = CMatrix::Zero(4, 4);
  u(0, 0) = cdouble(1.0 / 3.0, -2.0 / 3.0);
  u(0, 1) = cdouble(2.0 / 3.0, 0);
  u(1, 0) = cdouble(-2.0 / 3.0, 0);
  u(1, 1) = cdouble(1.0 / 3.0, 2.0 / 3.0);
  u(2, 3) = cdouble(0, 1);
  u(3, 2) = 1;
  Gate g;
  g.kind = GateKind::Custom;
  g.targets = {2, 0};
  g.custom = std::make_shared<const CMatrix>(std::move(u));
  Program p(3, 0);
  p.add(g);
  expect_round_trip(p);

  Program back = parse_ir(emit_ir(p));
  const auto& m = *std::get<GateOp>(back.body[0]).gate.custom;
  EXPECT_EQ(m(0, 0), cdouble(1.0 / 3.0, -2.0 / 3.0));
  EXPECT_EQ(m(3, 2), cdouble(1, 0));
}

TEST(IrRoundTrip, ControlFlowAndClassical) {
  Program inner(2, 3);
  inner.add(GateKind::X, {1});
  inner.assign(2, ClassicalExpr::binary(BinOp::Sub, ClassicalExpr::cbit(2),
                                        ClassicalExpr::constant(1)));

  Program then_b(2, 3);
  then_b.add(GateKind::Z, {0});
  then_b.while_loop(ClassicalExpr::binary(BinOp::Gt, ClassicalExpr::cbit(2),
                                          ClassicalExpr::constant(0)),
                    inner);
  Program else_b(2, 3);
  else_b.add(GateKind::H, {0});
  else_b.measure(0, 1);

  Program p(2, 3);
  p.measure(0, 0);
  p.assign(2, ClassicalExpr::constant(3));
  p.if_then(ClassicalExpr::binary(
                BinOp::And,
                ClassicalExpr::binary(BinOp::Eq, ClassicalExpr::cbit(0),
                                      ClassicalExpr::constant(1)),
                ClassicalExpr::binary(BinOp::Lt, ClassicalExpr::cbit(2),
                                      ClassicalExpr::constant(7))),
            then_b, else_b);
  expect_round_trip(p);
}

TEST(IrRoundTrip, ManyRandomCircuits) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Program p = oracle::random_circuit(5, 20, 31000 + seed, true);
    expect_round_trip(p);
  }
}

TEST(IrParse, CommentsBlanksAndWhitespace) {
  Program p = parse_ir(
      "# header comment\n"
      "QINIT 2   # registers\n"
      "CREG 1\n"
      "\n"
      "   H q[0]\n"
      "\tCNOT q[0] , q[1]\n"
      "MEASURE q[1] , c[0]  # read out\n");
  EXPECT_EQ(p.qubit_count, 2u);
  EXPECT_EQ(p.cbit_count, 1u);
  ASSERT_EQ(p.body.size(), 3u);
  EXPECT_EQ(std::get<GateOp>(p.body[1]).gate.targets,
            (std::vector<std::uint32_t>{0, 1}));
  EXPECT_EQ(std::get<MeasureOp>(p.body[2]).qubit, 1u);
}

TEST(IrParse, CregDefaultsToZero) {
  Program p = parse_ir("QINIT 1\nX q[0]\n");
  EXPECT_EQ(p.cbit_count, 0u);
}

TEST(IrParse, DaggerBlockReversesItsBody) {
  Program p = parse_ir(
      "QINIT 1\n"
      "DAGGER\n"
      "S q[0]\n"
      "T q[0]\n"
      "ENDDAGGER\n");
  ASSERT_EQ(p.body.size(), 2u);
  const Gate& first = std::get<GateOp>(p.body[0]).gate;
  const Gate& second = std::get<GateOp>(p.body[1]).gate;
  EXPECT_EQ(first.kind, GateKind::T);
  EXPECT_TRUE(first.dagger);
  EXPECT_EQ(second.kind, GateKind::S);
  EXPECT_TRUE(second.dagger);
}

TEST(IrParse, DoubleDaggerCancels) {
  Program p = parse_ir(
      "QINIT 1\n"
      "DAGGER\nDAGGER\nT q[0]\nENDDAGGER\nENDDAGGER\n");
  EXPECT_FALSE(std::get<GateOp>(p.body[0]).gate.dagger);
}

TEST(IrParse, ControlBlockPrependsControls) {
  Program p = parse_ir(
      "QINIT 3\n"
      "CONTROL q[2]\n"
      "CONTROL q[1]\n"
      "X q[0]\n"
      "ENDCONTROL\n"
      "ENDCONTROL\n");
  const Gate& g = std::get<GateOp>(p.body[0]).gate;
  EXPECT_EQ(g.controls, (std::vector<std::uint32_t>{2, 1}));
}

TEST(IrParse, ExpressionPrecedence) {
  auto eval = [](const std::string& expr_text,
                 std::vector<std::int64_t> cbits) {
    Program p = parse_ir("QINIT 1\nCREG 8\nc[0] = " + expr_text + "\n");
    const auto& a = std::get<AssignOp>(p.body[0]);
    return a.expr.evaluate(cbits);
  };
  // * binds tighter than +, + tighter than <, < tighter than &&, && than ||.
  EXPECT_EQ(eval("1+2*3", {0}), 7);
  EXPECT_EQ(eval("(1+2)*3", {0}), 9);
  EXPECT_EQ(eval("c[1]+c[2]*c[3]", {0, 2, 3, 4}), 14);
  EXPECT_EQ(eval("10-3-4", {0}), 3);  // left associative
  EXPECT_EQ(eval("1+1<3", {0}), 1);
  EXPECT_EQ(eval("0&&1||1", {0}), 1);
  EXPECT_EQ(eval("1||1&&0", {0}), 1);
  EXPECT_EQ(eval("6/2*3", {0}), 9);
  EXPECT_EQ(eval("5^3", {0}), 6);
  EXPECT_EQ(eval("1==1^1", {0}), 0);   // ^ binds looser than ==
  EXPECT_EQ(eval("-4+c[1]", {0, 1}), -3);
}

TEST(IrParse, DiagnosticsCarryKindAndPosition) {
  {
    ParseError e = capture("QINIT 2\nFLIP q[0]\n");
    EXPECT_EQ(e.kind, ParseErrorKind::UnknownMnemonic);
    EXPECT_EQ(e.line, 2u);
    EXPECT_NE(std::string(e.what()).find("FLIP"), std::string::npos);
  }
  {
    ParseError e = capture("QINIT 2\nH q[0],q[1]\n");
    EXPECT_EQ(e.kind, ParseErrorKind::ArityError);
  }
  {
    ParseError e = capture("QINIT 2\nRX q[0]\n");
    EXPECT_EQ(e.kind, ParseErrorKind::ArityError);
  }
  {
    ParseError e = capture("QINIT 2\nX q[5]\n");
    EXPECT_EQ(e.kind, ParseErrorKind::RangeError);
    EXPECT_NE(std::string(e.what()).find("q[5]"), std::string::npos);
  }
  {
    ParseError e = capture("QINIT 2\nCREG 1\nMEASURE q[0],c[3]\n");
    EXPECT_EQ(e.kind, ParseErrorKind::RangeError);
    EXPECT_EQ(e.line, 3u);
  }
  {
    ParseError e = capture("QINIT 1\nDAGGER\nX q[0]\n");
    EXPECT_EQ(e.kind, ParseErrorKind::UnterminatedBlock);
    EXPECT_EQ(e.line, 2u);  // points at the opener
  }
  {
    ParseError e = capture("X q[0]\n");
    EXPECT_EQ(e.kind, ParseErrorKind::Syntax);
  }
  {
    ParseError e = capture("QINIT 1\nQINIT 1\n");
    EXPECT_EQ(e.kind, ParseErrorKind::Syntax);
    EXPECT_EQ(e.line, 2u);
  }
  {
    ParseError e = capture("QINIT 1\nELSE\n");
    EXPECT_EQ(e.kind, ParseErrorKind::Syntax);
  }
  {
    ParseError e = capture("QINIT 1\nCONTROL q[0]\nMEASURE q[0],c[0]\nENDCONTROL\n");
    EXPECT_EQ(e.kind, ParseErrorKind::Syntax);
    EXPECT_EQ(e.line, 3u);
  }
  {
    ParseError e = capture("QINIT 1\nCREG 2\nQIF c[0] @ c[1]\nENDQIF\n");
    EXPECT_EQ(e.kind, ParseErrorKind::Syntax);
    EXPECT_EQ(e.line, 3u);
    EXPECT_GT(e.column, 0u);
  }
  {
    ParseError e = capture("QINIT 1\nCUSTOM q[0],(1,0,0,0)\n");
    EXPECT_EQ(e.kind, ParseErrorKind::ArityError);  // needs 8 numbers
  }
  {
    ParseError e = capture("QINIT 1\nCREG 1\nc[0] = c[4]\n");
    EXPECT_EQ(e.kind, ParseErrorKind::RangeError);
  }
}

TEST(ExportQasm, KnownCircuitText) {
  Program p(2, 2);
  p.add(GateKind::H, {0});
  Gate sdg = make_gate(GateKind::S, {1});
  sdg.dagger = true;
  p.add(sdg);
  p.add(GateKind::CNOT, {0, 1});
  p.add(GateKind::RY, {1}, {0.5});
  p.measure(0, 0);
  p.measure(1, 1);

  EXPECT_EQ(emit_qasm(p),
            "OPENQASM 2.0;\n"
            "include \"qelib1.inc\";\n"
            "qreg q[2];\n"
            "creg c[2];\n"
            "h q[0];\n"
            "sdg q[1];\n"
            "cx q[0],q[1];\n"
            "ry(0.5) q[1];\n"
            "measure q[0] -> c[0];\n"
            "measure q[1] -> c[1];\n");
}

TEST(ExportQasm, DaggerFoldsIntoParameters) {
  Program p(1, 0);
  Gate rx = make_gate(GateKind::RX, {0}, {0.75});
  rx.dagger = true;
  p.add(rx);
  Gate u3 = make_gate(GateKind::U3, {0}, {0.125, 0.25, 0.5});
  u3.dagger = true;
  p.add(u3);
  Gate h = make_gate(GateKind::H, {0});
  h.dagger = true;  // self-inverse, dagger drops
  p.add(h);

  const std::string text = emit_qasm(p);
  EXPECT_NE(text.find("rx(-0.75) q[0];\n"), std::string::npos);
  EXPECT_NE(text.find("u3(-0.125,-0.5,-0.25) q[0];\n"), std::string::npos);
  EXPECT_NE(text.find("h q[0];\n"), std::string::npos);
  EXPECT_EQ(text.find("dg"), std::string::npos);
}

TEST(ExportQasm, RejectsWhatTheFormatCannotSay) {
  Program flow(1, 1);
  flow.if_then(ClassicalExpr::cbit(0), Program(1, 1));
  EXPECT_THROW(emit_qasm(flow), UnsupportedError);

  Program ctl(2, 0);
  Gate g = make_gate(GateKind::H, {0});
  g.controls = {1};
  ctl.add(g);
  EXPECT_THROW(emit_qasm(ctl), UnsupportedError);

  Program assign(1, 1);
  assign.assign(0, ClassicalExpr::constant(1));
  EXPECT_THROW(emit_qasm(assign), UnsupportedError);

  Program custom(1, 0);
  Gate cg;
  cg.kind = GateKind::Custom;
  cg.targets = {0};
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  cg.custom = std::make_shared<const CMatrix>(std::move(m));
  custom.add(cg);
  EXPECT_THROW(emit_qasm(custom), UnsupportedError);
}

TEST(ExportQuil, KnownCircuitText) {
  Program p(3, 1);
  p.add(GateKind::H, {0});
  p.add(GateKind::CNOT, {0, 1});
  Gate tdg = make_gate(GateKind::T, {2});
  tdg.dagger = true;
  p.add(tdg);
  p.add(GateKind::TOFFOLI, {0, 1, 2});
  p.measure(2, 0);

  const std::string text = emit_quil(p);
  EXPECT_EQ(text.rfind("DECLARE ro BIT[1]\n", 0), 0u);
  EXPECT_NE(text.find("H 0\n"), std::string::npos);
  EXPECT_NE(text.find("CNOT 0 1\n"), std::string::npos);
  EXPECT_NE(text.find("PHASE(-0.78539816339744828) 2\n"), std::string::npos);
  EXPECT_NE(text.find("CCNOT 0 1 2\n"), std::string::npos);
  EXPECT_NE(text.find("MEASURE 2 ro[0]\n"), std::string::npos);
}

TEST(ExportQuil, U3LowersToEulerRotations) {
  Program p(1, 0);
  p.add(GateKind::U3, {0}, {0.4, 0.5, 0.6});
  EXPECT_EQ(emit_quil(p),
            "RZ(0.59999999999999998) 0\n"
            "RY(0.40000000000000002) 0\n"
            "RZ(0.5) 0\n");

  // The lowering must agree with the gate matrix up to global phase.
  CMatrix u3 = oracle::named_matrix(GateKind::U3, {0.4, 0.5, 0.6});
  CMatrix low = oracle::named_matrix(GateKind::RZ, {0.5}) *
                oracle::named_matrix(GateKind::RY, {0.4}) *
                oracle::named_matrix(GateKind::RZ, {0.6});
  cdouble phase = u3(0, 0) / low(0, 0);
  EXPECT_NEAR(std::abs(phase), 1.0, 1e-12);
  EXPECT_LT((u3 - phase * low).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Draw, BellPair) {
  Program p(2, 0);
  p.add(GateKind::H, {0});
  p.add(GateKind::CNOT, {0, 1});
  EXPECT_EQ(draw(p),
            "q[0]: ─H─●─\n"
            "q[1]: ───⊕─\n");
}

TEST(Draw, LinksCrossingsAndMeasures) {
  Program p(3, 1);
  p.add(GateKind::H, {1});
  p.add(GateKind::CZ, {0, 2});
  p.add(GateKind::SWAP, {1, 2});
  p.measure(0, 0);
  EXPECT_EQ(draw(p),
            "q[0]: ───●─M─\n"
            "q[1]: ─H─┼─×─\n"
            "q[2]: ───●─×─\n");
}

TEST(Draw, ParameterAndDaggerLabels) {
  Program p(1, 0);
  Gate g = make_gate(GateKind::RX, {0}, {1.5});
  g.dagger = true;
  p.add(g);
  const std::string text = draw(p);
  EXPECT_NE(text.find("RX(1.5)†"), std::string::npos);
}

TEST(Draw, RequiresFlatProgram) {
  Program p(1, 1);
  p.while_loop(ClassicalExpr::cbit(0), Program(1, 1));
  EXPECT_THROW(draw(p), FlatCircuitRequired);
}
