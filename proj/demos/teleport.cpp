// Quantum teleportation: moves an arbitrary single-qubit state from q0 to q2
// using one Bell pair and two classical bits.  The corrections are applied
// with classically conditioned blocks, so this exercises mid-circuit
// measurement and control flow.

#include <cstdio>

#include <qforge/qforge.hpp>

using namespace qforge;

int main() {
  // The payload: an arbitrary state cos(0.4)|0> + e^{i 0.7} sin(0.4)|1>.
  const double theta = 0.8, phi = 0.7;

  Program p(3, 2);
  p.add(GateKind::RY, {0}, {theta});
  p.add(GateKind::RZ, {0}, {phi});

  // Bell pair between q1 (Alice) and q2 (Bob).
  p.add(GateKind::H, {1});
  p.add(GateKind::CNOT, {1, 2});

  // Bell measurement of the payload against Alice's half.
  p.add(GateKind::CNOT, {0, 1});
  p.add(GateKind::H, {0});
  p.measure(0, 0);
  p.measure(1, 1);

  // Bob's corrections, conditioned on the two classical bits.
  Program fix_x(3, 2);
  fix_x.add(GateKind::X, {2});
  p.if_then(ClassicalExpr::cbit(1), std::move(fix_x));
  Program fix_z(3, 2);
  fix_z.add(GateKind::Z, {2});
  p.if_then(ClassicalExpr::cbit(0), std::move(fix_z));

  // Verify: undo the payload preparation on q2 and measure.  If teleportation
  // worked, q2 always lands back on |0>.
  p.add(GateKind::RZ, {2}, {-phi});
  p.add(GateKind::RY, {2}, {-theta});

  SimOptions opts;
  opts.seed = 11;
  const RunResult before = run(p, opts, 0);

  Program check = p;
  check.measure(2, 0);
  check.measure(2, 1);  // reuse both cbits: both now record q2
  const auto counts = run(check, opts, 4096).counts;

  std::printf("teleported state check (00 means q2 returned to |0>):\n");
  for (const auto& [bits, n] : counts)
    std::printf("  %s %llu\n", bits.c_str(), (unsigned long long)n);

  const double p2 = before.final_state->probability_of_one(2);
  std::printf("P(q2 = 1) before the undo-check measurement: %.6f\n", p2);
  return 0;
}
