// Variational eigensolver on a fixed two-qubit Hamiltonian: a hardware-style
// ansatz, analytic parameter-shift gradients, and plain gradient descent.
// Prints the energy trace and compares against the exact ground state from
// dense diagonalization.

#include <cstdio>
#include <map>
#include <string>

#include <Eigen/Eigenvalues>
#include <qforge/qforge.hpp>

using namespace qforge;

int main() {
  // H = 0.5 Z0 + 0.5 Z1 - 0.8 X0X1 + 0.2 Z0Z1
  PauliOperator H = PauliOperator::term("Z0", 0.5);
  H += PauliOperator::term("Z1", 0.5);
  H += PauliOperator::term("X0 X1", -0.8);
  H += PauliOperator::term("Z0 Z1", 0.2);

  ParamCircuit pc(2);
  pc.add_param(GateKind::RY, 0, "a");
  pc.add_param(GateKind::RY, 1, "b");
  pc.add(GateKind::CNOT, {0, 1});
  pc.add_param(GateKind::RY, 0, "c");
  pc.add_param(GateKind::RY, 1, "d");

  std::map<std::string, double> x{{"a", 0.6}, {"b", -0.4}, {"c", 0.3},
                                  {"d", 0.2}};
  const double rate = 0.4;

  std::printf("step   energy\n");
  for (int step = 0; step <= 60; ++step) {
    const double e = expectation(pc.bind(x), H);
    if (step % 10 == 0) std::printf("%4d   %+.8f\n", step, e);
    const auto g = gradient(pc, H, x);
    std::size_t i = 0;
    for (const auto& name : pc.parameter_names()) x[name] -= rate * g[i++];
  }

  Eigen::SelfAdjointEigenSolver<CMatrix> es(H.to_matrix(2));
  std::printf("exact ground-state energy: %+.8f\n", es.eigenvalues()(0));
  return 0;
}
