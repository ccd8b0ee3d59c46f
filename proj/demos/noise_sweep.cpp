// Bell-state fidelity under amplitude damping: sweeps the damping probability
// attached to every CNOT, sampling trajectories and comparing against the
// exact outcome distribution from the density-matrix reference.

#include <cstdio>

#include <qforge/qforge.hpp>

using namespace qforge;

int main() {
  Program bell(2, 2);
  bell.add(GateKind::H, {0});
  bell.add(GateKind::CNOT, {0, 1});
  bell.measure(0, 0);
  bell.measure(1, 1);

  SimOptions opts;
  opts.seed = 5;
  const std::uint64_t shots = 50000;

  std::printf("p_damp   P(00)+P(11) sampled   exact\n");
  for (double p = 0.0; p <= 0.500001; p += 0.1) {
    NoiseModel nm;
    nm.add(GateKind::CNOT, make_channel(ChannelFamily::Damping, p));

    const auto counts = run_noisy(bell, nm, opts, shots).counts;
    std::uint64_t good = 0;
    for (const auto& [bits, n] : counts)
      if (bits == "00" || bits == "11") good += n;

    const auto dist = noisy_outcome_distribution(bell, nm);
    const double exact = dist[0b00] + dist[0b11];

    std::printf("%.2f     %.4f                %.4f\n", p,
                static_cast<double>(good) / shots, exact);
  }
  return 0;
}
