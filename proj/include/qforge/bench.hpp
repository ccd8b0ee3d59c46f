#pragma once

#include <chrono>
#include <cstdint>
#include <numbers>
#include <set>
#include <string>
#include <utility>

#include "circuit.hpp"
#include "error.hpp"
#include "peephole.hpp"
#include "rng.hpp"
#include "simulator.hpp"

namespace qforge {

// Execution engine selector used by the benchmark harness and the CLI.
enum class Backend { Statevector, Noisy, Path };

inline const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Statevector: return "statevector";
    case Backend::Noisy: return "noisy";
    case Backend::Path: return "path";
  }
  return "?";
}

inline Backend backend_from_name(const std::string& name) {
  if (name == "statevector") return Backend::Statevector;
  if (name == "noisy") return Backend::Noisy;
  if (name == "path") return Backend::Path;
  throw ValidationError("unknown backend '" + name +
                        "' (expected statevector, noisy, or path)");
}

// One benchmark configuration: an n-qubit, d-layer random circuit plus the
// knobs that should change speed but not results.
struct BenchSpec {
  std::uint32_t qubits = 1;
  std::uint32_t layers = 1;
  std::uint64_t seed = 0;
  Backend backend = Backend::Statevector;
  bool fusion = true;
  bool peephole = true;

  void validate() const {
    if (qubits < 1) throw ValidationError("bench spec requires qubits >= 1");
    if (layers < 1) throw ValidationError("bench spec requires layers >= 1");
  }
};

// Timings and the probability digest for one benchmark run.  The checksum is
// order-sensitive, so two runs agree only if the full distributions agree.
struct BenchResult {
  double build_seconds = 0.0;
  double compile_seconds = 0.0;
  double execute_seconds = 0.0;
  std::uint64_t gates_before = 0;
  std::uint64_t gates_after = 0;
  double checksum = 0.0;
};

// Layered random circuit: each layer is one rotation sub-layer (per qubit,
// an axis drawn uniformly from {RX, RY, RZ} and an angle uniform in [0, 2pi))
// followed by one entangling sub-layer (for each i, CNOT with target i and
// control (i+1) mod n).  A single qubit cannot control itself, so n = 1
// produces rotation layers only.  One RNG stream seeded from `seed` drives
// all draws in program order, making the circuit a pure function of
// (n, d, seed).
inline Program gen_random_circuit(std::uint32_t n, std::uint32_t d,
                                  std::uint64_t seed) {
  if (n < 1) throw ValidationError("random circuit requires n >= 1");
  if (d < 1) throw ValidationError("random circuit requires d >= 1");
  Program p(n, 0);
  Rng rng(seed);
  for (std::uint32_t layer = 0; layer < d; ++layer) {
    for (std::uint32_t q = 0; q < n; ++q) {
      const std::uint64_t axis = rng.below(3);
      const double angle = rng.uniform(2.0 * std::numbers::pi);
      const GateKind kind = axis == 0   ? GateKind::RX
                            : axis == 1 ? GateKind::RY
                                        : GateKind::RZ;
      p.add(make_gate(kind, {q}, {angle}));
    }
    if (n > 1) {
      for (std::uint32_t i = 0; i < n; ++i) {
        p.add(make_gate(GateKind::CNOT, {(i + 1) % n, i}));
      }
    }
  }
  return p;
}

inline Program gen_random_circuit(const BenchSpec& spec) {
  spec.validate();
  return gen_random_circuit(spec.qubits, spec.layers, spec.seed);
}

// MaxCut-style ansatz on a seeded random graph: a Hadamard wall, then per
// layer one ZZ interaction (CNOT, RZ, CNOT) per edge followed by an RX mixer
// wall.  The graph is a ring plus up to n/2 random chords, so circuits carry
// enough two-qubit structure to exercise routing.  Deterministic in
// (n, layers, seed).
inline Program gen_qaoa_circuit(std::uint32_t n, std::uint32_t layers,
                                std::uint64_t seed) {
  if (n < 2) throw ValidationError("qaoa circuit requires n >= 2");
  if (layers < 1) throw ValidationError("qaoa circuit requires layers >= 1");
  Rng rng(seed);
  std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t j = (i + 1) % n;
    edges.insert({std::min(i, j), std::max(i, j)});
  }
  for (std::uint32_t k = 0; k < n / 2; ++k) {
    const auto a = static_cast<std::uint32_t>(rng.below(n));
    const auto b = static_cast<std::uint32_t>(rng.below(n));
    if (a != b) edges.insert({std::min(a, b), std::max(a, b)});
  }
  Program p(n, 0);
  for (std::uint32_t q = 0; q < n; ++q) p.add(make_gate(GateKind::H, {q}));
  for (std::uint32_t layer = 0; layer < layers; ++layer) {
    const double gamma = rng.uniform(2.0 * std::numbers::pi);
    const double beta = rng.uniform(2.0 * std::numbers::pi);
    for (const auto& [a, b] : edges) {
      p.add(make_gate(GateKind::CNOT, {a, b}));
      p.add(make_gate(GateKind::RZ, {b}, {gamma}));
      p.add(make_gate(GateKind::CNOT, {a, b}));
    }
    for (std::uint32_t q = 0; q < n; ++q) {
      p.add(make_gate(GateKind::RX, {q}, {beta}));
    }
  }
  return p;
}

// Order-sensitive digest of a final state: sum over basis states of
// probability * (index + 1).  Accumulated serially in index order, so the
// value is bitwise reproducible whenever the amplitudes are.
inline double probability_checksum(const StateVector& state) {
  const auto& amps = state.amplitudes();
  double sum = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    sum += std::norm(amps[i]) * static_cast<double>(i + 1);
  }
  return sum;
}

namespace detail {

inline double seconds_since(
    std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

}  // namespace detail

// Runs one benchmark configuration end to end: build the circuit, apply the
// requested circuit-level optimization, execute on the state-vector engine,
// and digest the final distribution.  Phases are timed separately with a
// monotonic clock.  The fusion and peephole flags may change the timings but
// leave the checksum unchanged up to rounding.
inline BenchResult run_bench(const BenchSpec& spec) {
  spec.validate();
  if (spec.backend != Backend::Statevector) {
    throw UnsupportedError(
        "the bench harness runs on the state-vector backend; noisy and path "
        "backends need per-run inputs (noise model, target amplitudes) and "
        "are driven through `run` instead");
  }
  BenchResult result;

  auto t = std::chrono::steady_clock::now();
  Program circuit = gen_random_circuit(spec);
  result.build_seconds = detail::seconds_since(t);
  result.gates_before = circuit.gate_count();

  t = std::chrono::steady_clock::now();
  if (spec.peephole) circuit = peephole(circuit);
  result.compile_seconds = detail::seconds_since(t);
  result.gates_after = circuit.gate_count();

  SimOptions opts;
  opts.fusion_enabled = spec.fusion;
  opts.seed = spec.seed;
  t = std::chrono::steady_clock::now();
  RunResult run_result = run(circuit, opts, 0);
  result.execute_seconds = detail::seconds_since(t);

  result.checksum = probability_checksum(*run_result.final_state);
  return result;
}

}  // namespace qforge
