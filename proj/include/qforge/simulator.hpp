#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qforge/circuit.hpp"
#include "qforge/error.hpp"
#include "qforge/fusion.hpp"
#include "qforge/rng.hpp"
#include "qforge/statevector.hpp"

namespace qforge {

struct SimOptions {
  std::uint64_t parallel_threshold = 1ull << 14;
  bool fusion_enabled = false;
  std::uint32_t max_fused_qubits = 3;
  std::uint64_t seed = 0;
  int workers = 0;  // 0 = library default
  std::uint64_t max_while_iterations = 1'000'000;

  KernelOptions kernel_options() const {
    return KernelOptions{parallel_threshold, workers};
  }
  void validate() const {
    if (parallel_threshold < 1)
      throw ValidationError("parallel_threshold must be at least 1");
    if (max_fused_qubits < 1 || max_fused_qubits > 5)
      throw ValidationError("max_fused_qubits must be in [1, 5]");
    if (workers < 0) throw ValidationError("workers must be non-negative");
  }
};

struct RunResult {
  // Keys are classical register contents, c[0] rightmost, one char per bit.
  std::map<std::string, std::uint64_t> counts;
  std::optional<StateVector> final_state;
};

namespace detail {

inline std::string cbit_key(const std::vector<std::int64_t>& cbits) {
  std::string key(cbits.size(), '0');
  for (std::size_t i = 0; i < cbits.size(); ++i)
    if (cbits[i] != 0) key[key.size() - 1 - i] = '1';
  return key;
}

// Recursive program executor with an optional per-gate noise hook.
class Executor {
 public:
  using NoiseHook = std::function<void(const Gate&, StateVector&, Rng&)>;

  Executor(std::uint32_t qubits, std::uint32_t cbits, const SimOptions& opts,
           Rng rng, NoiseHook noise = {})
      : opts_(opts),
        ko_(opts.kernel_options()),
        rng_(std::move(rng)),
        sv_(qubits),
        cbits_(cbits, 0),
        noise_(std::move(noise)) {}

  void exec(const Program& p) {
    for (const auto& ins : p.body) exec_instruction(ins);
  }

  StateVector& state() { return sv_; }
  const std::vector<std::int64_t>& cbits() const { return cbits_; }
  Rng& rng() { return rng_; }

 private:
  void exec_instruction(const Instruction& ins) {
    if (auto* g = std::get_if<GateOp>(&ins)) {
      sv_.apply_gate(g->gate, ko_);
      if (noise_) noise_(g->gate, sv_, rng_);
    } else if (auto* m = std::get_if<MeasureOp>(&ins)) {
      cbits_[m->cbit] = sv_.measure_collapse(m->qubit, rng_.uniform(), ko_);
      if (readout_) cbits_[m->cbit] = readout_(m->qubit, cbits_[m->cbit], rng_);
    } else if (auto* f = std::get_if<IfOp>(&ins)) {
      if (f->condition.evaluate(cbits_) != 0)
        exec(*f->then_body);
      else if (f->else_body)
        exec(*f->else_body);
    } else if (auto* w = std::get_if<WhileOp>(&ins)) {
      std::uint64_t iters = 0;
      while (w->condition.evaluate(cbits_) != 0) {
        if (++iters > opts_.max_while_iterations)
          throw NonTerminationGuard(
              "QWhile exceeded " + std::to_string(opts_.max_while_iterations) +
              " iterations");
        exec(*w->body);
      }
    } else if (auto* a = std::get_if<AssignOp>(&ins)) {
      cbits_[a->cbit] = a->expr.evaluate(cbits_);
    }
  }

 public:
  // Classical readout flip applied after a measurement collapse.
  using ReadoutHook = std::function<std::int64_t(std::uint32_t, std::int64_t,
                                                 Rng&)>;
  void set_readout(ReadoutHook h) { readout_ = std::move(h); }

 private:
  const SimOptions& opts_;
  KernelOptions ko_;
  Rng rng_;
  StateVector sv_;
  std::vector<std::int64_t> cbits_;
  NoiseHook noise_;
  ReadoutHook readout_;
};

// True when the program is a run of gates followed only by measurements:
// those programs are sampled from one evolved state instead of being
// re-executed per shot.
inline bool trailing_measure_form(const Program& p) {
  bool seen_measure = false;
  for (const auto& ins : p.body) {
    if (std::holds_alternative<GateOp>(ins)) {
      if (seen_measure) return false;
    } else if (std::holds_alternative<MeasureOp>(ins)) {
      seen_measure = true;
    } else {
      return false;
    }
  }
  return true;
}

}  // namespace detail

// Executes a program on the state-vector backend.  With shots == 0 the
// program runs once and only the final state is returned; with shots > 0 the
// measurement record of each shot is accumulated into counts.  Identical
// (program, options, shots) triples give identical counts for any worker
// count.
inline RunResult run(const Program& p, const SimOptions& opts = {},
                     std::uint64_t shots = 0) {
  opts.validate();
  validate_or_throw(p);

  Program prepared = p;
  if (opts.fusion_enabled && p.is_flat())
    prepared = fuse_circuit(p, opts.max_fused_qubits);

  RunResult result;
  Rng rng(opts.seed);

  if (detail::trailing_measure_form(prepared)) {
    detail::Executor ex(prepared.qubit_count, prepared.cbit_count, opts, rng);
    std::vector<MeasureOp> measures;
    for (const auto& ins : prepared.body) {
      if (auto* g = std::get_if<GateOp>(&ins))
        ex.state().apply_gate(g->gate, opts.kernel_options());
      else if (auto* m = std::get_if<MeasureOp>(&ins))
        measures.push_back(*m);
    }
    result.final_state = ex.state();
    if (shots > 0) {
      if (measures.empty()) {
        result.counts[std::string(prepared.cbit_count, '0')] += shots;
      } else {
        BasisSampler sampler(ex.state());
        Rng srng(opts.seed);
        for (std::uint64_t s = 0; s < shots; ++s) {
          std::size_t basis = sampler.sample(srng.uniform());
          std::string key(prepared.cbit_count, '0');
          for (const auto& m : measures)
            if (basis & (static_cast<std::size_t>(1) << m.qubit))
              key[key.size() - 1 - m.cbit] = '1';
          ++result.counts[key];
        }
      }
    }
    return result;
  }

  // General path: re-execute per shot (measurement outcomes feed control
  // flow).  A single serial pass keeps the draw sequence worker-independent.
  const std::uint64_t runs = shots > 0 ? shots : 1;
  for (std::uint64_t s = 0; s < runs; ++s) {
    detail::Executor ex(prepared.qubit_count, prepared.cbit_count, opts,
                        Rng::derive(opts.seed, s));
    ex.exec(prepared);
    if (shots > 0) ++result.counts[detail::cbit_key(ex.cbits())];
    if (s + 1 == runs) result.final_state = std::move(ex.state());
  }
  return result;
}

}  // namespace qforge
