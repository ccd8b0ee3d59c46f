#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "qforge/circuit.hpp"
#include "qforge/error.hpp"
#include "qforge/gates.hpp"
#include "qforge/statevector.hpp"

namespace qforge {

namespace detail {

// A gate normalized for path enumeration: a 2x2 operator on one target,
// conditioned on a set of control qubits.  Path variables are inserted only
// at controls, so the path count is 2^(total control count).
struct PathGate {
  std::array<cdouble, 4> u;  // row-major 2x2
  std::uint32_t target = 0;
  std::vector<std::uint32_t> controls;
};

inline std::vector<PathGate> normalize_for_paths(const Program& p) {
  if (!p.is_flat())
    throw FlatCircuitRequired("path-sum evaluation requires a flat program");
  std::vector<PathGate> out;
  auto push = [&](const CMatrix& m, std::uint32_t t,
                  std::vector<std::uint32_t> cs) {
    out.push_back(PathGate{{m(0, 0), m(0, 1), m(1, 0), m(1, 1)}, t,
                           std::move(cs)});
  };
  for (const auto& ins : p.body) {
    auto* op = std::get_if<GateOp>(&ins);
    if (!op) {
      if (std::holds_alternative<MeasureOp>(ins))
        throw UnsupportedError(
            "path-sum evaluation is defined for measurement-free programs");
      throw FlatCircuitRequired("path-sum evaluation requires a flat program");
    }
    const Gate& g = op->gate;
    std::vector<std::uint32_t> cs = g.controls;
    switch (g.kind) {
      case GateKind::I:
        break;
      case GateKind::CNOT:
        cs.push_back(g.targets[0]);
        push(standard_gate_matrix(GateKind::X), g.targets[1], std::move(cs));
        break;
      case GateKind::CZ:
        cs.push_back(g.targets[0]);
        push(standard_gate_matrix(GateKind::Z), g.targets[1], std::move(cs));
        break;
      case GateKind::TOFFOLI:
        cs.push_back(g.targets[0]);
        cs.push_back(g.targets[1]);
        push(standard_gate_matrix(GateKind::X), g.targets[2], std::move(cs));
        break;
      case GateKind::SWAP: {
        // SWAP(a,b) = CNOT(a,b) CNOT(b,a) CNOT(a,b); extra controls carry over.
        const std::uint32_t a = g.targets[0], b = g.targets[1];
        const CMatrix x = standard_gate_matrix(GateKind::X);
        auto with = [&](std::uint32_t c) {
          std::vector<std::uint32_t> v = g.controls;
          v.push_back(c);
          return v;
        };
        push(x, b, with(a));
        push(x, a, with(b));
        push(x, b, with(a));
        break;
      }
      case GateKind::Custom:
        if (g.targets.size() != 1)
          throw UnsupportedError(
              "path-sum evaluation supports custom gates on one target only");
        push(base_matrix(g), g.targets[0], std::move(cs));
        break;
      default:
        push(base_matrix(g), g.targets[0], std::move(cs));
        break;
    }
  }
  return out;
}

inline std::uint64_t path_count_estimate(const std::vector<PathGate>& gates) {
  std::uint64_t paths = 1;
  for (const auto& g : gates) {
    for (std::size_t c = 0; c < g.controls.size(); ++c) {
      if (paths > (1ull << 62)) return UINT64_MAX;
      paths <<= 1;
    }
  }
  return paths;
}

// Per-qubit forward 2-vectors; branching resets control qubits onto basis
// states and multiplies the running coefficient by the pinned component.
class PathEvaluator {
 public:
  PathEvaluator(const std::vector<PathGate>& gates, std::uint32_t n,
                const std::vector<int>& target_bits)
      : gates_(gates), n_(n), target_bits_(target_bits) {}

  cdouble evaluate() const {
    std::vector<std::array<cdouble, 2>> v(n_, {cdouble(1), cdouble(0)});
    return eval_from(0, std::move(v), cdouble(1));
  }

 private:
  cdouble eval_from(std::size_t gi, std::vector<std::array<cdouble, 2>> v,
                    cdouble coeff) const {
    for (; gi < gates_.size(); ++gi) {
      const PathGate& g = gates_[gi];
      if (g.controls.empty()) {
        apply(g.u, v[g.target]);
        continue;
      }
      // Branch over computational-basis assignments of the controls, in
      // ascending assignment order (deterministic summation order).
      cdouble total(0);
      const std::size_t nb = std::size_t(1) << g.controls.size();
      for (std::size_t s = 0; s < nb; ++s) {
        cdouble f = coeff;
        bool all_ones = true;
        for (std::size_t j = 0; j < g.controls.size(); ++j) {
          const int bit = static_cast<int>((s >> j) & 1);
          f *= v[g.controls[j]][bit];
          if (!bit) all_ones = false;
        }
        if (f == cdouble(0)) continue;  // exactly-zero branch contributes 0
        auto v2 = v;
        for (std::size_t j = 0; j < g.controls.size(); ++j) {
          const int bit = static_cast<int>((s >> j) & 1);
          v2[g.controls[j]] = {cdouble(bit ? 0 : 1), cdouble(bit ? 1 : 0)};
        }
        if (all_ones) apply(g.u, v2[g.target]);
        total += eval_from(gi + 1, std::move(v2), f);
      }
      return total;
    }
    cdouble out = coeff;
    for (std::uint32_t q = 0; q < n_; ++q) out *= v[q][target_bits_[q]];
    return out;
  }

  static void apply(const std::array<cdouble, 4>& u,
                    std::array<cdouble, 2>& x) {
    const cdouble a = x[0], b = x[1];
    x[0] = u[0] * a + u[1] * b;
    x[1] = u[2] * a + u[3] * b;
  }

  const std::vector<PathGate>& gates_;
  std::uint32_t n_;
  const std::vector<int>& target_bits_;
};

inline std::vector<int> parse_bitstring(std::string_view bits,
                                        std::uint32_t n) {
  if (bits.size() != n)
    throw ValidationError("target bitstring length " +
                          std::to_string(bits.size()) + " does not match " +
                          std::to_string(n) + " qubits");
  std::vector<int> out(n);
  for (std::uint32_t q = 0; q < n; ++q) {
    const char c = bits[bits.size() - 1 - q];  // rightmost char is qubit 0
    if (c != '0' && c != '1')
      throw ValidationError("target bitstring must contain only 0/1");
    out[q] = c - '0';
  }
  return out;
}

}  // namespace detail

inline constexpr std::uint64_t kDefaultPathBudget = 1ull << 22;

// <target|U|0...0> by Feynman path summation.  Path variables are introduced
// only at entangling/controlled gates; single-qubit gates propagate through
// per-qubit transfer vectors, so the summand count is 2^(#controls).
inline cdouble single_amplitude(const Program& p, std::string_view target,
                                std::uint64_t path_budget = kDefaultPathBudget) {
  validate_or_throw(p);
  auto gates = detail::normalize_for_paths(p);
  auto bits = detail::parse_bitstring(target, p.qubit_count);
  const std::uint64_t estimate = detail::path_count_estimate(gates);
  if (estimate > path_budget)
    throw BudgetExceeded("path count " +
                             (estimate == UINT64_MAX
                                  ? std::string("overflows")
                                  : std::to_string(estimate)) +
                             " exceeds budget " + std::to_string(path_budget),
                         estimate);
  return detail::PathEvaluator(gates, p.qubit_count, bits).evaluate();
}

// ---------------------------------------------------------------------------
// Partial-amplitude simulation
// ---------------------------------------------------------------------------

struct CutPlan {
  std::vector<std::uint32_t> block_a;        // sorted, size ceil(n/2)
  std::vector<std::uint32_t> block_b;        // sorted, size floor(n/2)
  std::vector<std::size_t> crossing_gates;   // body indices, ascending
  std::uint64_t branch_count = 1;            // 2^|crossing_gates|
};

namespace detail {

inline void check_cuttable_gate(const Gate& g) {
  if (!g.controls.empty())
    throw UnsupportedError("cut planning expects gates without extra controls");
  if (g.targets.size() == 1) return;
  if (g.kind == GateKind::CNOT || g.kind == GateKind::CZ) return;
  throw UnsupportedError(std::string("cut planning cannot handle ") +
                         gate_name(g.kind) +
                         "; compile to 1-qubit + CZ/CNOT first");
}

}  // namespace detail

// Bipartitions the qubits into ceil(n/2) / floor(n/2) blocks minimizing the
// number of 2-qubit gates crossing the cut.  Exhaustive for n <= 12, greedy
// pair-swap refinement above.
inline CutPlan plan_cut(const Program& p) {
  validate_or_throw(p);
  if (!p.is_flat())
    throw FlatCircuitRequired("cut planning requires a flat program");
  const std::uint32_t n = p.qubit_count;
  if (n < 2) throw ValidationError("cut planning needs at least 2 qubits");

  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;  // 2q endpoints
  for (const auto& ins : p.body) {
    auto* op = std::get_if<GateOp>(&ins);
    if (!op)
      throw UnsupportedError("cut planning expects a gates-only program");
    detail::check_cuttable_gate(op->gate);
    if (op->gate.targets.size() == 2)
      pairs.emplace_back(op->gate.targets[0], op->gate.targets[1]);
  }

  const std::uint32_t size_a = (n + 1) / 2;
  auto crossings = [&](std::uint64_t mask) {
    std::size_t c = 0;
    for (auto& [a, b] : pairs)
      if (((mask >> a) & 1) != ((mask >> b) & 1)) ++c;
    return c;
  };

  std::uint64_t best_mask = 0;
  std::size_t best_cross = SIZE_MAX;
  if (n <= 12) {
    for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
      if (static_cast<std::uint32_t>(__builtin_popcountll(mask)) != size_a)
        continue;
      std::size_t c = crossings(mask);
      if (c < best_cross) {
        best_cross = c;
        best_mask = mask;
      }
    }
  } else {
    std::uint64_t mask = (1ull << size_a) - 1;
    best_cross = crossings(mask);
    bool improved = true;
    while (improved) {
      improved = false;
      std::uint64_t best_swap = mask;
      for (std::uint32_t a = 0; a < n && !improved; ++a) {
        if (!((mask >> a) & 1)) continue;
        for (std::uint32_t b = 0; b < n; ++b) {
          if ((mask >> b) & 1) continue;
          std::uint64_t m2 = (mask & ~(1ull << a)) | (1ull << b);
          std::size_t c = crossings(m2);
          if (c < best_cross) {
            best_cross = c;
            best_swap = m2;
            improved = true;
            break;
          }
        }
      }
      mask = best_swap;
    }
    best_mask = mask;
  }

  CutPlan plan;
  for (std::uint32_t q = 0; q < n; ++q)
    ((best_mask >> q) & 1 ? plan.block_a : plan.block_b).push_back(q);
  std::size_t idx = 0;
  for (const auto& ins : p.body) {
    const Gate& g = std::get<GateOp>(ins).gate;
    if (g.targets.size() == 2 &&
        ((best_mask >> g.targets[0]) & 1) != ((best_mask >> g.targets[1]) & 1))
      plan.crossing_gates.push_back(idx);
    ++idx;
  }
  plan.branch_count = plan.crossing_gates.size() >= 63
                          ? UINT64_MAX
                          : (1ull << plan.crossing_gates.size());
  return plan;
}

// Evaluates amplitudes by branch enumeration over the cut.  Each crossing CZ
// splits as |0><0| (x) I + |1><1| (x) Z; crossing CNOTs are first rewritten
// CNOT = (I (x) H) CZ (I (x) H).  Every branch then factors into two
// independent block-local circuits, and
// amplitude(t) = sum_branches ampA(t_A) * ampB(t_B).
inline std::map<std::string, cdouble> partial_amplitude(
    const Program& p, const CutPlan& plan,
    const std::vector<std::string>& targets,
    std::uint64_t branch_budget = kDefaultPathBudget) {
  validate_or_throw(p);
  const std::uint32_t n = p.qubit_count;

  // Plan consistency.
  std::vector<int> side(n, -1);  // 0 = A, 1 = B
  for (auto q : plan.block_a) {
    if (q >= n) throw ValidationError("cut plan qubit out of range");
    side[q] = 0;
  }
  for (auto q : plan.block_b) {
    if (q >= n || side[q] != -1)
      throw ValidationError("cut plan blocks must partition the qubits");
    side[q] = 1;
  }
  for (std::uint32_t q = 0; q < n; ++q)
    if (side[q] == -1)
      throw ValidationError("cut plan blocks must partition the qubits");
  if (plan.branch_count > branch_budget)
    throw BudgetExceeded("branch count " + std::to_string(plan.branch_count) +
                             " exceeds budget " + std::to_string(branch_budget),
                         plan.branch_count);

  // Local index of each qubit within its block (ascending rank).
  std::vector<std::uint32_t> local(n, 0);
  for (std::size_t i = 0; i < plan.block_a.size(); ++i)
    local[plan.block_a[i]] = static_cast<std::uint32_t>(i);
  for (std::size_t i = 0; i < plan.block_b.size(); ++i)
    local[plan.block_b[i]] = static_cast<std::uint32_t>(i);

  // Block-local op sequences.  A BranchedOp with var >= 0 depends on the
  // branch assignment: the A side carries the basis projector, the B side
  // the conditional Z.
  struct BranchedOp {
    Gate gate;           // fixed op when var < 0; ignored otherwise
    int var = -1;
    std::uint32_t local_qubit = 0;
    bool projector_side = false;
  };
  std::array<std::vector<BranchedOp>, 2> seq;

  std::size_t next_crossing = 0;
  std::size_t idx = 0;
  for (const auto& ins : p.body) {
    auto* op = std::get_if<GateOp>(&ins);
    if (!op)
      throw UnsupportedError("partial amplitude expects a gates-only program");
    const Gate& g = op->gate;
    detail::check_cuttable_gate(g);
    const bool crossing =
        g.targets.size() == 2 && side[g.targets[0]] != side[g.targets[1]];
    const bool listed = next_crossing < plan.crossing_gates.size() &&
                        plan.crossing_gates[next_crossing] == idx;
    if (crossing != listed)
      throw ValidationError("cut plan does not match the program's gates");

    if (!crossing) {
      Gate lg = g;
      for (auto& t : lg.targets) t = local[t];
      seq[side[g.targets[0]]].push_back(BranchedOp{std::move(lg)});
    } else {
      const int var = static_cast<int>(next_crossing++);
      std::uint32_t qa = g.targets[0], qb = g.targets[1];
      if (g.kind == GateKind::CNOT) {
        // Conjugate the target with H so the crossing becomes a CZ.
        Gate h = make_gate(GateKind::H, {local[qb]});
        seq[side[qb]].push_back(BranchedOp{h});
        seq[side[qa]].push_back(
            BranchedOp{Gate{}, var, local[qa], side[qa] == 0});
        seq[side[qb]].push_back(
            BranchedOp{Gate{}, var, local[qb], side[qb] == 0});
        seq[side[qb]].push_back(BranchedOp{h});
      } else {
        seq[side[qa]].push_back(
            BranchedOp{Gate{}, var, local[qa], side[qa] == 0});
        seq[side[qb]].push_back(
            BranchedOp{Gate{}, var, local[qb], side[qb] == 0});
      }
    }
    ++idx;
  }
  if (next_crossing != plan.crossing_gates.size())
    throw ValidationError("cut plan lists gates beyond the program");

  // Parse targets up front.
  struct SplitTarget {
    std::size_t idx_a = 0, idx_b = 0;
    const std::string* key;
  };
  std::vector<SplitTarget> split;
  std::set<std::string_view> seen;
  for (const auto& t : targets) {
    auto bits = detail::parse_bitstring(t, n);
    if (!seen.insert(t).second) continue;  // duplicates accumulate once
    SplitTarget st;
    st.key = &t;
    for (std::size_t i = 0; i < plan.block_a.size(); ++i)
      if (bits[plan.block_a[i]]) st.idx_a |= std::size_t(1) << i;
    for (std::size_t i = 0; i < plan.block_b.size(); ++i)
      if (bits[plan.block_b[i]]) st.idx_b |= std::size_t(1) << i;
    split.push_back(st);
  }

  CMatrix proj0 = CMatrix::Zero(2, 2), proj1 = CMatrix::Zero(2, 2);
  proj0(0, 0) = 1;
  proj1(1, 1) = 1;

  std::map<std::string, cdouble> out;
  for (const auto& t : targets) out[t] = cdouble(0);

  const std::array<std::uint32_t, 2> block_sizes = {
      static_cast<std::uint32_t>(plan.block_a.size()),
      static_cast<std::uint32_t>(plan.block_b.size())};

  for (std::uint64_t branch = 0; branch < plan.branch_count; ++branch) {
    std::array<std::vector<cdouble>, 2> final_amps;
    for (int blk = 0; blk < 2; ++blk) {
      StateVector sv(block_sizes[blk]);
      for (const auto& bop : seq[blk]) {
        if (bop.var < 0) {
          sv.apply_gate(bop.gate);
        } else {
          const bool bit = (branch >> bop.var) & 1;
          if (bop.projector_side) {
            std::uint32_t tq = bop.local_qubit;
            sv.apply_matrix(std::span<const std::uint32_t>(&tq, 1),
                            bit ? proj1 : proj0);
          } else if (bit) {
            sv.apply_gate(make_gate(GateKind::Z, {bop.local_qubit}));
          }
        }
      }
      auto amps = sv.amplitudes();
      final_amps[blk].assign(amps.begin(), amps.end());
    }
    for (const auto& st : split)
      out[*st.key] += final_amps[0][st.idx_a] * final_amps[1][st.idx_b];
  }
  return out;
}

}  // namespace qforge
