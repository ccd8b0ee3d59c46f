#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qforge/circuit.hpp"
#include "qforge/error.hpp"
#include "qforge/gates.hpp"
#include "qforge/linalg.hpp"
#include "qforge/rng.hpp"
#include "qforge/simulator.hpp"

namespace qforge {

enum class ChannelFamily {
  Damping,
  Dephasing,
  Decoherence,
  Depolarizing,
  BitPhaseFlip,
  PhaseDamping,
};

inline const char* channel_family_name(ChannelFamily f) {
  switch (f) {
    case ChannelFamily::Damping: return "damping";
    case ChannelFamily::Dephasing: return "dephasing";
    case ChannelFamily::Decoherence: return "decoherence";
    case ChannelFamily::Depolarizing: return "depolarizing";
    case ChannelFamily::BitPhaseFlip: return "bit_phase_flip";
    case ChannelFamily::PhaseDamping: return "phase_damping";
  }
  return "?";
}

inline std::optional<ChannelFamily> channel_family_from_name(
    std::string_view s) {
  static const std::pair<std::string_view, ChannelFamily> table[] = {
      {"damping", ChannelFamily::Damping},
      {"dephasing", ChannelFamily::Dephasing},
      {"decoherence", ChannelFamily::Decoherence},
      {"depolarizing", ChannelFamily::Depolarizing},
      {"bit_phase_flip", ChannelFamily::BitPhaseFlip},
      {"phase_damping", ChannelFamily::PhaseDamping},
  };
  for (auto& [name, fam] : table)
    if (name == s) return fam;
  return std::nullopt;
}

struct KrausChannel {
  std::vector<CMatrix> ops;

  std::uint32_t arity() const {
    if (ops.empty()) return 0;
    std::uint32_t k = 0;
    for (Eigen::Index d = ops[0].rows(); d > 1; d >>= 1) ++k;
    return k;
  }

  // Max-norm defect of the completeness sum against the identity.
  double completeness_defect() const {
    if (ops.empty()) return 1.0;
    CMatrix sum = CMatrix::Zero(ops[0].rows(), ops[0].cols());
    for (const auto& k : ops) sum += k.adjoint() * k;
    return max_abs_diff(sum, CMatrix::Identity(sum.rows(), sum.cols()));
  }

  void validate(double tol = 1e-10) const {
    if (ops.empty()) throw ValidationError("channel has no Kraus operators");
    const auto rows = ops[0].rows();
    if (rows < 2 || (rows & (rows - 1)) != 0)
      throw ValidationError("Kraus operator dimension must be a power of two");
    for (const auto& k : ops)
      if (k.rows() != rows || k.cols() != rows)
        throw ValidationError("Kraus operators must share one square shape");
    double defect = completeness_defect();
    if (defect > tol)
      throw ValidationError("Kraus completeness defect " +
                            std::to_string(defect) + " exceeds tolerance");
  }
};

struct DecoherenceParams {
  double t_gate = 0;
  double t1 = 0;
  double t2 = 0;

  void validate() const {
    if (!(t_gate > 0) || !(t1 > 0) || !(t2 > 0))
      throw ValidationError("decoherence times must be positive");
    if (t2 > 2 * t1 + 1e-15)
      throw ValidationError("unphysical decoherence parameters: T2 > 2*T1");
  }

  double damping_probability() const { return 1.0 - std::exp(-t_gate / t1); }
  double dephasing_probability() const {
    return 0.5 * (1.0 - std::exp(-(t_gate / t2 - t_gate / (2 * t1))));
  }
};

namespace detail {

inline CMatrix kraus2(cdouble a, cdouble b, cdouble c, cdouble d) {
  CMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

inline std::vector<CMatrix> damping_ops(double p) {
  return {kraus2(1, 0, 0, std::sqrt(1 - p)), kraus2(0, std::sqrt(p), 0, 0)};
}

inline std::vector<CMatrix> dephasing_ops(double p) {
  return {std::sqrt(1 - p) * CMatrix::Identity(2, 2),
          kraus2(std::sqrt(p), 0, 0, -std::sqrt(p))};
}

}  // namespace detail

// Single-qubit channel of one of the probability-parameterized families.
// Decoherence needs time constants; use make_decoherence_channel.
inline KrausChannel make_channel(ChannelFamily family, double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw ValidationError("channel probability must lie in [0, 1]");
  const cdouble i1(0, 1);
  KrausChannel ch;
  switch (family) {
    case ChannelFamily::Damping:
      ch.ops = detail::damping_ops(p);
      break;
    case ChannelFamily::Dephasing:
      ch.ops = detail::dephasing_ops(p);
      break;
    case ChannelFamily::Depolarizing: {
      const double s = std::sqrt(p) / 2;
      ch.ops = {std::sqrt(1 - 3 * p / 4) * CMatrix::Identity(2, 2),
                s * standard_gate_matrix(GateKind::X),
                s * standard_gate_matrix(GateKind::Y),
                s * standard_gate_matrix(GateKind::Z)};
      break;
    }
    case ChannelFamily::BitPhaseFlip:
      ch.ops = {std::sqrt(1 - p) * CMatrix::Identity(2, 2),
                detail::kraus2(0, -i1 * std::sqrt(p), i1 * std::sqrt(p), 0)};
      break;
    case ChannelFamily::PhaseDamping:
      ch.ops = {detail::kraus2(1, 0, 0, std::sqrt(1 - p)),
                detail::kraus2(0, 0, 0, std::sqrt(p))};
      break;
    case ChannelFamily::Decoherence:
      throw ValidationError(
          "decoherence takes (t_gate, T1, T2); use make_decoherence_channel");
  }
  return ch;
}

// Combined amplitude-damping and dephasing channel: the four pairwise
// products K_damping(P_damping) * K_dephasing(P_dephasing), with
// P_damping = 1 - e^(-t_gate/T1) and
// P_dephasing = (1 - e^(-(t_gate/T2 - t_gate/(2*T1)))) / 2.
inline KrausChannel make_decoherence_channel(const DecoherenceParams& dp) {
  dp.validate();
  auto damp = detail::damping_ops(dp.damping_probability());
  auto deph = detail::dephasing_ops(dp.dephasing_probability());
  KrausChannel ch;
  for (const auto& kd : damp)
    for (const auto& kp : deph) ch.ops.push_back(kd * kp);
  return ch;
}

// Classical readout confusion for one qubit: row = true outcome,
// column = recorded outcome.
struct ReadoutError {
  double p01 = 0;  // P(record 1 | true 0)
  double p10 = 0;  // P(record 0 | true 1)

  void validate() const {
    if (!(p01 >= 0 && p01 <= 1 && p10 >= 0 && p10 <= 1))
      throw ValidationError("readout flip probabilities must lie in [0, 1]");
  }
};

// Gate-triggered noise rules plus per-qubit readout confusion.  A rule fires
// after every gate of its kind; a rule with a qubit set fires only when the
// gate's touched qubits match the restriction.  All matching rules fire in
// insertion order.
class NoiseModel {
 public:
  struct Rule {
    GateKind kind;
    std::optional<std::vector<std::uint32_t>> qubits;  // sorted when present
    KrausChannel channel;
  };

  void add(GateKind kind, KrausChannel channel,
           std::optional<std::vector<std::uint32_t>> qubits = std::nullopt) {
    channel.validate();
    if (qubits) std::sort(qubits->begin(), qubits->end());
    rules_.push_back(Rule{kind, std::move(qubits), std::move(channel)});
  }

  void set_readout(std::uint32_t qubit, ReadoutError re) {
    re.validate();
    readout_[qubit] = re;
  }

  const std::vector<Rule>& rules() const { return rules_; }
  const std::map<std::uint32_t, ReadoutError>& readout() const {
    return readout_;
  }
  bool empty() const { return rules_.empty() && readout_.empty(); }

 private:
  std::vector<Rule> rules_;
  std::map<std::uint32_t, ReadoutError> readout_;
};

// --- density-matrix reference engine -----------------------------------------

// rho <- sum_i K_i rho K_i^dagger on the given qubits (most significant
// first, matching the gate operand convention).
inline CMatrix evolve_density(const CMatrix& rho, const KrausChannel& ch,
                              std::span<const std::uint32_t> qubits,
                              std::uint32_t n) {
  if (rho.rows() != rho.cols() ||
      static_cast<std::size_t>(rho.rows()) != (std::size_t(1) << n))
    throw ValidationError("density matrix dimension mismatch");
  if (ch.arity() != qubits.size())
    throw ValidationError("channel arity does not match qubit count");
  for (auto q : qubits)
    if (q >= n) throw ValidationError("evolve_density: qubit out of range");
  if (max_abs_diff(rho, rho.adjoint()) > 1e-9)
    throw ValidationError("density matrix is not Hermitian");
  if (std::abs(rho.trace() - cdouble(1)) > 1e-9)
    throw ValidationError("density matrix trace must be 1");

  std::vector<std::uint32_t> ops(qubits.begin(), qubits.end());
  CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
  for (const auto& k : ch.ops) {
    CMatrix kf = embed_on_bits(k, ops, n);
    out += kf * rho * kf.adjoint();
  }
  return out;
}

namespace detail {

// Applies a unitary gate to a density matrix: rho <- U rho U^dagger.
inline void density_apply_gate(CMatrix& rho, const Gate& g, std::uint32_t n) {
  CMatrix u = full_matrix(g, n);
  rho = u * rho * u.adjoint();
}

inline void apply_noise_rules(const NoiseModel& nm, const Gate& g,
                              std::uint32_t n, CMatrix* rho, StateVector* sv,
                              Rng* rng) {
  std::vector<std::uint32_t> touched = g.qubits();
  std::vector<std::uint32_t> sorted = touched;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& rule : nm.rules()) {
    if (rule.kind != g.kind) continue;
    if (rule.qubits && *rule.qubits != sorted) continue;
    const std::uint32_t ar = rule.channel.arity();
    std::vector<std::vector<std::uint32_t>> applications;
    if (ar == touched.size()) {
      applications.push_back(touched);
    } else if (ar == 1) {
      for (auto q : touched) applications.push_back({q});
    } else {
      throw ValidationError(
          std::string("noise channel arity ") + std::to_string(ar) +
          " does not match " + gate_name(g.kind) + " acting on " +
          std::to_string(touched.size()) + " qubit(s)");
    }
    for (const auto& qs : applications) {
      if (rho) {
        *rho = evolve_density(*rho, rule.channel, qs, n);
      } else {
        // Trajectory step: pick operator i with probability ||K_i psi||^2.
        const auto& ops = rule.channel.ops;
        std::vector<double> weight(ops.size());
        StateVector scratch = *sv;
        for (std::size_t i = 0; i < ops.size(); ++i) {
          scratch = *sv;
          scratch.apply_matrix(qs, ops[i]);
          weight[i] = scratch.norm_squared();
        }
        double total = 0;
        for (double w : weight) total += w;
        const double u = rng->uniform() * total;
        double acc = 0;
        std::size_t chosen = ops.size() - 1;
        for (std::size_t i = 0; i < ops.size(); ++i) {
          acc += weight[i];
          if (u < acc) {
            chosen = i;
            break;
          }
        }
        if (weight[chosen] <= 0)
          throw Error("trajectory selected a zero-probability Kraus branch");
        scratch = *sv;
        scratch.apply_matrix(qs, ops[chosen]);
        scratch.scale(1.0 / std::sqrt(weight[chosen]));
        *sv = std::move(scratch);
      }
    }
  }
}

}  // namespace detail

// Trajectory-method noisy execution.  Each shot evolves a fresh state vector;
// after every gate the matching channels are sampled (one Kraus operator per
// application, weighted by post-application norm) and the state renormalized.
// Readout confusion flips recorded bits after collapse.  Shot s draws from
// the stream derived from (opts.seed, s), so counts are identical for any
// worker count.
inline RunResult run_noisy(const Program& p, const NoiseModel& nm,
                           const SimOptions& opts = {},
                           std::uint64_t shots = 1) {
  opts.validate();
  validate_or_throw(p);
  const auto& readout = nm.readout();

  RunResult result;
  std::vector<std::string> keys(shots);
  for (std::uint64_t s = 0; s < shots; ++s) {
    detail::Executor ex(
        p.qubit_count, p.cbit_count, opts, Rng::derive(opts.seed, s),
        [&](const Gate& g, StateVector& sv, Rng& rng) {
          detail::apply_noise_rules(nm, g, p.qubit_count, nullptr, &sv, &rng);
        });
    if (!readout.empty()) {
      ex.set_readout([&](std::uint32_t qubit, std::int64_t outcome,
                         Rng& rng) -> std::int64_t {
        auto it = readout.find(qubit);
        if (it == readout.end()) return outcome;
        const double flip = outcome ? it->second.p10 : it->second.p01;
        if (rng.uniform() < flip) return outcome ? 0 : 1;
        return outcome;
      });
    }
    ex.exec(p);
    keys[s] = detail::cbit_key(ex.cbits());
    if (s + 1 == shots) result.final_state = std::move(ex.state());
  }
  for (auto& k : keys) ++result.counts[k];
  return result;
}

// Density-matrix reference: exact outcome distribution over classical
// registers for a flat gates-then-measurements program.  Exponential in n;
// meant for small-n verification of the trajectory method.
inline std::vector<double> noisy_outcome_distribution(const Program& p,
                                                      const NoiseModel& nm) {
  validate_or_throw(p);
  if (!p.is_flat())
    throw FlatCircuitRequired("density reference requires a flat program");
  const std::uint32_t n = p.qubit_count;
  if (n > 10) throw ValidationError("density reference limited to 10 qubits");

  const std::size_t dim = std::size_t(1) << n;
  CMatrix rho = CMatrix::Zero(dim, dim);
  rho(0, 0) = 1;
  std::vector<MeasureOp> measures;
  bool measuring = false;
  for (const auto& ins : p.body) {
    if (auto* g = std::get_if<GateOp>(&ins)) {
      if (measuring)
        throw UnsupportedError(
            "density reference requires all measurements at the end");
      detail::density_apply_gate(rho, g->gate, n);
      detail::apply_noise_rules(nm, g->gate, n, &rho, nullptr, nullptr);
    } else if (auto* m = std::get_if<MeasureOp>(&ins)) {
      measuring = true;
      measures.push_back(*m);
    } else {
      throw UnsupportedError("density reference supports gates and measures");
    }
  }

  // Born probabilities of the measured qubits, then per-qubit readout
  // confusion, accumulated over classical register patterns.
  std::vector<double> out(std::size_t(1) << p.cbit_count, 0.0);
  const auto& readout = nm.readout();
  for (std::size_t basis = 0; basis < dim; ++basis) {
    double pr = std::real(rho(static_cast<Eigen::Index>(basis),
                              static_cast<Eigen::Index>(basis)));
    if (pr <= 0) continue;
    // Enumerate recorded patterns over the measured bits with their
    // confusion probabilities.
    const std::size_t m = measures.size();
    for (std::size_t rec = 0; rec < (std::size_t(1) << m); ++rec) {
      double w = pr;
      std::size_t key = 0;
      for (std::size_t j = 0; j < m; ++j) {
        const int truth =
            (basis >> measures[j].qubit) & 1;
        const int recorded = (rec >> j) & 1;
        double flip = 0;
        auto it = readout.find(measures[j].qubit);
        if (it != readout.end())
          flip = truth ? it->second.p10 : it->second.p01;
        w *= (recorded == truth) ? (1 - flip) : flip;
        if (recorded) key |= std::size_t(1) << measures[j].cbit;
      }
      if (w > 0) out[key] += w;
    }
  }
  return out;
}

// --- configuration text format -----------------------------------------------

// Line format, `#` comments allowed:
//   noise <family> <p> <gate> [<gate>...] [on q0,q1,...]
//   noise decoherence <t_gate> <T1> <T2> <gate> [...] [on ...]
//   readout <qubit> <p01> <p10>
inline NoiseModel parse_noise_config(const std::string& text) {
  NoiseModel nm;
  std::istringstream in(text);
  std::string line;
  std::uint32_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos)
      line.erase(pos);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    auto fail = [&](const std::string& msg) {
      throw ParseError(ParseErrorKind::Syntax, lineno, 0, msg);
    };
    if (word == "noise") {
      std::string fam_name;
      if (!(ls >> fam_name)) fail("missing channel family");
      auto fam = channel_family_from_name(fam_name);
      if (!fam) fail("unknown channel family '" + fam_name + "'");
      KrausChannel ch;
      if (*fam == ChannelFamily::Decoherence) {
        DecoherenceParams dp;
        if (!(ls >> dp.t_gate >> dp.t1 >> dp.t2))
          fail("decoherence needs t_gate T1 T2");
        ch = make_decoherence_channel(dp);
      } else {
        double prob;
        if (!(ls >> prob)) fail("missing probability");
        ch = make_channel(*fam, prob);
      }
      std::vector<GateKind> kinds;
      std::optional<std::vector<std::uint32_t>> qubits;
      while (ls >> word) {
        if (word == "on") {
          std::string list;
          if (!(ls >> list)) fail("missing qubit list after 'on'");
          qubits.emplace();
          std::istringstream qs(list);
          std::string item;
          while (std::getline(qs, item, ','))
            qubits->push_back(static_cast<std::uint32_t>(std::stoul(item)));
          break;
        }
        auto kind = gate_kind_from_name(word);
        if (!kind) fail("unknown gate kind '" + word + "'");
        kinds.push_back(*kind);
      }
      if (kinds.empty()) fail("rule lists no gate kinds");
      for (auto k : kinds) nm.add(k, ch, qubits);
    } else if (word == "readout") {
      std::uint32_t q;
      ReadoutError re;
      if (!(ls >> q >> re.p01 >> re.p10))
        fail("readout needs qubit p01 p10");
      nm.set_readout(q, re);
    } else {
      throw ParseError(ParseErrorKind::UnknownMnemonic, lineno, 0,
                       "expected 'noise' or 'readout', got '" + word + "'");
    }
  }
  return nm;
}

}  // namespace qforge
