#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "qforge/circuit.hpp"
#include "qforge/error.hpp"
#include "qforge/pauli.hpp"
#include "qforge/simulator.hpp"
#include "qforge/statevector.hpp"

namespace qforge {

// <psi|H|psi> where |psi> is the state prepared by `p` from |0...0>.
// Requires a Hermitian operator and a measurement-free program; the
// imaginary residue must stay below 1e-10 and is then dropped.
inline double expectation(const Program& p, const PauliOperator& H,
                          const SimOptions& opts = {}) {
  opts.validate();
  if (!H.is_hermitian())
    throw ValidationError("expectation requires a Hermitian operator");
  if (H.num_qubits() > p.qubit_count)
    throw ValidationError("operator touches qubits beyond the program");
  for (const auto& ins : p.body)
    if (!std::holds_alternative<GateOp>(ins))
      throw ValidationError(
          "expectation requires a measurement-free gate program");

  const KernelOptions ko = opts.kernel_options();
  StateVector psi(p.qubit_count);
  for (const auto& ins : p.body)
    psi.apply_gate(std::get<GateOp>(ins).gate, ko);

  cdouble acc(0, 0);
  for (const auto& [term, coeff] : H.terms()) {
    StateVector hpsi = psi;
    for (const auto& [q, letter] : term) {
      const GateKind k = letter == 'X'   ? GateKind::X
                         : letter == 'Y' ? GateKind::Y
                                         : GateKind::Z;
      hpsi.apply_gate(make_gate(k, {q}), ko);
    }
    cdouble dot(0, 0);
    for (std::size_t i = 0; i < psi.dimension(); ++i)
      dot += std::conj(psi.amplitude(i)) * hpsi.amplitude(i);
    acc += coeff * dot;
  }
  if (std::abs(acc.imag()) > 1e-10)
    throw Error("expectation has a non-real residue of " +
                std::to_string(acc.imag()) + "; operator or state corrupt");
  return acc.real();
}

// A circuit template whose rotation angles may reference named parameters.
// Fixed gates are stored as-is; each symbolic slot remembers which gate it
// parameterizes.  bind() fills every slot and returns a runnable Program.
class ParamCircuit {
 public:
  explicit ParamCircuit(std::uint32_t qubits, std::uint32_t cbits = 0)
      : template_(qubits, cbits) {}

  ParamCircuit& add(Gate g) {
    template_.add(std::move(g));
    return *this;
  }
  ParamCircuit& add(GateKind kind, std::vector<std::uint32_t> targets,
                    std::vector<double> params = {}) {
    template_.add(kind, std::move(targets), std::move(params));
    return *this;
  }

  // A rotation whose angle is the named parameter.  Only RX/RY/RZ angles may
  // be symbolic.
  ParamCircuit& add_param(GateKind kind, std::uint32_t target,
                          const std::string& name) {
    if (!gate_is_rotation(kind))
      throw UnsupportedError("parameter '" + name +
                             "' used in a non-rotation position (" +
                             gate_name(kind) + ")");
    slots_.push_back({template_.body.size(), name});
    template_.add(kind, {target}, {0.0});
    if (std::find(names_.begin(), names_.end(), name) == names_.end())
      names_.push_back(name);
    return *this;
  }

  ParamCircuit& measure(std::uint32_t qubit, std::uint32_t cbit) {
    template_.measure(qubit, cbit);
    return *this;
  }

  // Parameter names in order of first use.
  const std::vector<std::string>& parameter_names() const { return names_; }
  std::size_t slot_count() const { return slots_.size(); }
  std::uint32_t qubit_count() const { return template_.qubit_count; }

  Program bind(const std::map<std::string, double>& values) const {
    Program p = template_;
    for (const auto& slot : slots_) {
      auto it = values.find(slot.name);
      if (it == values.end())
        throw ValidationError("parameter '" + slot.name + "' is unbound");
      std::get<GateOp>(p.body[slot.index]).gate.params[0] = it->second;
    }
    return p;
  }

  // bind() with one slot's angle shifted, for the parameter-shift rule.
  Program bind_shifted(const std::map<std::string, double>& values,
                       std::size_t slot, double delta) const {
    Program p = bind(values);
    std::get<GateOp>(p.body[slots_.at(slot).index]).gate.params[0] += delta;
    return p;
  }

  // Slots parameterized by `name`, in program order.
  std::vector<std::size_t> slots_of(const std::string& name) const {
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < slots_.size(); ++s)
      if (slots_[s].name == name) out.push_back(s);
    return out;
  }

 private:
  struct Slot {
    std::size_t index;  // position in template_.body
    std::string name;
  };
  Program template_;
  std::vector<Slot> slots_;
  std::vector<std::string> names_;
};

// Gradient of <H> with respect to every named parameter, by the
// parameter-shift rule: d<H>/dtheta = (<H>(theta+pi/2) - <H>(theta-pi/2))/2,
// summed over a parameter's occurrences.  Order matches parameter_names().
inline std::vector<double> gradient(const ParamCircuit& pc,
                                    const PauliOperator& H,
                                    const std::map<std::string, double>& at,
                                    const SimOptions& opts = {}) {
  std::vector<double> grad;
  grad.reserve(pc.parameter_names().size());
  for (const auto& name : pc.parameter_names()) {
    double g = 0.0;
    for (auto slot : pc.slots_of(name)) {
      const double up = expectation(pc.bind_shifted(at, slot, kPi / 2), H, opts);
      const double dn = expectation(pc.bind_shifted(at, slot, -kPi / 2), H, opts);
      g += 0.5 * (up - dn);
    }
    grad.push_back(g);
  }
  return grad;
}

}  // namespace qforge
