#pragma once

#include <string>

#include "qforge/circuit.hpp"
#include "qforge/error.hpp"
#include "qforge/ir.hpp"  // format_number
#include "qforge/linalg.hpp"

namespace qforge {

namespace detail {

// Dagger folded into parameters: U3(t,p,l)^† = U3(-t,-l,-p), R(a)^† = R(-a).
inline Gate fold_dagger(const Gate& g) {
  if (!g.dagger) return g;
  Gate out = g;
  out.dagger = false;
  switch (g.kind) {
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
      out.params[0] = -g.params[0];
      return out;
    case GateKind::U3:
      out.params = {-g.params[0], -g.params[2], -g.params[1]};
      return out;
    default:
      if (gate_is_self_inverse(g.kind)) return out;
      out.dagger = true;  // S and T keep the flag for the emitters
      return out;
  }
}

inline void export_reject_modifiers(const Gate& g, const char* target) {
  if (!g.controls.empty())
    throw UnsupportedError(std::string("control modifiers have no ") + target +
                           " form; run the decomposition pass first");
  if (g.kind == GateKind::Custom)
    throw UnsupportedError(std::string("custom unitaries have no ") + target +
                           " form; run the compiler first");
}

}  // namespace detail

// OPENQASM 2.0 text (qelib1 gate set).  Flat gate/measure programs only.
inline std::string emit_qasm(const Program& p) {
  if (!p.is_flat())
    throw UnsupportedError("control flow cannot be expressed in OPENQASM 2.0");
  std::string out = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";
  out += "qreg q[" + std::to_string(p.qubit_count) + "];\n";
  if (p.cbit_count) out += "creg c[" + std::to_string(p.cbit_count) + "];\n";

  auto q = [](std::uint32_t i) { return "q[" + std::to_string(i) + "]"; };
  for (const auto& ins : p.body) {
    if (auto* m = std::get_if<MeasureOp>(&ins)) {
      out += "measure " + q(m->qubit) + " -> c[" + std::to_string(m->cbit) +
             "];\n";
      continue;
    }
    if (std::holds_alternative<AssignOp>(ins))
      throw UnsupportedError(
          "classical assignment cannot be expressed in OPENQASM 2.0");
    const Gate g = detail::fold_dagger(std::get<GateOp>(ins).gate);
    detail::export_reject_modifiers(g, "OPENQASM 2.0");
    switch (g.kind) {
      case GateKind::I: out += "id " + q(g.targets[0]) + ";\n"; break;
      case GateKind::X: out += "x " + q(g.targets[0]) + ";\n"; break;
      case GateKind::Y: out += "y " + q(g.targets[0]) + ";\n"; break;
      case GateKind::Z: out += "z " + q(g.targets[0]) + ";\n"; break;
      case GateKind::H: out += "h " + q(g.targets[0]) + ";\n"; break;
      case GateKind::S:
        out += (g.dagger ? "sdg " : "s ") + q(g.targets[0]) + ";\n";
        break;
      case GateKind::T:
        out += (g.dagger ? "tdg " : "t ") + q(g.targets[0]) + ";\n";
        break;
      case GateKind::RX:
        out += "rx(" + detail::format_number(g.params[0]) + ") " +
               q(g.targets[0]) + ";\n";
        break;
      case GateKind::RY:
        out += "ry(" + detail::format_number(g.params[0]) + ") " +
               q(g.targets[0]) + ";\n";
        break;
      case GateKind::RZ:
        out += "rz(" + detail::format_number(g.params[0]) + ") " +
               q(g.targets[0]) + ";\n";
        break;
      case GateKind::U3:
        out += "u3(" + detail::format_number(g.params[0]) + "," +
               detail::format_number(g.params[1]) + "," +
               detail::format_number(g.params[2]) + ") " + q(g.targets[0]) +
               ";\n";
        break;
      case GateKind::CNOT:
        out += "cx " + q(g.targets[0]) + "," + q(g.targets[1]) + ";\n";
        break;
      case GateKind::CZ:
        out += "cz " + q(g.targets[0]) + "," + q(g.targets[1]) + ";\n";
        break;
      case GateKind::SWAP:
        out += "swap " + q(g.targets[0]) + "," + q(g.targets[1]) + ";\n";
        break;
      case GateKind::TOFFOLI:
        out += "ccx " + q(g.targets[0]) + "," + q(g.targets[1]) + "," +
               q(g.targets[2]) + ";\n";
        break;
      case GateKind::Custom:
        break;  // rejected above
    }
  }
  return out;
}

// Quil text.  U3 lowers to RZ/RY/RZ; S^† and T^† lower to PHASE.
inline std::string emit_quil(const Program& p) {
  if (!p.is_flat())
    throw UnsupportedError("control flow cannot be expressed in Quil here");
  std::string out;
  if (p.cbit_count)
    out += "DECLARE ro BIT[" + std::to_string(p.cbit_count) + "]\n";

  auto qs = [](const Gate& g) {
    std::string s;
    for (auto t : g.targets) s += " " + std::to_string(t);
    return s;
  };
  for (const auto& ins : p.body) {
    if (auto* m = std::get_if<MeasureOp>(&ins)) {
      out += "MEASURE " + std::to_string(m->qubit) + " ro[" +
             std::to_string(m->cbit) + "]\n";
      continue;
    }
    if (std::holds_alternative<AssignOp>(ins))
      throw UnsupportedError("classical assignment cannot be expressed here");
    const Gate g = detail::fold_dagger(std::get<GateOp>(ins).gate);
    detail::export_reject_modifiers(g, "Quil");
    switch (g.kind) {
      case GateKind::I:
      case GateKind::X:
      case GateKind::Y:
      case GateKind::Z:
      case GateKind::H:
        out += std::string(gate_name(g.kind)) + qs(g) + "\n";
        break;
      case GateKind::S:
        out += g.dagger ? "PHASE(" + detail::format_number(-kPi / 2) + ")" +
                              qs(g) + "\n"
                        : "S" + qs(g) + "\n";
        break;
      case GateKind::T:
        out += g.dagger ? "PHASE(" + detail::format_number(-kPi / 4) + ")" +
                              qs(g) + "\n"
                        : "T" + qs(g) + "\n";
        break;
      case GateKind::RX:
      case GateKind::RY:
      case GateKind::RZ:
        out += std::string(gate_name(g.kind)) + "(" +
               detail::format_number(g.params[0]) + ")" + qs(g) + "\n";
        break;
      case GateKind::U3: {
        const std::string t = std::to_string(g.targets[0]);
        out += "RZ(" + detail::format_number(g.params[2]) + ") " + t + "\n";
        out += "RY(" + detail::format_number(g.params[0]) + ") " + t + "\n";
        out += "RZ(" + detail::format_number(g.params[1]) + ") " + t + "\n";
        break;
      }
      case GateKind::CNOT:
      case GateKind::CZ:
      case GateKind::SWAP:
        out += std::string(gate_name(g.kind)) + qs(g) + "\n";
        break;
      case GateKind::TOFFOLI:
        out += "CCNOT" + qs(g) + "\n";
        break;
      case GateKind::Custom:
        break;  // rejected above
    }
  }
  return out;
}

}  // namespace qforge
