#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qforge/error.hpp"
#include "qforge/linalg.hpp"

namespace qforge {

// ---------------------------------------------------------------------------
// Gates
// ---------------------------------------------------------------------------

enum class GateKind {
  I, X, Y, Z, H, S, T,
  RX, RY, RZ, U3,
  CNOT, CZ, SWAP, TOFFOLI,
  Custom,
};

inline const char* gate_name(GateKind k) {
  switch (k) {
    case GateKind::I: return "I";
    case GateKind::X: return "X";
    case GateKind::Y: return "Y";
    case GateKind::Z: return "Z";
    case GateKind::H: return "H";
    case GateKind::S: return "S";
    case GateKind::T: return "T";
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::U3: return "U3";
    case GateKind::CNOT: return "CNOT";
    case GateKind::CZ: return "CZ";
    case GateKind::SWAP: return "SWAP";
    case GateKind::TOFFOLI: return "TOFFOLI";
    case GateKind::Custom: return "CUSTOM";
  }
  return "?";
}

inline std::optional<GateKind> gate_kind_from_name(std::string_view s) {
  static const std::pair<std::string_view, GateKind> table[] = {
      {"I", GateKind::I},       {"X", GateKind::X},
      {"Y", GateKind::Y},       {"Z", GateKind::Z},
      {"H", GateKind::H},       {"S", GateKind::S},
      {"T", GateKind::T},       {"RX", GateKind::RX},
      {"RY", GateKind::RY},     {"RZ", GateKind::RZ},
      {"U3", GateKind::U3},     {"CNOT", GateKind::CNOT},
      {"CZ", GateKind::CZ},     {"SWAP", GateKind::SWAP},
      {"TOFFOLI", GateKind::TOFFOLI},
  };
  for (auto& [name, kind] : table)
    if (name == s) return kind;
  return std::nullopt;
}

// Number of target qubits for a named kind (Custom is dynamic).
inline std::uint32_t gate_target_arity(GateKind k) {
  switch (k) {
    case GateKind::CNOT:
    case GateKind::CZ:
    case GateKind::SWAP: return 2;
    case GateKind::TOFFOLI: return 3;
    case GateKind::Custom: return 0;  // determined by the matrix
    default: return 1;
  }
}

inline std::uint32_t gate_param_arity(GateKind k) {
  switch (k) {
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ: return 1;
    case GateKind::U3: return 3;
    default: return 0;
  }
}

inline bool gate_is_rotation(GateKind k) {
  return k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ;
}

inline bool gate_is_self_inverse(GateKind k) {
  switch (k) {
    case GateKind::I:
    case GateKind::X:
    case GateKind::Y:
    case GateKind::Z:
    case GateKind::H:
    case GateKind::CNOT:
    case GateKind::CZ:
    case GateKind::SWAP:
    case GateKind::TOFFOLI: return true;
    default: return false;
  }
}

// One gate application.  The operand list is the concatenation
// controls ++ targets, ordered most-significant first: for the unitary
// returned by gate_matrix(), controls occupy the high bits of the index and
// targets[back] is the least significant bit.  CNOT/CZ/TOFFOLI carry their
// defining control structure inside `targets` (e.g. CNOT targets are
// {control, target}); `controls` holds only additional controls stacked on
// top, as written by CONTROL blocks.
struct Gate {
  GateKind kind = GateKind::I;
  std::vector<std::uint32_t> targets;
  std::vector<double> params;
  std::vector<std::uint32_t> controls;
  bool dagger = false;
  std::shared_ptr<const CMatrix> custom;  // Custom only; 2^t x 2^t

  // All touched qubits, controls first.
  std::vector<std::uint32_t> qubits() const {
    std::vector<std::uint32_t> q(controls);
    q.insert(q.end(), targets.begin(), targets.end());
    return q;
  }

  bool operator==(const Gate& o) const {
    if (kind != o.kind || targets != o.targets || params != o.params ||
        controls != o.controls || dagger != o.dagger)
      return false;
    if (!custom != !o.custom) return false;
    if (custom && (custom->rows() != o.custom->rows() || *custom != *o.custom))
      return false;
    return true;
  }
};

inline Gate make_gate(GateKind kind, std::vector<std::uint32_t> targets,
                      std::vector<double> params = {}) {
  Gate g;
  g.kind = kind;
  g.targets = std::move(targets);
  g.params = std::move(params);
  return g;
}

inline Gate make_custom_gate(std::vector<std::uint32_t> targets, CMatrix m) {
  Gate g;
  g.kind = GateKind::Custom;
  g.targets = std::move(targets);
  g.custom = std::make_shared<const CMatrix>(std::move(m));
  return g;
}

// ---------------------------------------------------------------------------
// Classical expressions
// ---------------------------------------------------------------------------

enum class BinOp { Add, Sub, Mul, Div, Eq, Ne, Lt, Gt, And, Or, Xor };

inline const char* binop_name(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Gt: return ">";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
    case BinOp::Xor: return "^";
  }
  return "?";
}

// Immutable expression tree over classical bits and 64-bit integers.
class ClassicalExpr {
 public:
  enum class Kind { Constant, CBit, Binary };

  static ClassicalExpr constant(std::int64_t v) {
    ClassicalExpr e;
    e.node_ = std::make_shared<Node>(Node{Kind::Constant, v, 0, BinOp::Add,
                                          nullptr, nullptr});
    return e;
  }
  static ClassicalExpr cbit(std::uint32_t index) {
    ClassicalExpr e;
    e.node_ = std::make_shared<Node>(Node{Kind::CBit, 0, index, BinOp::Add,
                                          nullptr, nullptr});
    return e;
  }
  static ClassicalExpr binary(BinOp op, ClassicalExpr lhs, ClassicalExpr rhs) {
    ClassicalExpr e;
    e.node_ = std::make_shared<Node>(Node{Kind::Binary, 0, 0, op,
                                          std::move(lhs.node_),
                                          std::move(rhs.node_)});
    return e;
  }

  Kind kind() const { return node_->kind; }
  std::int64_t constant_value() const { return node_->value; }
  std::uint32_t cbit_index() const { return node_->cbit; }
  BinOp op() const { return node_->op; }
  ClassicalExpr lhs() const { return wrap(node_->lhs); }
  ClassicalExpr rhs() const { return wrap(node_->rhs); }

  std::int64_t evaluate(std::span<const std::int64_t> cbits) const {
    return eval(node_.get(), cbits);
  }

  // One past the highest classical bit referenced (0 when none).
  std::uint32_t cbits_used() const { return used(node_.get()); }

  bool operator==(const ClassicalExpr& o) const {
    return equal(node_.get(), o.node_.get());
  }

 private:
  struct Node {
    Kind kind;
    std::int64_t value;
    std::uint32_t cbit;
    BinOp op;
    std::shared_ptr<const Node> lhs, rhs;
  };

  static ClassicalExpr wrap(std::shared_ptr<const Node> n) {
    ClassicalExpr e;
    e.node_ = std::move(n);
    return e;
  }

  static std::int64_t eval(const Node* n, std::span<const std::int64_t> c) {
    switch (n->kind) {
      case Kind::Constant: return n->value;
      case Kind::CBit:
        if (n->cbit >= c.size())
          throw ValidationError("classical bit c[" + std::to_string(n->cbit) +
                                "] out of range in expression");
        return c[n->cbit];
      case Kind::Binary: {
        std::int64_t a = eval(n->lhs.get(), c);
        std::int64_t b = eval(n->rhs.get(), c);
        switch (n->op) {
          case BinOp::Add: return a + b;
          case BinOp::Sub: return a - b;
          case BinOp::Mul: return a * b;
          case BinOp::Div:
            if (b == 0) throw Error("division by zero in classical expression");
            return a / b;
          case BinOp::Eq: return a == b;
          case BinOp::Ne: return a != b;
          case BinOp::Lt: return a < b;
          case BinOp::Gt: return a > b;
          case BinOp::And: return (a != 0 && b != 0) ? 1 : 0;
          case BinOp::Or: return (a != 0 || b != 0) ? 1 : 0;
          case BinOp::Xor: return a ^ b;
        }
      }
    }
    throw Error("corrupt classical expression");
  }

  static std::uint32_t used(const Node* n) {
    switch (n->kind) {
      case Kind::Constant: return 0;
      case Kind::CBit: return n->cbit + 1;
      case Kind::Binary:
        return std::max(used(n->lhs.get()), used(n->rhs.get()));
    }
    return 0;
  }

  static bool equal(const Node* a, const Node* b) {
    if (a == b) return true;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
      case Kind::Constant: return a->value == b->value;
      case Kind::CBit: return a->cbit == b->cbit;
      case Kind::Binary:
        return a->op == b->op && equal(a->lhs.get(), b->lhs.get()) &&
               equal(a->rhs.get(), b->rhs.get());
    }
    return false;
  }

  std::shared_ptr<const Node> node_;
};

// ---------------------------------------------------------------------------
// Instructions and programs
// ---------------------------------------------------------------------------

struct Program;

struct GateOp {
  Gate gate;
  bool operator==(const GateOp&) const = default;
};

struct MeasureOp {
  std::uint32_t qubit = 0;
  std::uint32_t cbit = 0;
  bool operator==(const MeasureOp&) const = default;
};

struct IfOp {
  ClassicalExpr condition = ClassicalExpr::constant(0);
  std::shared_ptr<const Program> then_body;
  std::shared_ptr<const Program> else_body;  // may be null
  bool operator==(const IfOp& o) const;
};

struct WhileOp {
  ClassicalExpr condition = ClassicalExpr::constant(0);
  std::shared_ptr<const Program> body;
  bool operator==(const WhileOp& o) const;
};

struct AssignOp {
  std::uint32_t cbit = 0;
  ClassicalExpr expr = ClassicalExpr::constant(0);
  bool operator==(const AssignOp&) const = default;
};

using Instruction = std::variant<GateOp, MeasureOp, IfOp, WhileOp, AssignOp>;

// A quantum program: register sizes plus an instruction list.  Programs are
// value types; nested bodies are shared immutable subprograms, so copies are
// cheap and instances may be read concurrently.
struct Program {
  std::uint32_t qubit_count = 0;
  std::uint32_t cbit_count = 0;
  std::vector<Instruction> body;

  Program() = default;
  Program(std::uint32_t qubits, std::uint32_t cbits)
      : qubit_count(qubits), cbit_count(cbits) {}

  Program& add(Gate g) {
    body.emplace_back(GateOp{std::move(g)});
    return *this;
  }
  Program& add(GateKind kind, std::vector<std::uint32_t> targets,
               std::vector<double> params = {}) {
    return add(make_gate(kind, std::move(targets), std::move(params)));
  }
  Program& measure(std::uint32_t qubit, std::uint32_t cbit) {
    body.emplace_back(MeasureOp{qubit, cbit});
    return *this;
  }
  Program& if_then(ClassicalExpr cond, Program then_body,
                   std::optional<Program> else_body = std::nullopt) {
    IfOp op;
    op.condition = std::move(cond);
    op.then_body = std::make_shared<const Program>(std::move(then_body));
    if (else_body)
      op.else_body = std::make_shared<const Program>(std::move(*else_body));
    body.emplace_back(std::move(op));
    return *this;
  }
  Program& while_loop(ClassicalExpr cond, Program loop_body) {
    WhileOp op;
    op.condition = std::move(cond);
    op.body = std::make_shared<const Program>(std::move(loop_body));
    body.emplace_back(std::move(op));
    return *this;
  }
  Program& assign(std::uint32_t cbit, ClassicalExpr expr) {
    body.emplace_back(AssignOp{cbit, std::move(expr)});
    return *this;
  }

  bool is_flat() const {
    for (const auto& ins : body)
      if (std::holds_alternative<IfOp>(ins) ||
          std::holds_alternative<WhileOp>(ins))
        return false;
    return true;
  }

  std::size_t gate_count() const {
    std::size_t n = 0;
    for (const auto& ins : body) {
      if (std::holds_alternative<GateOp>(ins)) ++n;
      else if (auto* f = std::get_if<IfOp>(&ins)) {
        n += f->then_body->gate_count();
        if (f->else_body) n += f->else_body->gate_count();
      } else if (auto* w = std::get_if<WhileOp>(&ins)) {
        n += w->body->gate_count();
      }
    }
    return n;
  }

  bool operator==(const Program& o) const {
    return qubit_count == o.qubit_count && cbit_count == o.cbit_count &&
           body == o.body;
  }
};

inline bool IfOp::operator==(const IfOp& o) const {
  if (!(condition == o.condition)) return false;
  if (!then_body != !o.then_body) return false;
  if (then_body && !(*then_body == *o.then_body)) return false;
  if (!else_body != !o.else_body) return false;
  if (else_body && !(*else_body == *o.else_body)) return false;
  return true;
}

inline bool WhileOp::operator==(const WhileOp& o) const {
  if (!(condition == o.condition)) return false;
  if (!body != !o.body) return false;
  return !body || *body == *o.body;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace detail {

inline void validate_gate(const Gate& g, std::uint32_t nq,
                          std::vector<std::string>& out,
                          const std::string& where) {
  auto bad = [&](const std::string& msg) { out.push_back(where + msg); };

  if (g.kind == GateKind::Custom) {
    if (!g.custom) {
      bad("custom gate has no matrix");
      return;
    }
    const auto dim = static_cast<std::size_t>(1) << g.targets.size();
    if (g.targets.empty()) bad("custom gate has no targets");
    if (static_cast<std::size_t>(g.custom->rows()) != dim ||
        static_cast<std::size_t>(g.custom->cols()) != dim)
      bad("custom matrix is " + std::to_string(g.custom->rows()) + "x" +
          std::to_string(g.custom->cols()) + " but has " +
          std::to_string(g.targets.size()) + " targets");
    else if (!is_unitary(*g.custom, 1e-10))
      bad("custom matrix is not unitary within 1e-10");
    if (!g.params.empty()) bad("custom gate takes no parameters");
  } else {
    if (g.targets.size() != gate_target_arity(g.kind))
      bad(std::string(gate_name(g.kind)) + " expects " +
          std::to_string(gate_target_arity(g.kind)) + " target(s), got " +
          std::to_string(g.targets.size()));
    if (g.params.size() != gate_param_arity(g.kind))
      bad(std::string(gate_name(g.kind)) + " expects " +
          std::to_string(gate_param_arity(g.kind)) + " parameter(s), got " +
          std::to_string(g.params.size()));
    if (g.custom) bad("named gate carries a custom matrix");
  }

  std::vector<std::uint32_t> all = g.qubits();
  for (auto q : all)
    if (q >= nq)
      bad("qubit q[" + std::to_string(q) + "] out of range (program has " +
          std::to_string(nq) + ")");
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end())
    bad("duplicate qubit operand");
}

inline void validate_body(const Program& p, std::uint32_t nq, std::uint32_t nc,
                          std::vector<std::string>& out,
                          const std::string& where) {
  std::size_t idx = 0;
  for (const auto& ins : p.body) {
    std::string here = where + "instruction " + std::to_string(idx) + ": ";
    if (auto* g = std::get_if<GateOp>(&ins)) {
      validate_gate(g->gate, nq, out, here);
    } else if (auto* m = std::get_if<MeasureOp>(&ins)) {
      if (m->qubit >= nq)
        out.push_back(here + "measured qubit q[" + std::to_string(m->qubit) +
                      "] out of range");
      if (m->cbit >= nc)
        out.push_back(here + "classical bit c[" + std::to_string(m->cbit) +
                      "] out of range");
    } else if (auto* f = std::get_if<IfOp>(&ins)) {
      if (f->condition.cbits_used() > nc)
        out.push_back(here + "condition reads past c[" + std::to_string(nc) +
                      ")");
      if (!f->then_body) {
        out.push_back(here + "missing then-branch");
      } else {
        validate_body(*f->then_body, nq, nc, out, here + "then: ");
      }
      if (f->else_body) validate_body(*f->else_body, nq, nc, out, here + "else: ");
    } else if (auto* w = std::get_if<WhileOp>(&ins)) {
      if (w->condition.cbits_used() > nc)
        out.push_back(here + "condition reads past c[" + std::to_string(nc) +
                      ")");
      if (!w->body) out.push_back(here + "missing loop body");
      else validate_body(*w->body, nq, nc, out, here + "body: ");
    } else if (auto* a = std::get_if<AssignOp>(&ins)) {
      if (a->cbit >= nc)
        out.push_back(here + "assignment to c[" + std::to_string(a->cbit) +
                      "] out of range");
      if (a->expr.cbits_used() > nc)
        out.push_back(here + "expression reads past c[" + std::to_string(nc) +
                      ")");
    }
    ++idx;
  }
}

}  // namespace detail

// Collects human-readable diagnostics; empty means the program is valid.
inline std::vector<std::string> validate(const Program& p) {
  std::vector<std::string> out;
  detail::validate_body(p, p.qubit_count, p.cbit_count, out, "");
  return out;
}

inline void validate_or_throw(const Program& p) {
  auto diags = validate(p);
  if (diags.empty()) return;
  std::string msg = "invalid program:";
  for (const auto& d : diags) msg += "\n  " + d;
  throw ValidationError(msg);
}

}  // namespace qforge
