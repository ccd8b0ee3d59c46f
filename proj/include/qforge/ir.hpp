#pragma once

#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qforge/circuit.hpp"
#include "qforge/error.hpp"

namespace qforge {

// Text program format, one instruction per line:
//   QINIT n / CREG n            register headers (QINIT first)
//   <GATE> q[i],q[j],(p1,p2)    mnemonic, targets, optional parameter tuple
//   CUSTOM q[...],(re,im,...)   dense unitary, row-major entry pairs
//   DAGGER / ENDDAGGER          adjoint of the enclosed gates
//   CONTROL q[i] / ENDCONTROL   adds a control to the enclosed gates
//   MEASURE q[i],c[j]
//   QIF expr / ELSE / ENDQIF
//   QWHILE expr / ENDQWHILE
//   c[i] = expr
// `#` starts a comment; blank lines are ignored.  Angles are printed with 17
// significant digits so emit/parse round-trips bit-exactly.

namespace detail {

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void emit_expr_text(const ClassicalExpr& e, bool top, std::string& out) {
  switch (e.kind()) {
    case ClassicalExpr::Kind::Constant:
      out += std::to_string(e.constant_value());
      return;
    case ClassicalExpr::Kind::CBit:
      out += "c[";
      out += std::to_string(e.cbit_index());
      out += ']';
      return;
    case ClassicalExpr::Kind::Binary:
      // Children are always parenthesized, so precedence never ambiguates.
      if (!top) out += '(';
      emit_expr_text(e.lhs(), false, out);
      out += binop_name(e.op());
      emit_expr_text(e.rhs(), false, out);
      if (!top) out += ')';
      return;
  }
}

inline std::string expr_text(const ClassicalExpr& e) {
  std::string s;
  emit_expr_text(e, true, s);
  return s;
}

inline void emit_gate_ir(const Gate& g, std::string& out) {
  for (auto c : g.controls) {
    out += "CONTROL q[";
    out += std::to_string(c);
    out += "]\n";
  }
  if (g.dagger) out += "DAGGER\n";
  out += gate_name(g.kind);
  out += ' ';
  for (std::size_t i = 0; i < g.targets.size(); ++i) {
    if (i) out += ',';
    out += "q[";
    out += std::to_string(g.targets[i]);
    out += ']';
  }
  if (g.kind == GateKind::Custom) {
    out += ",(";
    const CMatrix& m = *g.custom;
    bool first = true;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (!first) out += ',';
        first = false;
        out += format_number(m(r, c).real());
        out += ',';
        out += format_number(m(r, c).imag());
      }
    out += ')';
  } else if (!g.params.empty()) {
    out += ",(";
    for (std::size_t i = 0; i < g.params.size(); ++i) {
      if (i) out += ',';
      out += format_number(g.params[i]);
    }
    out += ')';
  }
  out += '\n';
  if (g.dagger) out += "ENDDAGGER\n";
  for (std::size_t i = 0; i < g.controls.size(); ++i) out += "ENDCONTROL\n";
}

inline void emit_body_ir(const Program& p, std::string& out) {
  for (const auto& ins : p.body) {
    if (auto* g = std::get_if<GateOp>(&ins)) {
      emit_gate_ir(g->gate, out);
    } else if (auto* m = std::get_if<MeasureOp>(&ins)) {
      out += "MEASURE q[" + std::to_string(m->qubit) + "],c[" +
             std::to_string(m->cbit) + "]\n";
    } else if (auto* f = std::get_if<IfOp>(&ins)) {
      out += "QIF " + expr_text(f->condition) + "\n";
      emit_body_ir(*f->then_body, out);
      if (f->else_body) {
        out += "ELSE\n";
        emit_body_ir(*f->else_body, out);
      }
      out += "ENDQIF\n";
    } else if (auto* w = std::get_if<WhileOp>(&ins)) {
      out += "QWHILE " + expr_text(w->condition) + "\n";
      emit_body_ir(*w->body, out);
      out += "ENDQWHILE\n";
    } else if (auto* a = std::get_if<AssignOp>(&ins)) {
      out += "c[" + std::to_string(a->cbit) + "] = " + expr_text(a->expr) +
             "\n";
    }
  }
}

}  // namespace detail

inline std::string emit_ir(const Program& p) {
  std::string out = "QINIT " + std::to_string(p.qubit_count) + "\nCREG " +
                    std::to_string(p.cbit_count) + "\n";
  detail::emit_body_ir(p, out);
  return out;
}

namespace detail {

// Recursive-descent expression parser over one line's tail.  Precedence,
// loosest first: || < && < ^ < ==,!= < <,> < +,- < *,/.  Operands are
// integers (optionally negative) and c[i] references.
class ExprParser {
 public:
  ExprParser(std::string_view s, std::uint32_t line, std::size_t col0)
      : s_(s), line_(line), col0_(col0) {}

  ClassicalExpr parse() {
    ClassicalExpr e = parse_binary(1);
    skip_ws();
    if (pos_ != s_.size())
      fail("unexpected trailing text in expression", pos_);
    return e;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  std::uint32_t line_;
  std::size_t col0_;

  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    throw ParseError(ParseErrorKind::Syntax, line_,
                     static_cast<std::uint32_t>(col0_ + at + 1), msg);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }

  static int precedence(BinOp op) {
    switch (op) {
      case BinOp::Or: return 1;
      case BinOp::And: return 2;
      case BinOp::Xor: return 3;
      case BinOp::Eq:
      case BinOp::Ne: return 4;
      case BinOp::Lt:
      case BinOp::Gt: return 5;
      case BinOp::Add:
      case BinOp::Sub: return 6;
      case BinOp::Mul:
      case BinOp::Div: return 7;
    }
    return 0;
  }

  std::optional<BinOp> peek_op() {
    skip_ws();
    if (pos_ >= s_.size()) return std::nullopt;
    auto two = s_.substr(pos_, 2);
    if (two == "||") return BinOp::Or;
    if (two == "&&") return BinOp::And;
    if (two == "==") return BinOp::Eq;
    if (two == "!=") return BinOp::Ne;
    switch (s_[pos_]) {
      case '^': return BinOp::Xor;
      case '<': return BinOp::Lt;
      case '>': return BinOp::Gt;
      case '+': return BinOp::Add;
      case '-': return BinOp::Sub;
      case '*': return BinOp::Mul;
      case '/': return BinOp::Div;
      default: return std::nullopt;
    }
  }

  void consume_op(BinOp op) {
    pos_ += (op == BinOp::Or || op == BinOp::And || op == BinOp::Eq ||
             op == BinOp::Ne)
                ? 2
                : 1;
  }

  ClassicalExpr parse_binary(int min_prec) {
    ClassicalExpr lhs = parse_primary();
    while (auto op = peek_op()) {
      const int p = precedence(*op);
      if (p < min_prec) break;
      consume_op(*op);
      ClassicalExpr rhs = parse_binary(p + 1);
      lhs = ClassicalExpr::binary(*op, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  ClassicalExpr parse_primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("expected an operand", pos_);
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      ClassicalExpr e = parse_binary(1);
      skip_ws();
      if (pos_ >= s_.size() || s_[pos_] != ')')
        fail("expected ')'", pos_);
      ++pos_;
      return e;
    }
    if (c == 'c' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '[') {
      const std::size_t open = pos_ + 1;
      std::size_t close = s_.find(']', open);
      if (close == std::string_view::npos) fail("expected ']'", open);
      std::uint32_t idx = 0;
      auto piece = s_.substr(open + 1, close - open - 1);
      auto [end, ec] =
          std::from_chars(piece.data(), piece.data() + piece.size(), idx);
      if (ec != std::errc() || end != piece.data() + piece.size())
        fail("expected a classical bit index", open + 1);
      pos_ = close + 1;
      return ClassicalExpr::cbit(idx);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && pos_ + 1 < s_.size() &&
         std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])))) {
      std::int64_t v = 0;
      auto [end, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
      if (ec != std::errc()) fail("bad integer literal", pos_);
      pos_ = static_cast<std::size_t>(end - s_.data());
      return ClassicalExpr::constant(v);
    }
    fail("expected an operand", pos_);
  }
};

struct IrBlockFrame {
  enum class Type { Top, Dagger, Control, IfThen, IfElse, While };
  Type type = Type::Top;
  std::uint32_t open_line = 0;
  std::uint32_t control_qubit = 0;
  ClassicalExpr condition = ClassicalExpr::constant(0);
  std::vector<Instruction> body;
  std::vector<Instruction> then_body;  // filled when ELSE is reached
};

inline const char* ir_block_name(IrBlockFrame::Type t) {
  switch (t) {
    case IrBlockFrame::Type::Dagger: return "DAGGER";
    case IrBlockFrame::Type::Control: return "CONTROL";
    case IrBlockFrame::Type::IfThen:
    case IrBlockFrame::Type::IfElse: return "QIF";
    case IrBlockFrame::Type::While: return "QWHILE";
    default: return "?";
  }
}

// Splits on commas outside parentheses; yields trimmed pieces with their
// 0-based offsets into `rest`.
inline std::vector<std::pair<std::string, std::size_t>> split_operands(
    std::string_view rest) {
  std::vector<std::pair<std::string, std::size_t>> items;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= rest.size(); ++i) {
    if (i == rest.size() || (rest[i] == ',' && depth == 0)) {
      std::size_t a = start, b = i;
      while (a < b && std::isspace(static_cast<unsigned char>(rest[a]))) ++a;
      while (b > a && std::isspace(static_cast<unsigned char>(rest[b - 1])))
        --b;
      items.emplace_back(std::string(rest.substr(a, b - a)), a);
      start = i + 1;
    } else if (rest[i] == '(') {
      ++depth;
    } else if (rest[i] == ')') {
      --depth;
    }
  }
  if (items.size() == 1 && items[0].first.empty()) items.clear();
  return items;
}

}  // namespace detail

inline Program parse_ir(const std::string& text) {
  using Frame = detail::IrBlockFrame;
  std::vector<Frame> stack(1);

  std::uint32_t nq = 0, nc = 0;
  bool have_qinit = false, have_creg = false, seen_instruction = false;

  auto gate_block_depth = [&]() {
    for (const auto& f : stack)
      if (f.type == Frame::Type::Dagger || f.type == Frame::Type::Control)
        return true;
    return false;
  };

  auto parse_uint = [](std::string_view piece, std::uint32_t line,
                       std::size_t col, const char* what) {
    std::uint32_t v = 0;
    auto [end, ec] =
        std::from_chars(piece.data(), piece.data() + piece.size(), v);
    if (ec != std::errc() || end != piece.data() + piece.size())
      throw ParseError(ParseErrorKind::Syntax, line,
                       static_cast<std::uint32_t>(col + 1),
                       std::string("expected ") + what);
    return v;
  };

  // Parses "q[i]" / "c[i]"; returns the index.
  auto parse_ref = [&](const std::string& item, char reg, std::uint32_t line,
                       std::size_t col) {
    if (item.size() < 4 || item[0] != reg || item[1] != '[' ||
        item.back() != ']')
      throw ParseError(ParseErrorKind::Syntax, line,
                       static_cast<std::uint32_t>(col + 1),
                       std::string("expected ") + reg + "[index], got '" +
                           item + "'");
    return parse_uint(std::string_view(item).substr(2, item.size() - 3), line,
                      col + 2, "a register index");
  };

  std::uint32_t lineno = 0;
  std::size_t cursor = 0;
  while (cursor <= text.size()) {
    std::size_t eol = text.find('\n', cursor);
    if (eol == std::string::npos) eol = text.size();
    std::string line = text.substr(cursor, eol - cursor);
    cursor = eol + 1;
    ++lineno;
    if (cursor > text.size() && line.empty()) break;

    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' ||
                             line.back() == '\t'))
      line.pop_back();
    std::size_t indent = 0;
    while (indent < line.size() &&
           std::isspace(static_cast<unsigned char>(line[indent])))
      ++indent;
    if (indent == line.size()) continue;

    const std::string_view body_view = std::string_view(line).substr(indent);
    const std::uint32_t col1 = static_cast<std::uint32_t>(indent + 1);

    // Assignment lines start with a classical bit reference.
    if (body_view.rfind("c[", 0) == 0) {
      if (!have_qinit)
        throw ParseError(ParseErrorKind::Syntax, lineno, col1,
                         "QINIT must precede instructions");
      if (gate_block_depth())
        throw ParseError(ParseErrorKind::Syntax, lineno, col1,
                         "assignment not allowed inside DAGGER/CONTROL");
      const std::size_t close = body_view.find(']');
      if (close == std::string_view::npos)
        throw ParseError(ParseErrorKind::Syntax, lineno, col1, "expected ']'");
      const std::uint32_t cb = parse_uint(body_view.substr(2, close - 2),
                                          lineno, indent + 2, "a cbit index");
      if (cb >= nc)
        throw ParseError(ParseErrorKind::RangeError, lineno, col1,
                         "c[" + std::to_string(cb) + "] exceeds CREG " +
                             std::to_string(nc));
      std::size_t eq = close + 1;
      while (eq < body_view.size() &&
             std::isspace(static_cast<unsigned char>(body_view[eq])))
        ++eq;
      if (eq >= body_view.size() || body_view[eq] != '=' ||
          (eq + 1 < body_view.size() && body_view[eq + 1] == '='))
        throw ParseError(ParseErrorKind::Syntax, lineno,
                         static_cast<std::uint32_t>(indent + eq + 1),
                         "expected '=' in assignment");
      detail::ExprParser ep(body_view.substr(eq + 1), lineno,
                            indent + eq + 1);
      ClassicalExpr rhs = ep.parse();
      if (rhs.cbits_used() > nc)
        throw ParseError(ParseErrorKind::RangeError, lineno, col1,
                         "expression reads c[" +
                             std::to_string(rhs.cbits_used() - 1) +
                             "] but CREG is " + std::to_string(nc));
      stack.back().body.emplace_back(AssignOp{cb, std::move(rhs)});
      seen_instruction = true;
      continue;
    }

    // Mnemonic word.
    std::size_t wend = 0;
    while (wend < body_view.size() &&
           !std::isspace(static_cast<unsigned char>(body_view[wend])))
      ++wend;
    const std::string word(body_view.substr(0, wend));
    std::string_view rest = body_view.substr(wend);
    while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest[0])))
      rest.remove_prefix(1);
    const std::size_t rest_off = indent + (body_view.size() - rest.size());

    if (word == "QINIT") {
      if (have_qinit)
        throw ParseError(ParseErrorKind::Syntax, lineno, col1,
                         "duplicate QINIT");
      if (seen_instruction || have_creg)
        throw ParseError(ParseErrorKind::Syntax, lineno, col1,
                         "QINIT must be the first statement");
      nq = parse_uint(rest, lineno, rest_off, "a qubit count");
      have_qinit = true;
      continue;
    }
    if (word == "CREG") {
      if (!have_qinit)
        throw ParseError(ParseErrorKind::Syntax, lineno, col1,
                         "CREG requires a preceding QINIT");
      if (have_creg)
        throw ParseError(ParseErrorKind::Syntax, lineno, col1,
                         "duplicate CREG");
      if (seen_instruction)
        throw ParseError(ParseErrorKind::Syntax, lineno, col1,
                         "CREG must precede instructions");
      nc = parse_uint(rest, lineno, rest_off, "a cbit count");
      have_creg = true;
      continue;
    }

    if (!have_qinit)
      throw ParseError(ParseErrorKind::Syntax, lineno, col1,
                       "QINIT must precede instructions");
    seen_instruction = true;

    auto require_no_tail = [&]() {
      if (!rest.empty())
        throw ParseError(ParseErrorKind::Syntax, lineno,
                         static_cast<std::uint32_t>(rest_off + 1),
                         "unexpected text after " + word);
    };

    if (word == "DAGGER") {
      require_no_tail();
      Frame f;
      f.type = Frame::Type::Dagger;
      f.open_line = lineno;
      stack.push_back(std::move(f));
      continue;
    }
    if (word == "ENDDAGGER") {
      require_no_tail();
      if (stack.back().type != Frame::Type::Dagger)
        throw ParseError(ParseErrorKind::Syntax, lineno, col1,
                         "ENDDAGGER without matching DAGGER");
      Frame f = std::move(stack.back());
      stack.pop_back();
      // The adjoint of a sequence reverses it and daggers each gate.
      for (auto it = f.body.rbegin(); it != f.body.rend(); ++it) {
        Gate g = std::get<GateOp>(*it).gate;
        g.dagger = !g.dagger;
        stack.back().body.emplace_back(GateOp{std::move(g)});
      }
      continue;
    }
    if (word == "CONTROL") {
      const auto items = detail::split_operands(rest);
      if (items.size() != 1)
        throw ParseError(ParseErrorKind::ArityError, lineno, col1,
                         "CONTROL takes exactly one qubit");
      const std::uint32_t cq =
          parse_ref(items[0].first, 'q', lineno, rest_off + items[0].second);
      if (cq >= nq)
        throw ParseError(ParseErrorKind::RangeError, lineno, col1,
                         "q[" + std::to_string(cq) + "] exceeds QINIT " +
                             std::to_string(nq));
      Frame f;
      f.type = Frame::Type::Control;
      f.open_line = lineno;
      f.control_qubit = cq;
      stack.push_back(std::move(f));
      continue;
    }
    if (word == "ENDCONTROL") {
      require_no_tail();
      if (stack.back().type != Frame::Type::Control)
        throw ParseError(ParseErrorKind::Syntax, lineno, col1,
                         "ENDCONTROL without matching CONTROL");
      Frame f = std::move(stack.back());
      stack.pop_back();
      for (auto& ins : f.body) {
        Gate g = std::get<GateOp>(ins).gate;
        g.controls.insert(g.controls.begin(), f.control_qubit);
        stack.back().body.emplace_back(GateOp{std::move(g)});
      }
      continue;
    }
    if (word == "QIF" || word == "QWHILE") {
      if (gate_block_depth())
        throw ParseError(ParseErrorKind::Syntax, lineno, col1,
                         word + " not allowed inside DAGGER/CONTROL");
      detail::ExprParser ep(rest, lineno, rest_off);
      Frame f;
      f.type = word == "QIF" ? Frame::Type::IfThen : Frame::Type::While;
      f.open_line = lineno;
      f.condition = ep.parse();
      if (f.condition.cbits_used() > nc)
        throw ParseError(ParseErrorKind::RangeError, lineno, col1,
                         "condition reads c[" +
                             std::to_string(f.condition.cbits_used() - 1) +
                             "] but CREG is " + std::to_string(nc));
      stack.push_back(std::move(f));
      continue;
    }
    if (word == "ELSE") {
      require_no_tail();
      if (stack.back().type != Frame::Type::IfThen)
        throw ParseError(ParseErrorKind::Syntax, lineno, col1,
                         "ELSE outside QIF");
      stack.back().type = Frame::Type::IfElse;
      stack.back().then_body = std::move(stack.back().body);
      stack.back().body.clear();
      continue;
    }
    if (word == "ENDQIF") {
      require_no_tail();
      auto t = stack.back().type;
      if (t != Frame::Type::IfThen && t != Frame::Type::IfElse)
        throw ParseError(ParseErrorKind::Syntax, lineno, col1,
                         "ENDQIF without matching QIF");
      Frame f = std::move(stack.back());
      stack.pop_back();
      IfOp op;
      op.condition = std::move(f.condition);
      Program then_p(nq, nc);
      then_p.body =
          t == Frame::Type::IfElse ? std::move(f.then_body) : std::move(f.body);
      op.then_body = std::make_shared<const Program>(std::move(then_p));
      if (t == Frame::Type::IfElse) {
        Program else_p(nq, nc);
        else_p.body = std::move(f.body);
        op.else_body = std::make_shared<const Program>(std::move(else_p));
      }
      stack.back().body.emplace_back(std::move(op));
      continue;
    }
    if (word == "ENDQWHILE") {
      require_no_tail();
      if (stack.back().type != Frame::Type::While)
        throw ParseError(ParseErrorKind::Syntax, lineno, col1,
                         "ENDQWHILE without matching QWHILE");
      Frame f = std::move(stack.back());
      stack.pop_back();
      WhileOp op;
      op.condition = std::move(f.condition);
      Program body_p(nq, nc);
      body_p.body = std::move(f.body);
      op.body = std::make_shared<const Program>(std::move(body_p));
      stack.back().body.emplace_back(std::move(op));
      continue;
    }
    if (word == "MEASURE") {
      if (gate_block_depth())
        throw ParseError(ParseErrorKind::Syntax, lineno, col1,
                         "MEASURE not allowed inside DAGGER/CONTROL");
      const auto items = detail::split_operands(rest);
      if (items.size() != 2)
        throw ParseError(ParseErrorKind::ArityError, lineno, col1,
                         "MEASURE expects q[i],c[j]");
      const std::uint32_t q =
          parse_ref(items[0].first, 'q', lineno, rest_off + items[0].second);
      const std::uint32_t c =
          parse_ref(items[1].first, 'c', lineno, rest_off + items[1].second);
      if (q >= nq)
        throw ParseError(ParseErrorKind::RangeError, lineno, col1,
                         "q[" + std::to_string(q) + "] exceeds QINIT " +
                             std::to_string(nq));
      if (c >= nc)
        throw ParseError(ParseErrorKind::RangeError, lineno, col1,
                         "c[" + std::to_string(c) + "] exceeds CREG " +
                             std::to_string(nc));
      stack.back().body.emplace_back(MeasureOp{q, c});
      continue;
    }

    // Gate line.
    const auto kind = gate_kind_from_name(word);
    const bool custom = word == "CUSTOM";
    if (!kind && !custom)
      throw ParseError(ParseErrorKind::UnknownMnemonic, lineno, col1,
                       "unknown mnemonic '" + word + "'");

    auto items = detail::split_operands(rest);
    std::vector<double> params;
    bool have_params = false;
    if (!items.empty() && !items.back().first.empty() &&
        items.back().first.front() == '(') {
      const auto& [ptext, poff] = items.back();
      if (ptext.back() != ')')
        throw ParseError(ParseErrorKind::Syntax, lineno,
                         static_cast<std::uint32_t>(rest_off + poff + 1),
                         "unterminated parameter tuple");
      for (auto& [piece, off] : detail::split_operands(
               std::string_view(ptext).substr(1, ptext.size() - 2))) {
        const char* begin = piece.c_str();
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin || *end != '\0')
          throw ParseError(ParseErrorKind::Syntax, lineno,
                           static_cast<std::uint32_t>(rest_off + poff + 2 + off),
                           "expected a number, got '" + piece + "'");
        params.push_back(v);
      }
      have_params = true;
      items.pop_back();
    }

    Gate g;
    for (auto& [item, off] : items) {
      if (!item.empty() && item.front() == '(')
        throw ParseError(ParseErrorKind::Syntax, lineno,
                         static_cast<std::uint32_t>(rest_off + off + 1),
                         "parameter tuple must come last");
      const std::uint32_t q = parse_ref(item, 'q', lineno, rest_off + off);
      if (q >= nq)
        throw ParseError(ParseErrorKind::RangeError, lineno, col1,
                         "q[" + std::to_string(q) + "] exceeds QINIT " +
                             std::to_string(nq));
      g.targets.push_back(q);
    }

    if (custom) {
      if (g.targets.empty())
        throw ParseError(ParseErrorKind::ArityError, lineno, col1,
                         "CUSTOM needs at least one target");
      const std::size_t dim = std::size_t(1) << g.targets.size();
      if (params.size() != 2 * dim * dim)
        throw ParseError(ParseErrorKind::ArityError, lineno, col1,
                         "CUSTOM on " + std::to_string(g.targets.size()) +
                             " qubit(s) needs " + std::to_string(2 * dim * dim) +
                             " matrix numbers, got " +
                             std::to_string(params.size()));
      CMatrix m(dim, dim);
      std::size_t k = 0;
      for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c, k += 2)
          m(r, c) = cdouble(params[k], params[k + 1]);
      g.kind = GateKind::Custom;
      g.custom = std::make_shared<const CMatrix>(std::move(m));
    } else {
      g.kind = *kind;
      if (g.targets.size() != gate_target_arity(g.kind))
        throw ParseError(ParseErrorKind::ArityError, lineno, col1,
                         word + " expects " +
                             std::to_string(gate_target_arity(g.kind)) +
                             " target(s), got " +
                             std::to_string(g.targets.size()));
      if (params.size() != gate_param_arity(g.kind))
        throw ParseError(
            ParseErrorKind::ArityError, lineno, col1,
            word + " expects " + std::to_string(gate_param_arity(g.kind)) +
                " parameter(s), got " + std::to_string(params.size()));
      g.params = std::move(params);
      (void)have_params;
    }
    stack.back().body.emplace_back(GateOp{std::move(g)});
  }

  if (stack.size() > 1)
    throw ParseError(ParseErrorKind::UnterminatedBlock, stack.back().open_line,
                     0,
                     std::string(detail::ir_block_name(stack.back().type)) +
                         " block is never closed");
  if (!have_qinit)
    throw ParseError(ParseErrorKind::Syntax, lineno ? lineno : 1, 0,
                     "missing QINIT header");

  Program p(nq, nc);
  p.body = std::move(stack.back().body);
  return p;
}

}  // namespace qforge
