#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qforge/error.hpp"
#include "qforge/ir.hpp"  // format_number
#include "qforge/linalg.hpp"

namespace qforge {

// Weighted sum of Pauli strings, e.g. 0.5 I + 0.25 X0 Z1.  Terms are keyed
// by their sorted (qubit, letter) factors; the empty key is the identity.
// Coefficients with magnitude below 1e-14 are pruned after every operation.
class PauliOperator {
 public:
  using Term = std::vector<std::pair<std::uint32_t, char>>;  // sorted by qubit
  static constexpr double kPruneTol = 1e-14;

  PauliOperator() = default;

  static PauliOperator identity(cdouble coeff = 1.0) {
    PauliOperator p;
    p.terms_[{}] = coeff;
    p.prune();
    return p;
  }

  // word: space-separated factors like "X0 Z2"; "" or "I" is the identity.
  static PauliOperator term(const std::string& word, cdouble coeff = 1.0) {
    PauliOperator p;
    p.terms_[parse_term(word)] = coeff;
    p.prune();
    return p;
  }

  static PauliOperator from_terms(
      const std::map<std::string, cdouble>& words) {
    PauliOperator p;
    for (auto& [w, c] : words) p.accumulate(parse_term(w), c);
    p.prune();
    return p;
  }

  const std::map<Term, cdouble>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t term_count() const { return terms_.size(); }

  // One past the highest qubit index (0 for pure identity).
  std::uint32_t num_qubits() const {
    std::uint32_t n = 0;
    for (auto& [t, c] : terms_)
      if (!t.empty()) n = std::max(n, t.back().first + 1);
    return n;
  }

  // Hermitian iff every coefficient is real (Pauli strings are Hermitian).
  bool is_hermitian(double tol = 1e-10) const {
    for (auto& [t, c] : terms_)
      if (std::abs(c.imag()) > tol) return false;
    return true;
  }

  PauliOperator& operator+=(const PauliOperator& o) {
    for (auto& [t, c] : o.terms_) accumulate(t, c);
    prune();
    return *this;
  }
  PauliOperator& operator-=(const PauliOperator& o) {
    for (auto& [t, c] : o.terms_) accumulate(t, -c);
    prune();
    return *this;
  }
  PauliOperator& operator*=(cdouble f) {
    for (auto& [t, c] : terms_) c *= f;
    prune();
    return *this;
  }

  friend PauliOperator operator+(PauliOperator a, const PauliOperator& b) {
    a += b;
    return a;
  }
  friend PauliOperator operator-(PauliOperator a, const PauliOperator& b) {
    a -= b;
    return a;
  }
  friend PauliOperator operator*(PauliOperator a, cdouble f) {
    a *= f;
    return a;
  }
  friend PauliOperator operator*(cdouble f, PauliOperator a) {
    a *= f;
    return a;
  }

  bool operator==(const PauliOperator& o) const { return terms_ == o.terms_; }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (auto& [t, c] : terms_) {
      if (!out.empty()) out += " + ";
      if (std::abs(c.imag()) == 0.0) {
        out += detail::format_number(c.real());
      } else {
        out += "(" + detail::format_number(c.real()) +
               (c.imag() < 0 ? "" : "+") + detail::format_number(c.imag()) +
               "i)";
      }
      if (t.empty()) {
        out += " I";
      } else {
        for (auto& [q, p] : t) {
          out += ' ';
          out += p;
          out += std::to_string(q);
        }
      }
    }
    return out;
  }

  // Dense 2^n x 2^n matrix on `n` qubits (qubit 0 = least significant bit).
  CMatrix to_matrix(std::uint32_t n) const {
    if (n < num_qubits())
      throw ValidationError("operator touches qubits beyond the given count");
    const std::size_t dim = std::size_t(1) << n;
    CMatrix m = CMatrix::Zero(dim, dim);
    for (auto& [t, c] : terms_) {
      CMatrix factor = CMatrix::Identity(1, 1);
      for (std::uint32_t q = n; q-- > 0;) {
        char p = 'I';
        for (auto& [tq, tp] : t)
          if (tq == q) p = tp;
        factor = kron(factor, pauli_matrix(p));
      }
      m += c * factor;
    }
    return m;
  }

  friend PauliOperator pauli_multiply(const PauliOperator& a,
                                      const PauliOperator& b) {
    PauliOperator out;
    for (auto& [ta, ca] : a.terms_)
      for (auto& [tb, cb] : b.terms_) {
        cdouble phase = 1.0;
        Term prod;
        std::size_t i = 0, j = 0;
        while (i < ta.size() || j < tb.size()) {
          if (j >= tb.size() || (i < ta.size() && ta[i].first < tb[j].first)) {
            prod.push_back(ta[i++]);
          } else if (i >= ta.size() || tb[j].first < ta[i].first) {
            prod.push_back(tb[j++]);
          } else {
            const auto [p, f] = mul1(ta[i].second, tb[j].second);
            if (p != 'I') prod.push_back({ta[i].first, p});
            phase *= f;
            ++i;
            ++j;
          }
        }
        out.accumulate(prod, ca * cb * phase);
      }
    out.prune();
    return out;
  }

 private:
  std::map<Term, cdouble> terms_;

  static CMatrix pauli_matrix(char p) {
    CMatrix m(2, 2);
    const cdouble i1(0, 1);
    switch (p) {
      case 'I': m << 1, 0, 0, 1; break;
      case 'X': m << 0, 1, 1, 0; break;
      case 'Y': m << 0, -i1, i1, 0; break;
      case 'Z': m << 1, 0, 0, -1; break;
      default: throw ValidationError("unknown Pauli letter");
    }
    return m;
  }

  // Single-qubit product: equal letters square to I; distinct letters give
  // the third, +i on the cyclic order X->Y->Z->X and -i against it.
  static std::pair<char, cdouble> mul1(char a, char b) {
    if (a == b) return {'I', 1.0};
    auto idx = [](char p) { return p == 'X' ? 1 : p == 'Y' ? 2 : 3; };
    const int ia = idx(a), ib = idx(b);
    const char c = "IXYZ"[6 - ia - ib];
    const bool cyclic =
        (ia == 1 && ib == 2) || (ia == 2 && ib == 3) || (ia == 3 && ib == 1);
    return {c, cyclic ? cdouble(0, 1) : cdouble(0, -1)};
  }

  void accumulate(const Term& t, cdouble c) {
    auto [it, fresh] = terms_.try_emplace(t, c);
    if (!fresh) it->second += c;
  }

  void prune() {
    for (auto it = terms_.begin(); it != terms_.end();) {
      if (std::abs(it->second) < kPruneTol)
        it = terms_.erase(it);
      else
        ++it;
    }
  }

  static Term parse_term(const std::string& word) {
    Term t;
    std::size_t i = 0;
    while (i < word.size()) {
      if (std::isspace(static_cast<unsigned char>(word[i]))) {
        ++i;
        continue;
      }
      const char p = static_cast<char>(std::toupper(
          static_cast<unsigned char>(word[i])));
      if (p == 'I') {
        ++i;
        continue;  // explicit identity factor
      }
      if (p != 'X' && p != 'Y' && p != 'Z')
        throw ValidationError("Pauli term '" + word +
                              "': expected X/Y/Z/I, got '" + word[i] + "'");
      ++i;
      std::uint32_t q = 0;
      const char* begin = word.data() + i;
      auto [end, ec] = std::from_chars(begin, word.data() + word.size(), q);
      if (ec != std::errc() || end == begin)
        throw ValidationError("Pauli term '" + word +
                              "': letter needs a qubit index");
      i = static_cast<std::size_t>(end - word.data());
      for (auto& [tq, tp] : t)
        if (tq == q)
          throw ValidationError("Pauli term '" + word + "': qubit " +
                                std::to_string(q) + " repeated");
      t.push_back({q, p});
    }
    std::sort(t.begin(), t.end());
    return t;
  }
};

}  // namespace qforge
