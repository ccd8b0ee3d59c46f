#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qforge {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A program or argument failed semantic validation (bad indices, non-unitary
// custom matrix, arity mismatch, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// The operation only accepts flat programs (no QIf / QWhile blocks).
class FlatCircuitRequired : public Error {
 public:
  using Error::Error;
};

// The operation cannot handle this input by design (multi-qubit custom
// synthesis, control flow in an export target, ...).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// A QWhile loop exceeded the configured iteration guard.
class NonTerminationGuard : public Error {
 public:
  using Error::Error;
};

// A path-sum evaluation would branch beyond the caller's budget.  The
// estimate is reported so callers can rescale or switch method.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& msg, std::uint64_t estimated_paths)
      : Error(msg), estimated_paths(estimated_paths) {}
  std::uint64_t estimated_paths;
};

enum class ParseErrorKind {
  Syntax,
  UnknownMnemonic,
  ArityError,
  RangeError,
  UnterminatedBlock,
};

inline const char* parse_error_kind_name(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::Syntax: return "Syntax";
    case ParseErrorKind::UnknownMnemonic: return "UnknownMnemonic";
    case ParseErrorKind::ArityError: return "ArityError";
    case ParseErrorKind::RangeError: return "RangeError";
    case ParseErrorKind::UnterminatedBlock: return "UnterminatedBlock";
  }
  return "?";
}

// Text format parse failure.  Line and column are 1-based; column 0 means
// "whole line" (used for block-level errors discovered at end of input).
class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, std::uint32_t line, std::uint32_t column,
             const std::string& msg)
      : Error(std::string(parse_error_kind_name(kind)) + " at line " +
              std::to_string(line) +
              (column ? ":" + std::to_string(column) : std::string()) + ": " +
              msg),
        kind(kind),
        line(line),
        column(column) {}

  ParseErrorKind kind;
  std::uint32_t line;
  std::uint32_t column;
};

}  // namespace qforge
