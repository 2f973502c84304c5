#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eigentow {

/// Precondition on an argument (dimension, range, normalization) was violated.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A state with zero norm was passed where expectation values are needed.
class DegenerateStateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid physical parameters (e.g. a negative radicand in the JC matrix).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Cholesky / LDL^T broke down on a matrix that should have been SPD.
class FactorizationError : public std::runtime_error {
 public:
  FactorizationError(const std::string& what, std::string matrix_dump)
      : std::runtime_error(what), dump_(std::move(matrix_dump)) {}
  const std::string& matrix_dump() const noexcept { return dump_; }

 private:
  std::string dump_;
};

/// Regression or fit could not be computed from the supplied points.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace eigentow
