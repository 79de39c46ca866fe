#pragma once

#include <stdexcept>
#include <string>

namespace oligo_rd {

/// Base class for every failure raised by the solver library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input lies outside the admissible region of a function family.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A bracketing or scanning search found no root.
class NoSolutionError : public Error {
 public:
  using Error::Error;
};

/// No positive investment satisfies the stationarity condition; the optimum
/// over k >= 0 is the k = 0 corner.
class CornerSolution : public NoSolutionError {
 public:
  using NoSolutionError::NoSolutionError;
};

/// A second-order condition fails at every candidate root.
class SocViolation : public Error {
 public:
  using Error::Error;
};

/// A reaction system determinant is non-positive.
class StabilityError : public Error {
 public:
  using Error::Error;
};

/// A denominator in a closed form vanishes.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Caller violated an operation's precondition (e.g. closed loop with spillover).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Malformed scenario text. `line` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& message)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

  int line() const { return line_; }

 private:
  int line_ = 0;
};

}  // namespace oligo_rd
