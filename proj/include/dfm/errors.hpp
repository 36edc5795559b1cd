#pragma once

#include <stdexcept>
#include <string>

namespace dfm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A barrier was evaluated at a point that is not strictly inside its constraint set.
class BarrierDomainError : public Error {
 public:
  using Error::Error;
};

class InfeasibleStartError : public Error {
 public:
  using Error::Error;
};

/// Raised by the engine when an update would leave the feasible set.
class FeasibilityViolation : public Error {
 public:
  using Error::Error;
};

/// The KKT matrix of a Newton step is singular, typically from dependent coupling rows.
class RankDeficientCoupling : public Error {
 public:
  using Error::Error;
};

class DiagnosticsUnavailable : public Error {
 public:
  using Error::Error;
};

class FileNotFoundError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace dfm
