#pragma once

#include <stdexcept>
#include <string>

namespace attstab {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// A closed-form result was requested outside the region where it holds.
class NotApplicableError : public Error {
 public:
  using Error::Error;
};

class ConstraintError : public Error {
 public:
  using Error::Error;
};

/// Raised when sigma1 * sigma2 * sigma3 vanishes and the solution family is undefined.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class StepSizeError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double time)
      : Error(what), time_(time) {}

  /// Simulation time of the first non-finite sample.
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace attstab
