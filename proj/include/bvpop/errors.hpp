#pragma once

#include <stdexcept>
#include <string>

namespace bvpop {

/// Root of all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation outside the domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed input: bad grid, bad tail, bad configuration value.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A mathematical hypothesis of the requested operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure (non-finite values, coarse steps, singular rates).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Growth rate vanished where the survival probability needs 1/g.
class SingularityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Improper integral could not be truncated within the domain cap.
class TruncationError : public NumericalError {
 public:
  TruncationError(const std::string& what, double best_estimate, double error_bound)
      : NumericalError(what), best_estimate_(best_estimate), error_bound_(error_bound) {}

  double best_estimate() const noexcept { return best_estimate_; }
  double error_bound() const noexcept { return error_bound_; }

 private:
  double best_estimate_;
  double error_bound_;
};

}  // namespace bvpop
