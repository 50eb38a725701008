#pragma once

#include <stdexcept>
#include <string>

namespace runoff {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
/// Carries the best estimate reached so callers can report it.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double value, double abs_error)
      : std::runtime_error(what), value_(value), abs_error_(abs_error) {}

  double value() const noexcept { return value_; }
  double abs_error() const noexcept { return abs_error_; }

 private:
  double value_;
  double abs_error_;
};

/// Malformed or inconsistent input data (poll files, stores, layouts).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model invariant failed after computation (e.g. probabilities of
/// disjoint events summing past one).
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace runoff
