#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hrcalc {

// Precondition violated on a mathematical domain (inverse of zero, non-pure
// axis, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Caller misuse: dimension mismatch, empty input, malformed files.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Singular or ill-conditioned linear algebra, non-finite evaluations.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what, double condition = 0.0)
      : std::runtime_error(what), condition_(condition) {}

  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

// An iterative update produced a non-finite state.
class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : NumericError(what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace hrcalc
