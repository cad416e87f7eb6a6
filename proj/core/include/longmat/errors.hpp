#pragma once

#include <stdexcept>
#include <string>

namespace longmat {

// Base for every error raised by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (t <= 0, y <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// The operation exists but is not defined for the requested model or payoff.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent configuration / descriptors.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// The (model, payoff pair) combination is outside the proven region and the
// experimental switch is off.
class EligibilityError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// The epsilon curve does not decay at the truncation bounds.
class TruncationError : public NumericError {
 public:
  using NumericError::NumericError;
};

class BudgetError : public NumericError {
 public:
  BudgetError(const std::string& what, std::size_t required_paths)
      : NumericError(what), required_paths_(required_paths) {}

  std::size_t required_paths() const noexcept { return required_paths_; }

 private:
  std::size_t required_paths_;
};

// An error constant was paired with a different (model, pair, tau).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

// A sampled window violated one of the approximation-pair conditions.
class ValidationFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace longmat
