#pragma once

#include <stdexcept>
#include <string>

namespace duffing {

// Error classes map onto the CLI exit-code taxonomy:
// infeasible -> 2, numerical -> 3, config -> 4.
enum class ErrorClass { infeasible = 2, numerical = 3, config = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), class_(cls) {}
  ErrorClass error_class() const noexcept { return class_; }
  int exit_code() const noexcept { return static_cast<int>(class_); }

 private:
  ErrorClass class_;
};

/// Invalid parameters or inputs detected before any numerical work.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorClass::config, what) {}
};

/// A numerical procedure failed: quadrature, root finding, step-size underflow, overflow.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorClass::numerical, what) {}
};

/// Argument outside the mathematical domain of an operation (h <= 0, the origin, ...).
class DomainError : public NumericalError {
 public:
  explicit DomainError(const std::string& what) : NumericalError("domain error: " + what) {}
};

/// Query outside a tabulated range; the table must be extended.
class RangeError : public NumericalError {
 public:
  explicit RangeError(const std::string& what) : NumericalError("range error: " + what) {}
};

/// A certified inequality or structural invariant failed on sampled data.
class InvariantViolation : public NumericalError {
 public:
  explicit InvariantViolation(const std::string& what) : NumericalError("invariant violation: " + what) {}
};

/// The escape construction cannot proceed with the given schedule or starting action.
class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what) : Error(ErrorClass::infeasible, what) {}
};

}  // namespace duffing
