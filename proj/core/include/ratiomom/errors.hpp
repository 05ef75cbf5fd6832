#pragma once

#include <stdexcept>
#include <string>

namespace ratiomom {

/// Argument outside the domain of an operation (non-positive shape, r > k, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Adaptive quadrature gave up. Carries whatever it had accumulated.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double partial_value, double partial_err)
      : std::runtime_error(what), partial_value_(partial_value), partial_err_(partial_err) {}

  double partial_value() const noexcept { return partial_value_; }
  double partial_err() const noexcept { return partial_err_; }

 private:
  double partial_value_;
  double partial_err_;
};

class NoRootError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An asymptotic law needs a moment of the mixing variable that is infinite.
class HypothesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sample statistic is undefined for the drawn sample (e.g. N(t) = 0).
class UndefinedSampleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An algebraic identity that must hold to rounding did not.
class IdentityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed study configuration. `field` names the offending key path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace ratiomom
