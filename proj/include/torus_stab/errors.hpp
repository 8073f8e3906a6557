#pragma once

#include <stdexcept>
#include <string>

namespace torus_stab {

/// Invalid grid size, malformed config file, missing field.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Two fields that must share a grid do not.
class IncompatibleGridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnsupportedOrderError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numeric parameter is outside the range an operation accepts.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A quotient whose denominator (or both sides) vanishes identically.
class DegenerateInputError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class FitError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The constructed Carleman weight violates 2δ ≤ ψ′ ≤ 2(2π+δ).
class BoundViolationError : public std::runtime_error {
 public:
  BoundViolationError(const std::string& what, double min_slope, double max_slope)
      : std::runtime_error(what), min_slope_(min_slope), max_slope_(max_slope) {}

  double min_slope() const noexcept { return min_slope_; }
  double max_slope() const noexcept { return max_slope_; }

 private:
  double min_slope_;
  double max_slope_;
};

}  // namespace torus_stab
