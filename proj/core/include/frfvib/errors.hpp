#pragma once

#include <stdexcept>
#include <string>

namespace frfvib {

/// Invalid argument: dimension mismatch, non-positive amplitude, bad matrix.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Evaluation outside the domain of a map (e.g. MRP at or beyond the unit sphere).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A simulated state became non-finite or left the representable range.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(double time, const std::string& what)
      : std::runtime_error(what), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Scenario file could not be read or failed schema validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace frfvib
