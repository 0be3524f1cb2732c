#pragma once

#include <stdexcept>
#include <string>

namespace fdrelay {

/// Operand shapes do not agree with the system configuration.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A direction or eigenpair is degenerate; callers usually perturb and retry.
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical contract (monotone merit, loop stability, ...) was violated.
class ContractViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user configuration (config file, sweep, solver selection).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace fdrelay
