#pragma once

#include <stdexcept>
#include <string>

namespace abspec {

// Error taxonomy mirrors the CLI exit codes: config/usage (1),
// numerical failure (2), precondition failure (3).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct NumericalError : Error {
  using Error::Error;
};

struct PreconditionError : Error {
  using Error::Error;
};

// Resource caps (mesh DOF budgets etc.) are treated as preconditions.
struct BudgetError : PreconditionError {
  using PreconditionError::PreconditionError;
};

}  // namespace abspec
