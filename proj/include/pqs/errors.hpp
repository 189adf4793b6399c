#pragma once

#include <stdexcept>
#include <string>

namespace pqs {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Mismatched vector/matrix dimensions.
struct DimensionError : Error {
  using Error::Error;
};

/// Input outside the mathematical domain of an operation
/// (zero polarization, out-of-range curve argument, W < 1, ...).
struct DomainError : Error {
  using Error::Error;
};

/// Iterative method failed to reach its tolerance. Carries the last residual.
struct ConvergenceError : Error {
  double residual;
  ConvergenceError(const std::string& what, double residual_)
      : Error(what), residual(residual_) {}
};

/// File or schema problem on an external interface.
struct IoError : Error {
  using Error::Error;
};

struct SchemaError : IoError {
  using IoError::IoError;
};

}  // namespace pqs
