#pragma once

#include <stdexcept>

namespace cqr {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operand dimensions do not line up.
struct ShapeError : Error {
  using Error::Error;
};

// Invalid or inconsistent configuration value.
struct ConfigError : Error {
  using Error::Error;
};

// Filesystem or serialization failure.
struct IoError : Error {
  using Error::Error;
};

// File content violates a format invariant (bad record, duplicate id, ...).
struct DataError : IoError {
  using IoError::IoError;
};

// Training produced a non-finite loss.
struct DivergenceError : Error {
  using Error::Error;
};

// Correlation undefined because one input has zero variance.
struct DegenerateVarianceError : Error {
  using Error::Error;
};

}  // namespace cqr
