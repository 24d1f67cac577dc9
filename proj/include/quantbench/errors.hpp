#pragma once

#include <stdexcept>
#include <string>

namespace quantbench {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dimension mismatch in a linear-algebra or model operation.
struct ShapeError : Error {
  using Error::Error;
};

// File I/O, parsing, or input-validation failure.
struct DataError : Error {
  using Error::Error;
};

// Invalid configuration (bad key, bad value, missing path).
struct ConfigError : Error {
  using Error::Error;
};

// A training run could not proceed or produce a usable model.
struct TrainError : Error {
  using Error::Error;
};

// A NaN or Inf was produced where finite values are required.
struct NumericError : Error {
  using Error::Error;
};

}  // namespace quantbench
