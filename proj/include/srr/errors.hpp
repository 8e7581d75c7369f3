#pragma once

#include <stdexcept>
#include <string>

namespace srr {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Mismatched dimensions between arguments.
struct ShapeError : Error {
  using Error::Error;
};

/// An argument violates a documented precondition or invariant.
struct ValidationError : Error {
  using Error::Error;
};

/// Non-finite value produced where a finite one is required.
struct NumericalError : Error {
  using Error::Error;
};

/// Bad run configuration (unknown key, out-of-range field, missing file).
struct ConfigError : Error {
  using Error::Error;
};

/// Malformed input text (data files, schema files).
struct ParseError : Error {
  using Error::Error;
};

/// Training objective became non-finite; message carries the step index.
struct DivergenceError : Error {
  using Error::Error;
};

/// Power iteration met a zero Hessian-vector product twice in a row.
struct DegenerateSpectrumError : Error {
  using Error::Error;
};

/// Regression asked for on a predictor with zero variance.
struct DegenerateRegressionError : Error {
  using Error::Error;
};

/// File could not be read, written, or fails its integrity check.
struct IoError : Error {
  using Error::Error;
};

}  // namespace srr
