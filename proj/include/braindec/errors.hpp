#pragma once

#include <stdexcept>
#include <string>

namespace braindec {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments, shapes, file formats, manifests or configs.
/// Mapped to CLI exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical failures: overflowing Sinkhorn potentials, singular systems.
/// Mapped to CLI exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failures (unreadable / unwritable paths).
class IoError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace braindec
