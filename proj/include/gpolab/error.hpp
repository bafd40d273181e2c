#pragma once

#include <stdexcept>
#include <string>

namespace gpolab {

/// Invalid configuration key or value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A mathematical precondition of an operation does not hold.
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Omega calibration failed to reach its tolerance.
class CalibrationError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Training loss exceeded the divergence guard.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gpolab
