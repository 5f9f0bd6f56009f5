#pragma once

#include <stdexcept>
#include <string>

namespace hpcb {

/// Invalid user-supplied parameters (domain, dimension, malformed config).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical precondition of an operation was violated.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested frequencies exceed what the sampling grid resolves.
class AliasingError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Least-squares design matrix numerically rank deficient.
class ConditioningError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Truncated series whose tail estimate exceeds the tolerance.
class TruncationError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

}  // namespace hpcb
