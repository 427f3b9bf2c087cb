#pragma once

#include <stdexcept>
#include <string>

namespace nrc {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument does not hold (bad size, out-of-range parameter).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Configuration or preset could not be resolved.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite intermediate or failed factorization.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver did not meet its termination rule.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; the message carries the offending line number.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace nrc
