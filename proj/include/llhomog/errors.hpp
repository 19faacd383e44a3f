#pragma once

#include <stdexcept>
#include <string>

namespace llh {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside its admissible range (eps, alpha, dt, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A grid is too coarse for the requested operation.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Two fields or grids that must agree do not.
class GridMismatchError : public Error {
 public:
  using Error::Error;
};

/// Two independent computational routes disagree beyond tolerance.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, instability or a violated physical assumption.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed or invalid configuration input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace llh
