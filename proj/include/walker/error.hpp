#pragma once

#include <stdexcept>
#include <string>

namespace walker {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter violates its domain (non-positive viscosity, Pr = 0, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A field cannot be represented in the Galerkin basis, or shapes disagree.
class RepresentationError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed (eigen solver, blow-up, ill conditioning).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver exhausted its budget.
class ConvergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Malformed or inconsistent configuration input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace walker
