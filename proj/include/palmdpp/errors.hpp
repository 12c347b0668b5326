#pragma once

#include <stdexcept>
#include <string>

namespace palmdpp {

/// Base class for all library errors. The CLI maps exit_code() to the process
/// exit status: 2 for configuration/precondition problems, 3 for numerical ones.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept = 0;
};

class ConfigError : public Error {
public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

class PreconditionError : public Error {
public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

// Duplicate anchors, coinciding zeros/poles, repeated correlation points.
class DegenerateInputError : public PreconditionError {
public:
  using PreconditionError::PreconditionError;
};

class UnsupportedWeightError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

class NumericalError : public Error {
public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

// A point lies outside the model's domain (|z| >= 1 on the disc, or beyond a
// tabulated weight's radial range).
class DomainError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class QuadratureError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class EnvelopeError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

// A functional hit a non-finite value at a configuration point.
class EvaluationError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

}  // namespace palmdpp
