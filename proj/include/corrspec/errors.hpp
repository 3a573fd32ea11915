#pragma once

#include <stdexcept>
#include <string>

namespace corrspec {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input-validation family: the CLI maps these to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ModelError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class PlanError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConditionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnsupportedModelError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IoError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Numeric family: the CLI maps these to exit code 3.
class NumericError : public Error {
 public:
  using Error::Error;
};

class DomainError : public NumericError {
 public:
  using NumericError::NumericError;
};

class InvalidCovarianceError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Circulant embedding produced a materially negative eigenvalue.
class EmbeddingError : public NumericError {
 public:
  EmbeddingError(const std::string& what, double most_negative)
      : NumericError(what), most_negative_(most_negative) {}
  double most_negative() const noexcept { return most_negative_; }

 private:
  double most_negative_;
};

class ConvergenceError : public NumericError {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : NumericError(what), residual_(residual), iterations_(iterations) {}
  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// A fixed-point iterate left the class of admissible solutions (wrong branch).
class ClassError : public NumericError {
 public:
  using NumericError::NumericError;
};

class SupportCoverageError : public NumericError {
 public:
  SupportCoverageError(const std::string& what, double mass)
      : NumericError(what), mass_(mass) {}
  double mass() const noexcept { return mass_; }

 private:
  double mass_;
};

/// A deterministic inequality that must hold on every instance was violated.
class BoundViolation : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace corrspec
