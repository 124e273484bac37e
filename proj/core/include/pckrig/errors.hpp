// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace pckrig {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the support of a marginal, or otherwise invalid argument.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed or missing configuration / parameter data.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent data: dimension mismatch, bad CSV, schema mismatch.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Base for numerical failures (exit code 4 at the CLI).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Rank-deficient regression matrix.
class SingularSystemError : public NumericalError {
 public:
  SingularSystemError(const std::string& what, long basis_size)
      : NumericalError(what), basis_size_(basis_size) {}
  long basis_size() const noexcept { return basis_size_; }

 private:
  long basis_size_;
};

/// A leverage h_i is numerically 1 (interpolation regime).
class DegenerateLeverageError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Correlation matrix not positive definite even after the largest nugget.
class ConditioningError : public NumericalError {
 public:
  ConditioningError(const std::string& what, double condition_estimate)
      : NumericalError(what), condition_estimate_(condition_estimate) {}
  double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

}  // namespace pckrig
