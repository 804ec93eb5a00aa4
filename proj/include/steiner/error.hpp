// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace steiner {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was not met.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An iterative method failed to converge or a factorization broke down.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Input data violates a structural hypothesis (monotonicity, convexity, ...).
class HypothesisViolation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Reading or writing a file failed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Failure inside a named pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace steiner
