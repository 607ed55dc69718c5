#pragma once

#include <stdexcept>
#include <string>

namespace multiap {

/// Invalid input: bad geometry, non-Hermitian matrix, out-of-domain argument,
/// malformed configuration. Maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numeric procedure failed to reach its tolerance. Maps to CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive quadrature ran out of subdivisions; carries the best estimate.
class QuadratureError : public NumericError {
 public:
  QuadratureError(const std::string& what, double best_value, double best_error)
      : NumericError(what), best_value_(best_value), best_error_(best_error) {}

  double best_value() const noexcept { return best_value_; }
  double best_error() const noexcept { return best_error_; }

 private:
  double best_value_;
  double best_error_;
};

/// Mode truncation left more than the allowed probability outside the basis.
class TruncationError : public NumericError {
 public:
  TruncationError(const std::string& what, double deficit)
      : NumericError(what), deficit_(deficit) {}

  double deficit() const noexcept { return deficit_; }

 private:
  double deficit_;
};

/// The likelihood carries no information about the parameter.
class EstimationError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace multiap
