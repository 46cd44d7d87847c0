#pragma once

#include <stdexcept>
#include <string>

namespace culr {

/// Malformed or inconsistent input data (corpus records, side files, configs).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation produced a non-finite value (loss, gradient, log-probability).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A label sequence contains a transition with probability zero under an
/// unsmoothed transition matrix, so its log-likelihood difficulty is infinite.
class InfiniteDifficultyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace culr
