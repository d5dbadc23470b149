#pragma once

#include <stdexcept>
#include <string>

namespace gin {

// Bad input, bad configuration, or a violated precondition. Maps to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shape disagreement between a layer and its input.
class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// NaN/Inf during training, exhausted sampling, disconnected graphs and other
// failures discovered while computing. Maps to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or truncated files on disk.
class FormatError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace gin
