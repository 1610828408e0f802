#pragma once

#include <stdexcept>
#include <string>

namespace pcc {

// Base of every error raised by the library. The CLI maps each subclass to
// one exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files, manifests, model files, unwritable outputs.
class DataError : public Error {
 public:
  using Error::Error;
};

// Tensor or parameter shapes that do not fit together.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Non-finite losses, failed gradient checks.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration values (epochs = 0, k < 2, ...).
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace pcc
