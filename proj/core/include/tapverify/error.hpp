#pragma once

#include <stdexcept>
#include <string>

namespace tapverify {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes or widths that do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf produced by a kernel.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Precondition violated by a caller-supplied value.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Object is in the wrong lifecycle state for the requested operation.
class StateError : public Error {
 public:
  using Error::Error;
};

// Filesystem or format problem while reading or writing artifacts.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tapverify
