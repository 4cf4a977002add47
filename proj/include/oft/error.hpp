#pragma once

#include <stdexcept>
#include <string>

namespace oft {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad K, non-unit vector, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Inputs have incompatible shapes (dims mismatch, 2D set on a 3D volume).
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// File missing, unreadable, or malformed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace oft
