#pragma once

#include <stdexcept>
#include <string>

namespace amod {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data violates a documented precondition (bad routing rows, malformed
/// CSV, unbalanced supplies, ...). The CLI maps this to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to converge or produced an out-of-range
/// value. The CLI maps this to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace amod
