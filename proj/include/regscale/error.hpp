#pragma once

#include <stdexcept>
#include <string>

namespace regscale {

/// Precondition violated by the caller (bad size, out-of-domain argument).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation not available for the given kernel or grid combination.
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Numerical failure: zero matrix, failed factorization, degenerate functional.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace regscale
