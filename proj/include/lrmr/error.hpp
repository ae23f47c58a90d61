#pragma once

#include <stdexcept>
#include <string>

namespace lrmr {

// Base for every failure raised by the library. The CLI maps these to exit
// code 1 (domain error) as opposed to usage errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes or lengths that do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Arguments outside the mathematical domain of an operation (t <= 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// NaN/inf in inputs or iterates, or an iterative kernel that failed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace lrmr
