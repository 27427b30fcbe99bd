#pragma once

#include <stdexcept>
#include <string>

namespace sklab {

// Base for every error the library throws. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain (|x| > 1, entropy outside [0,1], ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A structural assumption does not hold (non-convex mixture, empty constraint set).
class StructuralError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Size caps and memory budgets.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// Covariance matrix indefinite beyond the jitter budget.
class FactorizationError : public Error {
 public:
  using Error::Error;
};

class RostInvalidError : public Error {
 public:
  using Error::Error;
};

class SearchExhaustedError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace sklab
