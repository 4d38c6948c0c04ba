#pragma once

#include <stdexcept>
#include <string>

namespace mmw {

// Base for every failure raised by the library. The CLI maps these onto
// exit codes; everything else is a programming error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: a matrix that is not stochastic, a load vector that does
// not add up to N, an out-of-range handover cost.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Input is well formed but the requested quantity is not unique or not
// defined (absorbing state, reducible chain).
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  CalibrationError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// A count or a search space exceeds its configured cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

}  // namespace mmw
