#pragma once

#include <stdexcept>
#include <string>

namespace echoclf {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Caller supplied arguments that violate a precondition.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

class DimensionError : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

// Bad or unusable input data (CSV parse problems, bad labels, constant columns).
class DataError : public Error {
public:
  using Error::Error;
};

// Numerical failure while fitting or solving.
class NumericError : public Error {
public:
  using Error::Error;
};

class ConvergenceError : public NumericError {
public:
  using NumericError::NumericError;
};

class SingularMatrixError : public NumericError {
public:
  using NumericError::NumericError;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace echoclf
