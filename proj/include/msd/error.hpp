#ifndef MSD_ERROR_HPP
#define MSD_ERROR_HPP

#include <stdexcept>
#include <string>

namespace msd {

// Base of every error raised by the library. The CLI maps the concrete
// types onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data problems: malformed files, dangling ids, bad generator params.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

class ReferenceError : public DataError {
 public:
  using DataError::DataError;
};

class SchemaVersionError : public DataError {
 public:
  using DataError::DataError;
};

class InfeasibleParams : public DataError {
 public:
  using DataError::DataError;
};

// Caller violated a precondition of an operation.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// A model that must be feasible was not, or a solver invariant broke.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace msd

#endif  // MSD_ERROR_HPP
