#pragma once

#include <stdexcept>
#include <string>

namespace tdcif {

/// Base of every error thrown by the library. The CLI maps the three
/// subclasses onto its exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad shapes, indices, ranks or configuration values.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// File system or file-format problems.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine could not produce a trustworthy answer.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace tdcif
