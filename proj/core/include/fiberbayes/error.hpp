#pragma once

#include <stdexcept>
#include <string>

namespace fiberbayes {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure hit a state it cannot recover from.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Input data could not be parsed.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Emits a warning on stderr unless warnings are silenced.
void warn(const std::string& message);

/// Silences (or re-enables) warn(). Returns the previous setting.
bool set_warnings_enabled(bool enabled);

}  // namespace fiberbayes
