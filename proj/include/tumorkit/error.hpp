#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tumorkit {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated (even kernel, k > pixels, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Two operands disagree on dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Malformed input text; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tumorkit
