#pragma once

#include <stdexcept>
#include <string>

namespace prodembed {

// Base class for every error raised by the library. The CLI maps the
// concrete subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Input text that does not follow the basket / embedding / truth formats.
class MalformedInputError : public Error {
 public:
  MalformedInputError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

class InvalidInputError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class EmptyGraphError : public Error {
 public:
  using Error::Error;
};

// Internal invariant violated; indicates a bug or mismatched inputs.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace prodembed
