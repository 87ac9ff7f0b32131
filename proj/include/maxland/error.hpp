#pragma once

#include <stdexcept>
#include <string>

namespace maxland {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input text (graph, ansatz, circuit, config, CSV) could not be parsed.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A configured resource limit (brute force, kernel enumeration, memory)
/// would be exceeded.
class LimitError : public Error {
 public:
  using Error::Error;
};

}  // namespace maxland
