#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gshape {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Zero-power, coincident-point or otherwise degenerate numerical input.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Constellation order outside what an operation supports.
class UnsupportedOrderError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. Carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Invalid experiment or channel configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Training divergence, non-finite estimates and similar runtime failures.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace gshape
