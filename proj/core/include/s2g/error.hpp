#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace s2g {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape or dimension mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A value violates a documented precondition (range, sign, finiteness).
class ValueError : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration problem. `key()` is the dotted path of the
/// offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Training produced a non-finite loss, or sampling left the finite range.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Filesystem or stream failure.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace s2g
