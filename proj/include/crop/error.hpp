#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace crop {

/// Base for every error raised by the library. The CLI maps subclasses to
/// exit codes (input 2, config 3, resource 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Inconsistent shapes between inputs (k-counts, vector dims, index bounds).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters (kappa = 0, K > kappa, even instance counts, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A desk-scale guard refused the request (oracle cap exceeded, etc.).
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Input values outside what an estimator accepts (e.g. non-positive
/// weights fed to Space-Saving).
class ValueError : public Error {
 public:
  using Error::Error;
};

/// Missing or unreadable file.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace crop
