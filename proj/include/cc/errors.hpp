#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cc {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid argument or configuration value.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Operation undefined for the given parameters (e.g. entropy order 1).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Alpha is not on the supported optimal-quantile grid. The message names
// the nearest supported values on each side.
class UnsupportedAlphaError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

// Index outside the sketch's declared dimension.
class BoundsError : public Error {
 public:
  using Error::Error;
};

// Sketch contents unusable for the requested estimator (e.g. zero entries).
class DegenerateSketchError : public Error {
 public:
  using Error::Error;
};

// Sketches disagree on alpha, kind, k, seed, or dimension.
class IncompatibleSketchError : public Error {
 public:
  using Error::Error;
};

// Malformed serialized sketch (bad magic, version, size, or payload).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Unreadable text input. `line()` is 1-based; 0 means not line-specific.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input with invalid content (negative counts, empty grids...).
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Filesystem failure while reading or writing.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cc
