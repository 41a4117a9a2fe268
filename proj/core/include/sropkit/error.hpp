#pragma once

#include <stdexcept>
#include <string>

namespace sropkit {

// Base of every error raised by the library. The CLI maps the subclasses
// deriving from ValidationError to exit status 2 and everything else to 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller-supplied data or parameters are unusable.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class InvalidInput : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidParameter : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Spatial size below the minimum where the radial bin count is defined.
class TooSmall : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Signal or map has no spectral energy, so the roll-off point is undefined.
class ZeroEnergy : public Error {
 public:
  using Error::Error;
};

class EmptyLayer : public Error {
 public:
  using Error::Error;
};

class DegenerateSample : public Error {
 public:
  using Error::Error;
};

enum class ParseErrorKind {
  bad_magic,
  unsupported_dtype,
  bad_header,
  size_mismatch,
  truncated,
  bad_value,
};

const char* to_string(ParseErrorKind kind);

// Binary container or dataset file could not be decoded.
class ParseError : public ValidationError {
 public:
  ParseError(ParseErrorKind kind, const std::string& what);

  ParseErrorKind kind() const noexcept { return kind_; }

 private:
  ParseErrorKind kind_;
};

}  // namespace sropkit
