#include "sropkit/error.hpp"

namespace sropkit {

const char* to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::bad_magic:
      return "bad magic";
    case ParseErrorKind::unsupported_dtype:
      return "unsupported dtype";
    case ParseErrorKind::bad_header:
      return "bad header";
    case ParseErrorKind::size_mismatch:
      return "size mismatch";
    case ParseErrorKind::truncated:
      return "truncated";
    case ParseErrorKind::bad_value:
      return "bad value";
  }
  return "unknown";
}

ParseError::ParseError(ParseErrorKind kind, const std::string& what)
    : ValidationError(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace sropkit
