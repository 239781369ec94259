#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace skelfreq {

enum class ErrorKind {
  topology,
  shape,
  numeric,
  parameter,
  data,
  capability,
  bridge,
  parse,
  format,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::topology: return "topology-error";
    case ErrorKind::shape: return "shape-error";
    case ErrorKind::numeric: return "numeric-error";
    case ErrorKind::parameter: return "parameter-error";
    case ErrorKind::data: return "data-error";
    case ErrorKind::capability: return "capability-error";
    case ErrorKind::bridge: return "bridge-error";
    case ErrorKind::parse: return "parse-error";
    case ErrorKind::format: return "format-error";
  }
  return "error";
}

/// Every failure raised by the library carries one of the kinds above so the
/// CLI can map it onto an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Parse errors additionally remember the 1-based line that failed.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorKind::parse, "line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace skelfreq
