#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace plasmofiber {

enum class ErrorKind {
  InvalidArgument,
  InvalidGeometry,
  OutOfBounds,
  GridMismatch,
  NonFinite,
  NoRoot,
  ZeroDenominator,
  EmptyChannel,
  NoConvergence,
  DegenerateHistogram,
  InsufficientCoverage,
  ParseError,
};

const char *to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (the CLI,
// the sweep runner) can record it without string matching.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

class ParseError : public Error {
public:
  ParseError(std::uint64_t byte_offset, const std::string &what)
      : Error(ErrorKind::ParseError, what + " (byte offset " + std::to_string(byte_offset) + ")"),
        offset_(byte_offset) {}

  std::uint64_t byte_offset() const noexcept { return offset_; }

private:
  std::uint64_t offset_;
};

} // namespace plasmofiber
