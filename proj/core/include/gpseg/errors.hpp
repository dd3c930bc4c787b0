#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gpseg {

enum class ErrorCode {
  MissingField,
  BinaryUnsupported,
  ParseError,
  IoError,
  PreconditionViolation,
  EmptyCloud,
  TooFewCandidates,
  DomainError,
  SingularMatrix,
  NonFinite,
  NonFiniteStart,
  InvalidSpec,
  InvalidConfig,
  LengthMismatch,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for every recoverable failure in the library.
/// Callers branch on code(); what() carries the human-readable context.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// ParseError raised while reading a text file; line numbers are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace gpseg
