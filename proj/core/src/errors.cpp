#include "gpseg/errors.hpp"

namespace gpseg {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::BinaryUnsupported: return "BinaryUnsupported";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
    case ErrorCode::EmptyCloud: return "EmptyCloud";
    case ErrorCode::TooFewCandidates: return "TooFewCandidates";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NonFiniteStart: return "NonFiniteStart";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + message), line_(line) {}

}  // namespace gpseg
