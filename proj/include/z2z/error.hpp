#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace z2z {

enum class ErrorKind {
  InvalidArgument,
  TokenOutOfRange,
  UnknownCode,
  ParseError,
  SessionAlreadyStarted,
  CacheIncomplete,
  DimensionMismatch,
  ZeroTokens,
  InvalidCounts,
  DomainError,
  InvariantViolation,
};

constexpr std::string_view error_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::TokenOutOfRange: return "TokenOutOfRange";
    case ErrorKind::UnknownCode: return "UnknownCode";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SessionAlreadyStarted: return "SessionAlreadyStarted";
    case ErrorKind::CacheIncomplete: return "CacheIncomplete";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ZeroTokens: return "ZeroTokens";
    case ErrorKind::InvalidCounts: return "InvalidCounts";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the ErrorKind tags so
/// callers (CLI exit codes, bindings) can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_name(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept { return error_name(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace z2z
