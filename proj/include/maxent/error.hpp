#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace maxent {

enum class ErrorCode {
  BadStrikes,
  NonMonotoneCalls,
  NonConvexCalls,
  OutOfRectangle,
  DomainError,
  OutOfRange,
  NoConvergence,
  GridMismatch,
  NotContinuous,
  NotIntegrable,
  SingularPivot,
  InvalidSlice,
  ParseError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadStrikes: return "BadStrikes";
    case ErrorCode::NonMonotoneCalls: return "NonMonotoneCalls";
    case ErrorCode::NonConvexCalls: return "NonConvexCalls";
    case ErrorCode::OutOfRectangle: return "OutOfRectangle";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NotContinuous: return "NotContinuous";
    case ErrorCode::NotIntegrable: return "NotIntegrable";
    case ErrorCode::SingularPivot: return "SingularPivot";
    case ErrorCode::InvalidSlice: return "InvalidSlice";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Single exception type for the library; `code()` tells callers what went wrong.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// True for errors caused by quotes or digitals that admit arbitrage.
  bool is_arbitrage() const noexcept {
    return code_ == ErrorCode::BadStrikes || code_ == ErrorCode::NonMonotoneCalls ||
           code_ == ErrorCode::NonConvexCalls || code_ == ErrorCode::OutOfRectangle;
  }

 private:
  ErrorCode code_;
};

}  // namespace maxent
