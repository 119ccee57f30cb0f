#pragma once

#include <stdexcept>
#include <string>

namespace ntlab {

enum class ErrorCode {
  MassMismatch,
  EmptySupport,
  DimensionError,
  NonConvergence,
  InfeasibleMarginals,
  IdenticallyZero,
  EmptyIntersection,
  NoBracket,
  NonPositive,
  Aliasing,
  MarginalViolation,
  ConfigError,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MassMismatch: return "MassMismatch";
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::DimensionError: return "DimensionError";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::InfeasibleMarginals: return "InfeasibleMarginals";
    case ErrorCode::IdenticallyZero: return "IdenticallyZero";
    case ErrorCode::EmptyIntersection: return "EmptyIntersection";
    case ErrorCode::NoBracket: return "NoBracket";
    case ErrorCode::NonPositive: return "NonPositive";
    case ErrorCode::Aliasing: return "Aliasing";
    case ErrorCode::MarginalViolation: return "MarginalViolation";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace ntlab
