#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace twomode {

enum class ErrorCode {
  NotHurwitz,
  NonPositiveLambda,
  ClassViolation,
  UncertaintyViolation,
  NegativeRadicand,
  NonPositiveF,
  DivergentNegativity,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotHurwitz: return "NotHurwitz";
    case ErrorCode::NonPositiveLambda: return "NonPositiveLambda";
    case ErrorCode::ClassViolation: return "ClassViolation";
    case ErrorCode::UncertaintyViolation: return "UncertaintyViolation";
    case ErrorCode::NegativeRadicand: return "NegativeRadicand";
    case ErrorCode::NonPositiveF: return "NonPositiveF";
    case ErrorCode::DivergentNegativity: return "DivergentNegativity";
  }
  return "Unknown";
}

/// Raised when an operation's physical precondition does not hold.
class PhysicsError : public std::runtime_error {
 public:
  PhysicsError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace twomode
