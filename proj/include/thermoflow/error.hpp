#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace thermoflow {

enum class ErrorCode {
  InvalidArgument,
  NotStochastic,
  NegativeEntry,
  ZeroOrNegativeResistanceOnEdge,
  NotIrreducible,
  NotSymmetric,
  Disconnected,
  TargetUnreachableAtBeta,
  UnderflowGuardTripped,
  NoConvergence,
  SupportViolation,
  IncompatibleEndpoints,
  DegenerateVariance,
  TargetOutsideRange,
  NonBracketed,
  OutsideCurveRange,
  TargetUnreachable,
  SingularNetwork,
  AllWalksKilled,
  ParseError,
};

/// Machine-parsable name, e.g. "NOT_STOCHASTIC".
constexpr std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::NotStochastic: return "NOT_STOCHASTIC";
    case ErrorCode::NegativeEntry: return "NEGATIVE_ENTRY";
    case ErrorCode::ZeroOrNegativeResistanceOnEdge: return "ZERO_OR_NEGATIVE_RESISTANCE_ON_EDGE";
    case ErrorCode::NotIrreducible: return "NOT_IRREDUCIBLE";
    case ErrorCode::NotSymmetric: return "NOT_SYMMETRIC";
    case ErrorCode::Disconnected: return "DISCONNECTED";
    case ErrorCode::TargetUnreachableAtBeta: return "TARGET_UNREACHABLE_AT_BETA";
    case ErrorCode::UnderflowGuardTripped: return "UNDERFLOW_GUARD_TRIPPED";
    case ErrorCode::NoConvergence: return "NO_CONVERGENCE";
    case ErrorCode::SupportViolation: return "SUPPORT_VIOLATION";
    case ErrorCode::IncompatibleEndpoints: return "INCOMPATIBLE_ENDPOINTS";
    case ErrorCode::DegenerateVariance: return "DEGENERATE_VARIANCE";
    case ErrorCode::TargetOutsideRange: return "TARGET_OUTSIDE_RANGE";
    case ErrorCode::NonBracketed: return "NON_BRACKETED";
    case ErrorCode::OutsideCurveRange: return "OUTSIDE_CURVE_RANGE";
    case ErrorCode::TargetUnreachable: return "TARGET_UNREACHABLE";
    case ErrorCode::SingularNetwork: return "SINGULAR_NETWORK";
    case ErrorCode::AllWalksKilled: return "ALL_WALKS_KILLED";
    case ErrorCode::ParseError: return "PARSE_ERROR";
  }
  return "UNKNOWN";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace thermoflow
