#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ksgm {

enum class ErrorCode {
  AllWeightsZero,
  NotPositiveDefinite,
  NotSymmetric,
  NotStationary,
  NoConvergence,
  BadBlocks,
  TooFewObservations,
  DimensionMismatch,
  Infeasible,
  Unbounded,
  IterationLimit,
  NumericalFailure,
  EdgeBudgetExceeded,
  UnknownLabel,
  ResidualNotPD,
  BadPermutation,
  NoSubjectAtLabel,
  InvalidArgument,
  ParseError,
  ConfigMismatch,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::AllWeightsZero: return "AllWeightsZero";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotStationary: return "NotStationary";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::BadBlocks: return "BadBlocks";
    case ErrorCode::TooFewObservations: return "TooFewObservations";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::IterationLimit: return "IterationLimit";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::EdgeBudgetExceeded: return "EdgeBudgetExceeded";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::ResidualNotPD: return "ResidualNotPD";
    case ErrorCode::BadPermutation: return "BadPermutation";
    case ErrorCode::NoSubjectAtLabel: return "NoSubjectAtLabel";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
  }
  return "Unknown";
}

//! Library exception; `code()` identifies the failure class.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace ksgm
