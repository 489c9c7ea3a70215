#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tpmsvm {

enum class ErrorCode {
  InvalidInput,
  InvalidHyperparams,
  Infeasible,
  UnsupportedRadiusMapping,
  DegenerateClassifier,
  IndefiniteKernel,
  SolverFailure,
  ParseError,
  SplitError,
  HarnessError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; `code()` tells callers what went wrong.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::InvalidHyperparams: return "InvalidHyperparams";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::UnsupportedRadiusMapping: return "UnsupportedRadiusMapping";
    case ErrorCode::DegenerateClassifier: return "DegenerateClassifier";
    case ErrorCode::IndefiniteKernel: return "IndefiniteKernel";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SplitError: return "SplitError";
    case ErrorCode::HarnessError: return "HarnessError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace tpmsvm
