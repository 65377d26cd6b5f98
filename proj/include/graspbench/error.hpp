#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace graspbench {

enum class ErrorCode {
  DegenerateInput,
  DimensionMismatch,
  EmptyScene,
  NoFeasibleGrasp,
  OutOfBounds,
  PlacementOutOfBounds,
  ConfigError,
  InconsistentTrials,
  AdapterTimeout,
  AdapterProtocolError,
  AdapterInvalidGrasp,
  IoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyScene: return "EmptyScene";
    case ErrorCode::NoFeasibleGrasp: return "NoFeasibleGrasp";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::PlacementOutOfBounds: return "PlacementOutOfBounds";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::InconsistentTrials: return "InconsistentTrials";
    case ErrorCode::AdapterTimeout: return "AdapterTimeout";
    case ErrorCode::AdapterProtocolError: return "AdapterProtocolError";
    case ErrorCode::AdapterInvalidGrasp: return "AdapterInvalidGrasp";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the harness, the CLI exit-code mapping) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace graspbench
