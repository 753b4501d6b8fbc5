#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace blowup {

enum class ErrorCode {
  InvalidParams,
  DegenerateExponents,
  FluxOverflow,
  InvalidInitialData,
  GridTooCoarse,
  StepUnderflow,
  NumericalBlowupGuard,
  FitFailed,
  BadRadius,
  BadTime,
  BadWindow,
  ResolutionError,
  ParamsTooStiff,
  ConfigError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::DegenerateExponents: return "DegenerateExponents";
    case ErrorCode::FluxOverflow: return "FluxOverflow";
    case ErrorCode::InvalidInitialData: return "InvalidInitialData";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::NumericalBlowupGuard: return "NumericalBlowupGuard";
    case ErrorCode::FitFailed: return "FitFailed";
    case ErrorCode::BadRadius: return "BadRadius";
    case ErrorCode::BadTime: return "BadTime";
    case ErrorCode::BadWindow: return "BadWindow";
    case ErrorCode::ResolutionError: return "ResolutionError";
    case ErrorCode::ParamsTooStiff: return "ParamsTooStiff";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace blowup
