#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kpbbm {

enum class ErrorCode {
  DegenerateParameters,
  Domain,
  Regime,
  UnsupportedReduction,
  UnsupportedParameters,
  InvalidConfig,
  ConvergenceFailure,
  NoSignChange,
  TransversalityFailure,
  StepUnderflow,
  NoCrossing,
  EigenFailure,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace kpbbm
