#include "kpbbm/error.hpp"

namespace kpbbm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateParameters: return "degenerate-parameters";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::Regime: return "regime";
    case ErrorCode::UnsupportedReduction: return "unsupported-reduction";
    case ErrorCode::UnsupportedParameters: return "unsupported-parameters";
    case ErrorCode::InvalidConfig: return "invalid-config";
    case ErrorCode::ConvergenceFailure: return "convergence-failure";
    case ErrorCode::NoSignChange: return "no-sign-change";
    case ErrorCode::TransversalityFailure: return "transversality-failure";
    case ErrorCode::StepUnderflow: return "step-underflow";
    case ErrorCode::NoCrossing: return "no-crossing";
    case ErrorCode::EigenFailure: return "eigen-failure";
  }
  return "unknown";
}

}  // namespace kpbbm
