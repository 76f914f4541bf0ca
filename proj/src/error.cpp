#include "pssmp/error.hpp"

namespace pssmp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ModelDoesNotHitZero: return "ModelDoesNotHitZero";
    case ErrorCode::TiltOutsideDomain: return "TiltOutsideDomain";
    case ErrorCode::NotCramerRoot: return "NotCramerRoot";
    case ErrorCode::BetaOutOfRange: return "BetaOutOfRange";
    case ErrorCode::HorizonTooShort: return "HorizonTooShort";
    case ErrorCode::StartsAtZero: return "StartsAtZero";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::NoCramerRoot: return "NoCramerRoot";
    case ErrorCode::NotDriftingUp: return "NotDriftingUp";
    case ErrorCode::DerivativeInfinite: return "DerivativeInfinite";
    case ErrorCode::ConfigRejected: return "ConfigRejected";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
  }
  return "Unknown";
}

}  // namespace pssmp
