#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pssmp {

enum class ErrorCode {
  InvalidModel,
  ParseError,
  ModelDoesNotHitZero,
  TiltOutsideDomain,
  NotCramerRoot,
  BetaOutOfRange,
  HorizonTooShort,
  StartsAtZero,
  HypothesisViolated,
  NoCramerRoot,
  NotDriftingUp,
  DerivativeInfinite,
  ConfigRejected,
  TooFewSamples,
  GridTooCoarse,
  PreconditionFailed,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// that callers (the suite runner in particular) can report it by name.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pssmp
