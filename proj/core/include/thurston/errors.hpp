#pragma once

#include <stdexcept>
#include <string>

namespace thurston {

enum class ErrorCode {
  TrivialCurve,
  ZeroPower,
  NotInGammaTwo,
  MalformedSpec,
  NotSquare,
  EuclideanOrbifold,
  NotACovering,
  NoInteriorFixedPoint,
  BranchCollision,
  AtEnd,
  WrongKind,
  NotEuclidean,
  FiberDegenerate,
  ContinuationStall,
  SheetCollision,
  CrossingAmbiguous,
  UnknownGenerator,
  NotInDomain,
  InternalNonParabolic,
  NoRepellingEnd,
  NoSection,
  RepresentativeDegenerate,
  ConvergenceFailure,
  ConfigParse,
  FixtureUnknown,
  BadArgument,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Thrown when a word is outside dom(phi_f); carries the minimal power k
// with w^k in the domain.
class NotInDomainError : public Error {
 public:
  NotInDomainError(const std::string& what, long long minimal_power)
      : Error(ErrorCode::NotInDomain, what), minimal_power_(minimal_power) {}

  long long minimal_power() const { return minimal_power_; }

 private:
  long long minimal_power_;
};

}  // namespace thurston
