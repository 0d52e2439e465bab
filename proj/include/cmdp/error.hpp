#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cmdp {

enum class ErrorCode {
  // model validation
  RowSumExceedsOne,
  NegativeProbability,
  NegativeCost,
  NonFiniteValue,
  UnknownStateReference,
  UnknownActionReference,
  EmptyActionSet,
  DuplicateName,
  ActionNameClash,
  InvalidStrategy,
  ShapeMismatch,
  ParseError,
  InvalidArgument,
  // solver outcomes
  InfeasibleProblem,
  AssumptionViolated,
  InfiniteOccupation,
  UnboundedPolytope,
  TooManySelectors,
  EmptyCandidatePool,
  // numerical failures
  SingularSystem,
  RepairFailed,
  IterationLimit,
  UnboundedObjective,
  NonConvergent,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace cmdp
