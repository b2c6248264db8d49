#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace epsbisim {

enum class ErrorKind {
  // input / validation
  Parse,
  RowSumError,
  NonpositiveRate,
  NonAbsorbingGoal,
  GoalLabelNotUnique,
  InvalidState,
  EmptyGoalSet,
  RateTooSmall,
  NonpositiveScale,
  InvalidArgument,
  NoGoalState,
  NonUniformRates,
  // bisimulation
  PairNotRelated,
  NotBisimilar,
  NotTransitive,
  NotZeroDeltaBisim,
  // bounds
  NotApplicable,
  WrongKind,
  AcyclicChain,
  NotAcyclic,
  // rewards
  NonzeroReward,
  AbsorbingState,
  ZeroRewardCycle,
  ZeroReward,
  MissingRewards,
  // numerics
  ModulusOneNotOne,
  DecompositionUnstable,
  SpectralGapZero,
};

std::string_view to_string(ErrorKind kind);

// True for failures caused by floating point / decomposition trouble rather
// than by malformed input.
bool is_numerical(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace epsbisim
