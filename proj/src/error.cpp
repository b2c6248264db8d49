#include "epsbisim/error.hpp"

namespace epsbisim {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::RowSumError: return "RowSumError";
    case ErrorKind::NonpositiveRate: return "NonpositiveRate";
    case ErrorKind::NonAbsorbingGoal: return "NonAbsorbingGoal";
    case ErrorKind::GoalLabelNotUnique: return "GoalLabelNotUnique";
    case ErrorKind::InvalidState: return "InvalidState";
    case ErrorKind::EmptyGoalSet: return "EmptyGoalSet";
    case ErrorKind::RateTooSmall: return "RateTooSmall";
    case ErrorKind::NonpositiveScale: return "NonpositiveScale";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NoGoalState: return "NoGoalState";
    case ErrorKind::NonUniformRates: return "NonUniformRates";
    case ErrorKind::PairNotRelated: return "PairNotRelated";
    case ErrorKind::NotBisimilar: return "NotBisimilar";
    case ErrorKind::NotTransitive: return "NotTransitive";
    case ErrorKind::NotZeroDeltaBisim: return "NotZeroDeltaBisim";
    case ErrorKind::NotApplicable: return "NotApplicable";
    case ErrorKind::WrongKind: return "WrongKind";
    case ErrorKind::AcyclicChain: return "AcyclicChain";
    case ErrorKind::NotAcyclic: return "NotAcyclic";
    case ErrorKind::NonzeroReward: return "NonzeroReward";
    case ErrorKind::AbsorbingState: return "AbsorbingState";
    case ErrorKind::ZeroRewardCycle: return "ZeroRewardCycle";
    case ErrorKind::ZeroReward: return "ZeroReward";
    case ErrorKind::MissingRewards: return "MissingRewards";
    case ErrorKind::ModulusOneNotOne: return "ModulusOneNotOne";
    case ErrorKind::DecompositionUnstable: return "DecompositionUnstable";
    case ErrorKind::SpectralGapZero: return "SpectralGapZero";
  }
  return "Unknown";
}

bool is_numerical(ErrorKind kind) {
  return kind == ErrorKind::ModulusOneNotOne || kind == ErrorKind::DecompositionUnstable ||
         kind == ErrorKind::SpectralGapZero;
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace epsbisim
