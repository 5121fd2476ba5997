#include "smdiff/error.hpp"

namespace smdiff {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotConjugateClosed: return "NotConjugateClosed";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::InvalidOrder: return "InvalidOrder";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::UnstableRoot: return "UnstableRoot";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::Unstable: return "Unstable";
    case ErrorCode::InvalidQ: return "InvalidQ";
    case ErrorCode::NoTruth: return "NoTruth";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConvergenceFailure:
    case ErrorCode::Singular:
    case ErrorCode::UnstableRoot:
    case ErrorCode::NonFinite:
    case ErrorCode::Diverged:
    case ErrorCode::Unstable:
      return true;
    default:
      return false;
  }
}

}  // namespace smdiff
