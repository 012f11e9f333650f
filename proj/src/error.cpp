#include "mdsc/error.hpp"

namespace mdsc {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::AbsoluteContinuityViolation: return "AbsoluteContinuityViolation";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::DegenerateDispersion: return "DegenerateDispersion";
    case ErrorKind::InfeasibleRate: return "InfeasibleRate";
    case ErrorKind::CrossCheckMismatch: return "CrossCheckMismatch";
    case ErrorKind::StepTooLarge: return "StepTooLarge";
    case ErrorKind::BoundVacuous: return "BoundVacuous";
    case ErrorKind::InvalidExponent: return "InvalidExponent";
    case ErrorKind::InvalidScale: return "InvalidScale";
    case ErrorKind::NoFeasibleType: return "NoFeasibleType";
  }
  return "Unknown";
}

bool is_validation_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::AbsoluteContinuityViolation:
    case ErrorKind::StepTooLarge:
    case ErrorKind::InvalidExponent:
    case ErrorKind::InvalidScale:
      return true;
    default:
      return false;
  }
}

}  // namespace mdsc
