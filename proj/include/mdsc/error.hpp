#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mdsc {

enum class ErrorKind {
  Domain,
  DimensionMismatch,
  AbsoluteContinuityViolation,
  NonConvergence,
  BudgetExceeded,
  DegenerateDispersion,
  InfeasibleRate,
  CrossCheckMismatch,
  StepTooLarge,
  BoundVacuous,
  InvalidExponent,
  InvalidScale,
  NoFeasibleType,
};

std::string_view to_string(ErrorKind kind);

/// Input-validation errors (bad parameters) versus failures of a computation
/// on valid input. The CLI maps these to exit codes 2 and 3.
bool is_validation_error(ErrorKind kind);

/// Named residual attached to an error, e.g. {"rate_gap", 3e-5}.
struct Residual {
  std::string name;
  double value;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::vector<Residual> residuals = {})
      : std::runtime_error(message), kind_(kind), residuals_(std::move(residuals)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::vector<Residual>& residuals() const noexcept { return residuals_; }

 private:
  ErrorKind kind_;
  std::vector<Residual> residuals_;
};

#define MDSC_DEFINE_ERROR(Name)                                                    \
  class Name : public Error {                                                      \
   public:                                                                         \
    explicit Name(const std::string& message, std::vector<Residual> residuals = {}) \
        : Error(ErrorKind::Name, message, std::move(residuals)) {}                 \
  };

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message) : Error(ErrorKind::Domain, message) {}
};

MDSC_DEFINE_ERROR(DimensionMismatch)
MDSC_DEFINE_ERROR(AbsoluteContinuityViolation)
MDSC_DEFINE_ERROR(NonConvergence)
MDSC_DEFINE_ERROR(BudgetExceeded)
MDSC_DEFINE_ERROR(DegenerateDispersion)
MDSC_DEFINE_ERROR(InfeasibleRate)
MDSC_DEFINE_ERROR(CrossCheckMismatch)
MDSC_DEFINE_ERROR(StepTooLarge)
MDSC_DEFINE_ERROR(BoundVacuous)
MDSC_DEFINE_ERROR(InvalidExponent)
MDSC_DEFINE_ERROR(InvalidScale)
MDSC_DEFINE_ERROR(NoFeasibleType)

#undef MDSC_DEFINE_ERROR

}  // namespace mdsc
