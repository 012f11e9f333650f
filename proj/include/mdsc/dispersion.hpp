#pragma once

// Lossy-source-coding dispersion V(P, D) = Var_P[R'(X; P, D)].

#include <vector>

#include "mdsc/parallel.hpp"
#include "mdsc/rd_solver.hpp"

namespace mdsc {

enum class DerivativeMethod { FiniteDifference, Tilted };

/// Per-symbol derivative of R(., D) at P, known only up to an additive
/// constant: the finite-difference route differentiates along e_x - P, which
/// yields R'(x) - sum_y P(y) R'(y). A variance is blind to the constant.
struct DerivativeVector {
  std::vector<double> values;
  DerivativeMethod method = DerivativeMethod::FiniteDifference;
  double step = 0.0;
  /// True when values have P-mean zero (the finite-difference route).
  bool centered = false;
};

struct DerivativeOptions {
  double step = 1e-4;
  bool richardson = true;
  RdOptions rd;
};

/// Central differences of R along e_x - P, one Richardson level by default.
DerivativeVector rd_derivative(const Pmf& p, const DistortionSpec& d, double distortion,
                               const DerivativeOptions& options = {},
                               const Parallelism& par = {});

double weighted_variance(const Pmf& p, std::span<const double> values);

struct DispersionResult {
  double value = 0.0;          // finite-difference estimate
  double tilted_value = 0.0;   // Var_P of the tilted information
  bool degenerate = false;     // value < 1e-10
  DerivativeVector derivative;
  std::vector<double> tilted;
};

inline constexpr double kDegenerateDispersion = 1e-10;

/// Finite-difference V cross-checked against Var_P[j]. Disagreement beyond
/// max(1e-4, 1% relative) raises CrossCheckMismatch.
DispersionResult dispersion_dms(const Pmf& p, const DistortionSpec& d, double distortion,
                                const DerivativeOptions& options = {},
                                const Parallelism& par = {});

/// alpha (1 - alpha) ln^2((1 - alpha) / alpha), independent of D.
double dispersion_binary_hamming(double alpha);

struct BernoulliDispersionPeak {
  double alpha;
  double dispersion;
};
/// Golden-section maximization of dispersion_binary_hamming over (0, 1/2).
BernoulliDispersionPeak max_dispersion_bernoulli();

/// The quadratic-Gaussian dispersion: 1/2 for every variance and D.
double dispersion_gaussian();

/// V for either problem kind; DMS goes through dispersion_dms.
double dispersion_of(const Problem& problem, const Parallelism& par = {});

}  // namespace mdsc
