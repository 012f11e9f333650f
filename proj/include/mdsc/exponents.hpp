#pragma once

// Large-deviation exponents of lossy source coding and their moderate-
// deviation limits.

#include <cstdint>
#include <span>
#include <vector>

#include "mdsc/parallel.hpp"
#include "mdsc/rd_solver.hpp"

namespace mdsc {

struct ExponentResult {
  /// Exponent in nats. Meaningless when infeasible is set.
  double value = 0.0;
  /// The rate constraint cannot be met by any source law (exponent +inf).
  bool infeasible = false;
  Pmf minimizer = Pmf::uniform(1);
  /// R(minimizer, D).
  double minimizer_rate = 0.0;
  bool active = false;
  double multiplier = 0.0;
  bool converged = true;
  /// Correct-decoding only: multi-start runs disagreed by more than 1e-6.
  bool multimodal = false;
  int iterations = 0;
};

struct ExponentOptions {
  double rate_tolerance = 1e-9;
  int max_multiplier_iterations = 200;
  int max_descent_iterations = 20'000;
  int starts = 8;
  std::uint64_t seed = 0x5eedULL;
  /// Iterates wander close to the zero-rate boundary, where Blahut-Arimoto
  /// slows down sharply: larger inner cap, and a capped solve is accepted
  /// (its rate is then within the recorded gap, tiny next to the exponent).
  RdOptions rd = [] {
    RdOptions o;
    o.max_inner_iterations = 20'000;
    o.strict = false;
    return o;
  }();
};

/// min { D(Q||P) : R(Q, D) >= R }.
ExponentResult marton_exponent_dms(const Pmf& p, const DistortionSpec& d, double distortion,
                                   double rate, const ExponentOptions& options = {});

/// min { D(Q||P) : R(Q, D) <= R }.
ExponentResult correct_exponent_dms(const Pmf& p, const DistortionSpec& d, double distortion,
                                    double rate, const ExponentOptions& options = {},
                                    const Parallelism& par = {});

/// max { R(Q, D) : supp Q within supp P } with its maximizer.
struct MaxRate {
  double rate;
  Pmf maximizer;
};
MaxRate max_rate_dms(const Pmf& p, const DistortionSpec& d, double distortion,
                     const RdOptions& rd = {});

/// min { D(Q||P) : R(Q, D) = 0 }, by exponential tilting toward each
/// reproduction letter.
struct ZeroRateProjection {
  double divergence;
  Pmf minimizer;
};
ZeroRateProjection zero_rate_projection(const Pmf& p, const DistortionSpec& d, double distortion);

/// (1/2)[x - 1 - ln x], x = (D / variance) e^{2R}, for R > R(variance, D); else 0.
double gaussian_excess_exponent(const GaussianProblem& g, double rate);
/// Same expression for R < R(variance, D); else 0.
double gaussian_correct_exponent(const GaussianProblem& g, double rate);

struct LimitRatioReport {
  std::vector<double> deltas;
  std::vector<double> exponents;
  /// F(P, R(P,D) + delta, D) * 2V / delta^2
  std::vector<double> ratios;
  /// sup / inf of ratios[k..] (tail envelopes, since the limit need not exist)
  std::vector<double> upper_limits;
  std::vector<double> lower_limits;
  double dispersion = 0.0;
  /// Least-squares slope of (ratio - 1) against delta.
  double slope = 0.0;
  /// Linear extrapolation to delta = 0 from the last two points.
  double intercept = 0.0;
};

LimitRatioReport quadratic_limit_ratio(const Problem& problem, std::span<const double> deltas,
                                       const ExponentOptions& options = {},
                                       const Parallelism& par = {});

/// -1/(2V) for a DMS, -1 for the Gaussian source.
double md_exponent_prediction(const Problem& problem, const Parallelism& par = {});

}  // namespace mdsc
