#pragma once

// Rate-distortion functions: Blahut-Arimoto for discrete memoryless sources,
// closed forms for binary-Hamming and quadratic-Gaussian, and the d-tilted
// information vector.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "mdsc/core_math.hpp"

namespace mdsc {

/// Nonnegative |X| x |Xhat| distortion table in which every row has a zero.
class DistortionSpec {
 public:
  DistortionSpec(std::size_t source_size, std::size_t reproduction_size, std::vector<double> table);
  static DistortionSpec from_rows(const std::vector<std::vector<double>>& rows);
  /// d(x, xhat) = [x != xhat] on a k-ary alphabet.
  static DistortionSpec hamming(std::size_t size);

  std::size_t source_size() const noexcept { return rows_; }
  std::size_t reproduction_size() const noexcept { return cols_; }
  double operator()(std::size_t x, std::size_t xhat) const { return table_[x * cols_ + xhat]; }
  std::span<const double> row(std::size_t x) const { return {table_.data() + x * cols_, cols_}; }
  double d_max() const noexcept { return d_max_; }

  friend bool operator==(const DistortionSpec&, const DistortionSpec&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> table_;
  double d_max_ = 0.0;
};

/// Smallest distortion achievable at rate zero: min_xhat sum_x p(x) d(x, xhat).
double zero_rate_distortion(const Pmf& p, const DistortionSpec& d);

struct RdOptions {
  double rate_tolerance = 1e-10;       // inner stop: successive iterates
  int max_inner_iterations = 10'000;
  double distortion_tolerance = 1e-10;
  int max_outer_iterations = 200;
  double prune_threshold = 1e-300;
  /// When false, hitting an iteration cap returns the last iterate with
  /// converged = false instead of throwing NonConvergence.
  bool strict = true;
};

struct ConvergenceRecord {
  int outer_iterations = 0;
  std::int64_t inner_iterations = 0;
  /// ln max_xhat c(xhat) at the final slope: the Blahut-Arimoto gap.
  double gap = 0.0;
  double distortion_residual = 0.0;
  std::vector<std::size_t> pruned_letters;
  /// Some output letter has marginal below 1e-8: the optimizer support is
  /// about to change, so R(., D) may not be differentiable here.
  bool support_boundary = false;
};

struct RdSolution {
  double rate = 0.0;
  Pmf output_marginal = Pmf::uniform(1);
  double slope = 0.0;
  double target_distortion = 0.0;
  double achieved_distortion = 0.0;
  std::int64_t iterations = 0;
  bool converged = true;
  bool zero_rate = false;
  ConvergenceRecord record;
};

/// Hint reused between neighbouring problems (adjacent types, perturbed
/// sources). Marginal size must match the reproduction alphabet.
struct RdWarmStart {
  std::vector<double> marginal;
  double slope = 0.0;
};

RdWarmStart warm_start_from(const RdSolution& s);

/// R(p, D) by slope-parametrized Blahut-Arimoto with a safeguarded root find
/// on the slope. D at or above zero_rate_distortion(p, d) yields a zero-rate
/// solution.
RdSolution rate_distortion_dms(const Pmf& p, const DistortionSpec& d, double distortion,
                               const RdOptions& options = {}, const RdWarmStart* warm = nullptr);

double rate_distortion_binary_hamming(double alpha, double distortion);

struct GaussianProblem {
  GaussianProblem(double variance, double distortion);
  double variance;
  double distortion;
};

/// (1/2) ln max{1, variance / D}.
double rate_distortion_gaussian(const GaussianProblem& g);

struct TiltedInformation {
  std::vector<double> values;  // j(x), one per source symbol
  double slope = 0.0;
  RdSolution solution;
};

/// j(x) = -ln sum_xhat Q*(xhat) exp(lambda (D - d(x, xhat))). Its p-mean is
/// R(p, D) and it is the gradient of R(., D) up to an additive constant.
TiltedInformation tilted_information(const Pmf& p, const DistortionSpec& d, double distortion,
                                     const RdOptions& options = {},
                                     const RdWarmStart* warm = nullptr);

/// Flat key/value view of a solution for emitters.
struct RecordField {
  std::string key;
  std::variant<double, std::int64_t, bool> value;
  std::string unit;
};
std::vector<RecordField> to_record(const RdSolution& s);

/// Problem descriptors shared by the dispersion and exponent modules.
struct DmsProblem {
  Pmf source;
  DistortionSpec distortion;
  double level;
};
using Problem = std::variant<DmsProblem, GaussianProblem>;

}  // namespace mdsc
