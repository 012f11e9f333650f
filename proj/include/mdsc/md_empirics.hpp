#pragma once

// Exact finite-blocklength quantities: moderate-deviation rate-gap
// sequences, probabilities of rate-threshold type events, chi-square tails,
// finite-n achievability bounds and type-class coverings.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mdsc/exponents.hpp"
#include "mdsc/parallel.hpp"
#include "mdsc/rd_solver.hpp"

namespace mdsc {

enum class Regime { Dms, Gaussian };
std::string_view to_string(Regime r);

/// eps(n) = c n^{-t} with c > 0 and 0 < t < 1/2.
class EpsilonSequence {
 public:
  double c() const noexcept { return c_; }
  double t() const noexcept { return t_; }
  Regime regime() const noexcept { return regime_; }
  double operator()(std::int64_t n) const;

 private:
  friend EpsilonSequence make_epsilon(double c, double t, Regime regime);
  EpsilonSequence(double c, double t, Regime regime) : c_(c), t_(t), regime_(regime) {}
  double c_;
  double t_;
  Regime regime_;
};

EpsilonSequence make_epsilon(double c, double t, Regime regime);

inline constexpr std::int64_t kDefaultTypeBudget = 10'000'000;

struct ScanOptions {
  std::int64_t budget = kDefaultTypeBudget;
  /// Types per work unit. Fixed so that results do not depend on the number
  /// of workers; every chunk starts Blahut-Arimoto cold.
  std::size_t chunk = 256;
  RdOptions rd;
};

/// Number of n-types over a k-letter alphabet, C(n + k - 1, k - 1), as a
/// double (it may exceed the integer range).
double type_count(std::size_t k, std::int64_t n);

/// Calls fn for every n-type in colexicographic order.
void for_each_type(std::size_t k, std::int64_t n,
                   const std::function<void(std::span<const std::int64_t>)>& fn);

/// sum over all n-types of P^n(T_Q): 1 up to rounding.
LogProb total_type_mass(const Pmf& p, std::int64_t n, const ScanOptions& options = {},
                        const Parallelism& par = {});

/// ln sum of P^n(T_Q) over n-types with R(Q, D) >= threshold.
LogProb exact_excess_prob_dms(const Pmf& p, const DistortionSpec& d, double distortion,
                              std::int64_t n, double threshold, const ScanOptions& options = {},
                              const Parallelism& par = {});

/// ln sum of P^n(T_Q) over n-types with R(Q, D) <= threshold.
LogProb exact_correct_prob_dms(const Pmf& p, const DistortionSpec& d, double distortion,
                               std::int64_t n, double threshold, const ScanOptions& options = {},
                               const Parallelism& par = {});

/// Closest n-type (in divergence from P) on one side of a rate threshold.
struct TypeProjection {
  std::optional<NType> minimizer;
  double divergence = kInf;
  std::int64_t qualifying = 0;
};
enum class RateSide { AtLeast, AtMost };
TypeProjection min_divergence_type(const Pmf& p, const DistortionSpec& d, double distortion,
                                   std::int64_t n, double threshold, RateSide side,
                                   const ScanOptions& options = {}, const Parallelism& par = {});

enum class CurveSide {
  Excess,       // DMS: R(Q) >= R + eps. Gaussian: both tails of the sample variance.
  ExcessUpper,  // Gaussian only: upper tail alone.
  Correct,      // DMS: R(Q) <= R - eps. Gaussian: lower tail.
};
std::string_view to_string(CurveSide s);

struct MdRow {
  std::int64_t n;
  double eps;
  LogProb logp;
  double z;  // logp / (n eps^2)
};

struct MdCurve {
  std::vector<MdRow> rows;
  double target = 0.0;
  /// Least-squares slope of z against ln n over the last half of the rows.
  double trend_slope = 0.0;
};

MdCurve md_curve_dms(const Pmf& p, const DistortionSpec& d, double distortion,
                     const EpsilonSequence& eps, std::span<const std::int64_t> ns,
                     CurveSide side = CurveSide::Excess, const ScanOptions& options = {},
                     const Parallelism& par = {});

/// ln P(chi2_n >= n e^{2 eps}) and/or ln P(chi2_n <= n e^{-2 eps}), by side.
LogProb gaussian_tail_logprob(std::int64_t n, double eps, CurveSide side);

MdCurve gaussian_tail_curve(const GaussianProblem& g, const EpsilonSequence& eps,
                            std::span<const std::int64_t> ns, CurveSide side = CurveSide::Excess);

/// min over n-types with R(Q, D) >= R(P, D) + eps' of D(Q||P), divided by
/// F(P, R(P, D) + eps', D).
struct TypeRatioPoint {
  std::int64_t n;
  double ratio;
  double type_divergence;
  double exponent;
  NType minimizer;
};
TypeRatioPoint type_ratio(const Pmf& p, const DistortionSpec& d, double distortion,
                         double epsprime, std::int64_t n, const ScanOptions& options = {},
                         const Parallelism& par = {});

/// Points without a qualifying type are left out and counted.
struct TypeRatioCurve {
  std::vector<TypeRatioPoint> points;
  std::vector<std::int64_t> infeasible;
};
TypeRatioCurve type_ratio_curve(const Pmf& p, const DistortionSpec& d, double distortion,
                         double epsprime, std::span<const std::int64_t> ns,
                         const ScanOptions& options = {}, const Parallelism& par = {});

/// Placeholder for the unspecified covering constant: |X| |Xhat| + 2.
double default_covering_constant(const DistortionSpec& d);

/// Excess side: ln[(n+1)^{|X|} e^{-n F(P, R + eps', D)} + 2^{|X|} e^{-n eps^2 / (2V)}]
/// with eps' = eps - J ln n / n - |X| ln(n+1) / n, an upper bound on the
/// excess probability. Correct side: -|X| ln(n+1) - n min D(Q||P) over
/// n-types with R(Q, D) <= R - eps'', eps'' = eps + J ln n / n + |X| ln(n+1) / n,
/// a lower bound on the correct-decoding probability.
LogProb achievability_bound_dms(const Pmf& p, const DistortionSpec& d, double distortion,
                                std::int64_t n, double eps, double covering_constant,
                                CurveSide side = CurveSide::Excess,
                                const ScanOptions& options = {}, const Parallelism& par = {});

struct GaussianBound {
  LogProb bound;
  /// ln of the covering count 6 n^{5/2} (variance e^{2 eps'} / D)^{n/2}.
  double codebook_log_size;
  double eps_prime;
};
/// ln 4 - (n/2)(e^{2 eps'} - 1 - 2 eps') with eps' = eps - 5 ln n / (2n) - ln 6 / n.
GaussianBound gaussian_achievability_bound(const GaussianProblem& g, std::int64_t n, double eps);

/// CSV with header n,eps,logp,z,target and 17 significant digits.
void write_csv(std::ostream& out, const MdCurve& curve);

struct CoverOptions {
  std::int64_t class_cap = 1'000'000;
  std::int64_t candidate_cap = 1'000'000;
  /// Bound on class size times candidate count (distortion evaluations).
  std::int64_t work_cap = 400'000'000;
};

struct CoverResult {
  std::vector<std::vector<std::uint32_t>> codebook;
  bool covered = false;
  double rate = 0.0;            // ln |codebook| / n
  double rd_rate = 0.0;         // R(Q, D)
  double excess_over_rd = 0.0;  // rate - rd_rate
  std::int64_t class_size = 0;
};

/// Greedy D-cover of the type class of q by reproduction words of length n.
CoverResult greedy_type_cover(const NType& q, const DistortionSpec& d, double distortion,
                              const CoverOptions& options = {});

/// All words with the counts of q, in lexicographic order.
std::vector<std::vector<std::uint32_t>> type_class_words(const NType& q);

/// "# rate=... excess=..." then one codeword per line.
void write_cover_listing(std::ostream& out, const CoverResult& cover);

}  // namespace mdsc
