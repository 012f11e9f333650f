#pragma once

// Probability vectors, entropies, divergences and log-domain special
// functions. Every quantity is in nats.

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace mdsc {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// A probability mass function over a finite alphabet {0, ..., size-1}.
/// Construction normalizes; negative or non-finite weights are rejected.
class Pmf {
 public:
  static Pmf from_weights(std::vector<double> weights);
  static Pmf uniform(std::size_t size);
  static Pmf point_mass(std::size_t size, std::size_t symbol);
  /// (1 - alpha, alpha): symbol 1 carries probability alpha.
  static Pmf bernoulli(double alpha);

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const noexcept { return weights_; }
  bool strictly_positive() const noexcept;

  friend bool operator==(const Pmf&, const Pmf&) = default;

 private:
  explicit Pmf(std::vector<double> w) : weights_(std::move(w)) {}
  std::vector<double> weights_;
};

/// An n-type: nonnegative counts summing to the blocklength.
class NType {
 public:
  explicit NType(std::vector<std::int64_t> counts);

  std::int64_t n() const noexcept { return n_; }
  std::size_t size() const noexcept { return counts_.size(); }
  std::span<const std::int64_t> counts() const noexcept { return counts_; }
  std::int64_t operator[](std::size_t i) const { return counts_[i]; }
  Pmf as_pmf() const;

  friend bool operator==(const NType&, const NType&) = default;

 private:
  std::vector<std::int64_t> counts_;
  std::int64_t n_ = 0;
};

/// Natural-log probability. -inf is the legal encoding of probability zero.
class LogProb {
 public:
  LogProb() = default;
  /// Values in (0, 1e-9] are rounding noise of a full-mass sum and clamp to 0.
  explicit LogProb(double value);
  static LogProb zero() { return LogProb(kNegInf); }
  static LogProb one() { return LogProb(0.0); }

  double value() const noexcept { return value_; }
  double prob() const noexcept;
  bool is_zero() const noexcept { return value_ == kNegInf; }

  friend auto operator<=>(const LogProb&, const LogProb&) = default;

 private:
  double value_ = kNegInf;
};

/// ln(sum exp(v_i)). Inputs are sorted ascending before the reduction so the
/// result depends only on the multiset of inputs, not their order.
double log_sum_exp(std::span<const double> values);
double log_add_exp(double a, double b);

double kl_divergence(const Pmf& q, const Pmf& p);
double entropy(const Pmf& p);
double l1_distance(const Pmf& q, const Pmf& p);

double binary_entropy(double a);
/// Root of binary_entropy on the lower branch [0, 1/2].
double inverse_binary_entropy(double h);

/// Thread-safe ln Gamma(x) for x > 0.
double log_gamma(double x);
/// ln( n! / prod k_i! ).
double log_multinomial(std::span<const std::int64_t> counts);
/// ln of the P^n-probability of the type class with the given counts.
double log_type_class_prob(std::span<const std::int64_t> counts, const Pmf& p);

/// ln Q(s, x) = ln Gamma(s, x) / Gamma(s), the regularized upper incomplete
/// gamma function. Stays accurate in the extreme tails where Q itself
/// underflows.
double log_regularized_gamma_upper(double s, double x);
/// ln P(s, x) = 1 - Q(s, x).
double log_regularized_gamma_lower(double s, double x);

/// x - 1 - ln x, evaluated without cancellation near x = 1.
double x_minus_one_minus_log(double x);
/// u - ln(1 + u) for u > -1.
double log1pmx(double u);

}  // namespace mdsc
