#include "mdsc/core_math.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mdsc/error.hpp"

namespace mdsc {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

// Stirling remainder lgamma(s) - [(s - 1/2) ln s - s + ln(2 pi)/2].
double stirling_remainder(double s) {
  if (s < 10.0) {
    return log_gamma(s) - ((s - 0.5) * std::log(s) - s + 0.5 * kLogTwoPi);
  }
  const double r = 1.0 / s;
  const double r2 = r * r;
  return r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 / 1680.0)));
}

// ln( x^s e^{-x} / Gamma(s) ), the common prefactor of both incomplete-gamma
// expansions. Written as -s*phi(x/s) + ... so the large s ln x and x terms
// cancel analytically instead of numerically.
double log_gamma_prefactor(double s, double x) {
  if (s < 10.0) {
    return s * std::log(x) - x - log_gamma(s);
  }
  const double u = (x - s) / s;
  return -s * log1pmx(u) + 0.5 * (std::log(s) - kLogTwoPi) - stirling_remainder(s);
}

constexpr int kGammaMaxIterations = 100'000'000;
constexpr double kGammaEps = 1e-16;

// ln of sum_{k>=0} x^k / ((s+1)...(s+k)); used for the lower function.
double log_lower_series(double s, double x) {
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < kGammaMaxIterations; ++k) {
    term *= x / (s + k);
    sum += term;
    if (term < sum * kGammaEps) {
      return std::log(sum);
    }
  }
  throw NonConvergence("incomplete gamma series did not converge",
                       {{"s", s}, {"x", x}, {"relative_term", term / sum}});
}

// ln of the Legendre continued fraction for Gamma(s, x) e^x x^{-s}, modified
// Lentz evaluation.
double log_upper_continued_fraction(double s, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIterations; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kGammaEps) {
      return std::log(h);
    }
  }
  throw NonConvergence("incomplete gamma continued fraction did not converge",
                       {{"s", s}, {"x", x}});
}

void check_gamma_args(double s, double x) {
  if (!(s > 0.0) || !std::isfinite(s) || !(x >= 0.0) || std::isnan(x)) {
    throw DomainError("incomplete gamma requires s > 0 and x >= 0 (s=" + std::to_string(s) +
                      ", x=" + std::to_string(x) + ")");
  }
}

}  // namespace

Pmf Pmf::from_weights(std::vector<double> weights) {
  if (weights.empty()) {
    throw DomainError("pmf needs at least one symbol");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw DomainError("pmf weights must be finite and nonnegative");
    }
    total += w;
  }
  if (!(total > 0.0)) {
    throw DomainError("pmf weights sum to zero");
  }
  for (double& w : weights) w /= total;
  return Pmf(std::move(weights));
}

Pmf Pmf::uniform(std::size_t size) {
  if (size == 0) throw DomainError("pmf needs at least one symbol");
  return Pmf(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

Pmf Pmf::point_mass(std::size_t size, std::size_t symbol) {
  if (symbol >= size) throw DomainError("point mass symbol outside alphabet");
  std::vector<double> w(size, 0.0);
  w[symbol] = 1.0;
  return Pmf(std::move(w));
}

Pmf Pmf::bernoulli(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw DomainError("Bernoulli parameter must lie in [0,1]");
  }
  return Pmf({1.0 - alpha, alpha});
}

bool Pmf::strictly_positive() const noexcept {
  return std::all_of(weights_.begin(), weights_.end(), [](double w) { return w > 0.0; });
}

NType::NType(std::vector<std::int64_t> counts) : counts_(std::move(counts)) {
  if (counts_.empty()) throw DomainError("type needs at least one symbol");
  for (auto c : counts_) {
    if (c < 0) throw DomainError("type counts must be nonnegative");
    n_ += c;
  }
  if (n_ <= 0) throw DomainError("type blocklength must be positive");
}

Pmf NType::as_pmf() const {
  std::vector<double> w(counts_.size());
  const double n = static_cast<double>(n_);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<double>(counts_[i]) / n;
  return Pmf::from_weights(std::move(w));
}

LogProb::LogProb(double value) : value_(value) {
  if (std::isnan(value)) throw DomainError("log-probability is NaN");
  if (value > 0.0) {
    if (value > 1e-9) throw DomainError("log-probability exceeds 0");
    value_ = 0.0;
  }
}

double LogProb::prob() const noexcept { return std::exp(value_); }

double log_sum_exp(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.empty() || sorted.back() == kNegInf) return kNegInf;
  const double top = sorted.back();
  if (top == kInf) return kInf;
  double sum = 0.0;
  for (double v : sorted) sum += std::exp(v - top);
  return top + std::log(sum);
}

double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

double kl_divergence(const Pmf& q, const Pmf& p) {
  if (q.size() != p.size()) {
    throw DimensionMismatch("kl_divergence: alphabet sizes differ");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= 0.0) continue;
    if (p[i] <= 0.0) {
      throw AbsoluteContinuityViolation("kl_divergence: q(x) > 0 where p(x) = 0 (x=" +
                                        std::to_string(i) + ")");
    }
    sum += q[i] * std::log(q[i] / p[i]);
  }
  return std::max(sum, 0.0);
}

double entropy(const Pmf& p) {
  double h = 0.0;
  for (double w : p.weights()) {
    if (w > 0.0) h -= w * std::log(w);
  }
  return h;
}

double l1_distance(const Pmf& q, const Pmf& p) {
  if (q.size() != p.size()) throw DimensionMismatch("l1_distance: alphabet sizes differ");
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) s += std::fabs(q[i] - p[i]);
  return s;
}

double binary_entropy(double a) {
  if (!(a >= 0.0 && a <= 1.0)) {
    throw DomainError("binary_entropy: argument outside [0,1]");
  }
  double h = 0.0;
  if (a > 0.0) h -= a * std::log(a);
  if (a < 1.0) h -= (1.0 - a) * std::log1p(-a);
  return h;
}

double inverse_binary_entropy(double h) {
  if (!(h >= 0.0 && h <= std::log(2.0) + 1e-15)) {
    throw DomainError("inverse_binary_entropy: argument outside [0, ln 2]");
  }
  double lo = 0.0;
  double hi = 0.5;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (binary_entropy(mid) < h) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double log_gamma(double x) {
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

double log_multinomial(std::span<const std::int64_t> counts) {
  std::int64_t n = 0;
  double denom = 0.0;
  for (auto c : counts) {
    n += c;
    denom += log_gamma(static_cast<double>(c) + 1.0);
  }
  return log_gamma(static_cast<double>(n) + 1.0) - denom;
}

double log_type_class_prob(std::span<const std::int64_t> counts, const Pmf& p) {
  if (counts.size() != p.size()) {
    throw DimensionMismatch("type and pmf alphabet sizes differ");
  }
  double lp = log_multinomial(counts);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    if (p[i] <= 0.0) return kNegInf;
    lp += static_cast<double>(counts[i]) * std::log(p[i]);
  }
  return lp;
}

double log1pmx(double u) {
  if (!(u > -1.0)) {
    return u == -1.0 ? kInf : std::numeric_limits<double>::quiet_NaN();
  }
  if (std::fabs(u) < 0.125) {
    // u - ln(1+u) = sum_{k>=2} (-1)^k u^k / k
    double term = u * u;
    double sum = 0.0;
    for (int k = 2; k < 60; ++k) {
      const double add = term / k;
      sum += (k % 2 == 0) ? add : -add;
      if (std::fabs(add) < 1e-18 * std::fabs(sum)) break;
      term *= u;
    }
    return sum;
  }
  return u - std::log1p(u);
}

double x_minus_one_minus_log(double x) {
  if (!(x > 0.0)) throw DomainError("x - 1 - ln x requires x > 0");
  return log1pmx(x - 1.0);
}

double log_regularized_gamma_upper(double s, double x) {
  check_gamma_args(s, x);
  if (x == 0.0) return 0.0;
  if (x == kInf) return kNegInf;
  const double pref = log_gamma_prefactor(s, x);
  if (x < s + 1.0) {
    const double log_lower = pref + log_lower_series(s, x) - std::log(s);
    return std::log1p(-std::exp(log_lower));
  }
  return pref + log_upper_continued_fraction(s, x);
}

double log_regularized_gamma_lower(double s, double x) {
  check_gamma_args(s, x);
  if (x == 0.0) return kNegInf;
  if (x == kInf) return 0.0;
  const double pref = log_gamma_prefactor(s, x);
  if (x < s + 1.0) {
    return pref + log_lower_series(s, x) - std::log(s);
  }
  const double log_upper = pref + log_upper_continued_fraction(s, x);
  return std::log1p(-std::exp(log_upper));
}

}  // namespace mdsc
