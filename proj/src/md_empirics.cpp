#include "mdsc/md_empirics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "mdsc/dispersion.hpp"
#include "mdsc/error.hpp"

namespace mdsc {

std::string_view to_string(Regime r) { return r == Regime::Dms ? "dms" : "gaussian"; }

std::string_view to_string(CurveSide s) {
  switch (s) {
    case CurveSide::Excess:
      return "excess";
    case CurveSide::ExcessUpper:
      return "excess-upper";
    case CurveSide::Correct:
      return "correct";
  }
  return "?";
}

double EpsilonSequence::operator()(std::int64_t n) const {
  if (n < 1) throw DomainError("blocklength must be >= 1");
  return c_ * std::pow(static_cast<double>(n), -t_);
}

EpsilonSequence make_epsilon(double c, double t, Regime regime) {
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidScale("epsilon scale c must be positive");
  if (!(t > 0.0 && t < 0.5)) throw InvalidExponent("epsilon exponent t must lie in (0, 1/2)");
  return EpsilonSequence(c, t, regime);
}

double type_count(std::size_t k, std::int64_t n) {
  if (k == 0 || n < 0) throw DomainError("type_count needs k >= 1 and n >= 0");
  const double m = static_cast<double>(k) - 1.0;
  const double nn = static_cast<double>(n);
  return std::round(std::exp(log_gamma(nn + m + 1.0) - log_gamma(nn + 1.0) - log_gamma(m + 1.0)));
}

namespace {

// Colex successor; false after the last type (0, ..., 0, n).
bool next_type(std::vector<std::int64_t>& c) {
  std::size_t i = 0;
  while (i < c.size() && c[i] == 0) ++i;
  if (i + 1 >= c.size()) return false;
  const std::int64_t t = c[i];
  c[i] = 0;
  c[0] = t - 1;
  c[i + 1] += 1;
  return true;
}

void check_scan(std::size_t k, std::int64_t n, const ScanOptions& options) {
  if (n < 1) throw DomainError("blocklength must be >= 1");
  if (options.chunk == 0) throw DomainError("chunk size must be positive");
  const double count = type_count(k, n);
  if (count > static_cast<double>(options.budget)) {
    throw BudgetExceeded("type enumeration exceeds the budget",
                         {{"types", count}, {"budget", static_cast<double>(options.budget)}});
  }
}

// First type of every chunk, in colex order.
std::vector<std::vector<std::int64_t>> chunk_starts(std::size_t k, std::int64_t n,
                                                    std::size_t chunk) {
  std::vector<std::vector<std::int64_t>> starts;
  std::vector<std::int64_t> c(k, 0);
  c[0] = n;
  std::size_t pos = 0;
  do {
    if (pos % chunk == 0) starts.push_back(c);
    ++pos;
  } while (next_type(c));
  return starts;
}

struct TypeVisit {
  std::span<const std::int64_t> counts;
  double log_prob;
  double rate;  // NaN when not requested or the type has probability zero
};

// Runs visit(acc, type) over all n-types, one accumulator per chunk, and
// returns the accumulators in chunk order.
template <class Acc, class Visit>
std::vector<Acc> scan_types(const Pmf& p, const DistortionSpec* d, double distortion,
                            std::int64_t n, const ScanOptions& options, const Parallelism& par,
                            Visit&& visit) {
  const std::size_t k = p.size();
  if (d != nullptr && d->source_size() != k) {
    throw DimensionMismatch("source and distortion sizes differ");
  }
  check_scan(k, n, options);
  const auto starts = chunk_starts(k, n, options.chunk);
  std::vector<Acc> out(starts.size());
  par.for_each(starts.size(), [&](std::size_t ci) {
    std::vector<std::int64_t> c = starts[ci];
    std::optional<RdWarmStart> warm;
    std::vector<double> w(k);
    for (std::size_t j = 0; j < options.chunk; ++j) {
      const double lp = log_type_class_prob(c, p);
      double rate = std::numeric_limits<double>::quiet_NaN();
      if (d != nullptr && lp != kNegInf) {
        for (std::size_t x = 0; x < k; ++x) w[x] = static_cast<double>(c[x]);
        const auto sol = rate_distortion_dms(Pmf::from_weights(w), *d, distortion, options.rd,
                                             warm ? &*warm : nullptr);
        if (!sol.zero_rate) warm = warm_start_from(sol);
        rate = sol.rate;
      }
      visit(out[ci], TypeVisit{c, lp, rate});
      if (!next_type(c)) break;
    }
  });
  return out;
}

struct LogMass {
  std::vector<double> terms;
};

LogProb merge(std::vector<LogMass>& chunks) {
  std::vector<double> partial;
  partial.reserve(chunks.size());
  for (auto& ch : chunks) {
    if (!ch.terms.empty()) partial.push_back(log_sum_exp(ch.terms));
  }
  if (partial.empty()) return LogProb::zero();
  return LogProb(log_sum_exp(partial));
}

LogProb threshold_event(const Pmf& p, const DistortionSpec& d, double distortion, std::int64_t n,
                        double threshold, RateSide side, const ScanOptions& options,
                        const Parallelism& par) {
  if (!(distortion > 0.0) || !std::isfinite(distortion)) {
    throw DomainError("distortion level must be positive and finite");
  }
  if (std::isnan(threshold)) throw DomainError("threshold is NaN");
  auto chunks = scan_types<LogMass>(p, &d, distortion, n, options, par,
                                    [&](LogMass& acc, const TypeVisit& t) {
                                      if (t.log_prob == kNegInf) return;
                                      const bool hit = side == RateSide::AtLeast
                                                           ? t.rate >= threshold
                                                           : t.rate <= threshold;
                                      if (hit) acc.terms.push_back(t.log_prob);
                                    });
  return merge(chunks);
}

double trend_slope(const std::vector<MdRow>& rows) {
  const std::size_t first = rows.size() / 2;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = first; i < rows.size(); ++i) {
    if (std::isfinite(rows[i].z)) {
      pts.emplace_back(std::log(static_cast<double>(rows[i].n)), rows[i].z);
    }
  }
  if (pts.size() < 2) return 0.0;
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (const auto& [x, y] : pts) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

MdRow make_row(std::int64_t n, double eps, LogProb logp) {
  const double scale = static_cast<double>(n) * eps * eps;
  return {n, eps, logp, logp.is_zero() ? kNegInf : logp.value() / scale};
}

void check_grid(std::span<const std::int64_t> ns) {
  if (ns.empty()) throw DomainError("empty blocklength grid");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] < 1) throw DomainError("blocklengths must be >= 1");
    if (i > 0 && ns[i] <= ns[i - 1]) throw DomainError("blocklength grid must be increasing");
  }
}

double dispersion_or_throw(const Pmf& p, const DistortionSpec& d, double distortion,
                           const Parallelism& par) {
  const double v = dispersion_dms(p, d, distortion, {}, par).value;
  if (v < kDegenerateDispersion) {
    throw DegenerateDispersion("dispersion vanishes", {{"dispersion", v}});
  }
  return v;
}

}  // namespace

void for_each_type(std::size_t k, std::int64_t n,
                   const std::function<void(std::span<const std::int64_t>)>& fn) {
  if (k == 0 || n < 0) throw DomainError("for_each_type needs k >= 1 and n >= 0");
  std::vector<std::int64_t> c(k, 0);
  c[0] = n;
  do {
    fn(c);
  } while (next_type(c));
}

LogProb total_type_mass(const Pmf& p, std::int64_t n, const ScanOptions& options,
                        const Parallelism& par) {
  auto chunks = scan_types<LogMass>(p, nullptr, 0.0, n, options, par,
                                    [](LogMass& acc, const TypeVisit& t) {
                                      if (t.log_prob != kNegInf) acc.terms.push_back(t.log_prob);
                                    });
  return merge(chunks);
}

LogProb exact_excess_prob_dms(const Pmf& p, const DistortionSpec& d, double distortion,
                              std::int64_t n, double threshold, const ScanOptions& options,
                              const Parallelism& par) {
  return threshold_event(p, d, distortion, n, threshold, RateSide::AtLeast, options, par);
}

LogProb exact_correct_prob_dms(const Pmf& p, const DistortionSpec& d, double distortion,
                               std::int64_t n, double threshold, const ScanOptions& options,
                               const Parallelism& par) {
  return threshold_event(p, d, distortion, n, threshold, RateSide::AtMost, options, par);
}

TypeProjection min_divergence_type(const Pmf& p, const DistortionSpec& d, double distortion,
                                   std::int64_t n, double threshold, RateSide side,
                                   const ScanOptions& options, const Parallelism& par) {
  if (!(distortion > 0.0) || !std::isfinite(distortion)) {
    throw DomainError("distortion level must be positive and finite");
  }
  struct Best {
    std::vector<std::int64_t> counts;
    double divergence = kInf;
    std::int64_t qualifying = 0;
  };
  auto chunks = scan_types<Best>(
      p, &d, distortion, n, options, par, [&](Best& acc, const TypeVisit& t) {
        if (t.log_prob == kNegInf) return;
        const bool hit = side == RateSide::AtLeast ? t.rate >= threshold : t.rate <= threshold;
        if (!hit) return;
        ++acc.qualifying;
        std::vector<double> w(t.counts.begin(), t.counts.end());
        const double kl = kl_divergence(Pmf::from_weights(std::move(w)), p);
        if (kl < acc.divergence) {
          acc.divergence = kl;
          acc.counts.assign(t.counts.begin(), t.counts.end());
        }
      });
  TypeProjection out;
  for (auto& ch : chunks) {
    out.qualifying += ch.qualifying;
    if (ch.divergence < out.divergence) {
      out.divergence = ch.divergence;
      out.minimizer = NType(std::move(ch.counts));
    }
  }
  return out;
}

MdCurve md_curve_dms(const Pmf& p, const DistortionSpec& d, double distortion,
                     const EpsilonSequence& eps, std::span<const std::int64_t> ns, CurveSide side,
                     const ScanOptions& options, const Parallelism& par) {
  if (side == CurveSide::ExcessUpper) {
    throw DomainError("side excess-upper applies to the Gaussian regime only");
  }
  check_grid(ns);
  MdCurve curve;
  curve.target = -1.0 / (2.0 * dispersion_or_throw(p, d, distortion, par));
  const double r0 = rate_distortion_dms(p, d, distortion, options.rd).rate;
  for (const std::int64_t n : ns) {
    const double e = eps(n);
    const LogProb lp =
        side == CurveSide::Excess
            ? exact_excess_prob_dms(p, d, distortion, n, r0 + e, options, par)
            : exact_correct_prob_dms(p, d, distortion, n, r0 - e, options, par);
    curve.rows.push_back(make_row(n, e, lp));
  }
  curve.trend_slope = trend_slope(curve.rows);
  return curve;
}

LogProb gaussian_tail_logprob(std::int64_t n, double eps, CurveSide side) {
  if (n < 1) throw DomainError("blocklength must be >= 1");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("eps must be positive");
  const double s = 0.5 * static_cast<double>(n);
  const double upper = log_regularized_gamma_upper(s, s * std::exp(2.0 * eps));
  const double lower = log_regularized_gamma_lower(s, s * std::exp(-2.0 * eps));
  switch (side) {
    case CurveSide::Excess:
      return LogProb(log_add_exp(upper, lower));
    case CurveSide::ExcessUpper:
      return LogProb(upper);
    case CurveSide::Correct:
      return LogProb(lower);
  }
  return LogProb::zero();
}

MdCurve gaussian_tail_curve(const GaussianProblem&, const EpsilonSequence& eps,
                            std::span<const std::int64_t> ns, CurveSide side) {
  check_grid(ns);
  MdCurve curve;
  curve.target = -1.0;
  for (const std::int64_t n : ns) {
    const double e = eps(n);
    curve.rows.push_back(make_row(n, e, gaussian_tail_logprob(n, e, side)));
  }
  curve.trend_slope = trend_slope(curve.rows);
  return curve;
}

TypeRatioPoint type_ratio(const Pmf& p, const DistortionSpec& d, double distortion,
                         double epsprime, std::int64_t n, const ScanOptions& options,
                         const Parallelism& par) {
  if (!(epsprime > 0.0)) throw DomainError("eps' must be positive");
  const double r0 = rate_distortion_dms(p, d, distortion, options.rd).rate;
  const auto f = marton_exponent_dms(p, d, distortion, r0 + epsprime);
  if (f.infeasible) throw InfeasibleRate("R(P,D) + eps' exceeds the largest achievable rate");
  const auto proj =
      min_divergence_type(p, d, distortion, n, r0 + epsprime, RateSide::AtLeast, options, par);
  if (!proj.minimizer) {
    throw NoFeasibleType("no n-type reaches the rate threshold",
                         {{"n", static_cast<double>(n)}, {"threshold", r0 + epsprime}});
  }
  return {n, proj.divergence / f.value, proj.divergence, f.value, *proj.minimizer};
}

TypeRatioCurve type_ratio_curve(const Pmf& p, const DistortionSpec& d, double distortion,
                         double epsprime, std::span<const std::int64_t> ns,
                         const ScanOptions& options, const Parallelism& par) {
  check_grid(ns);
  TypeRatioCurve out;
  for (const std::int64_t n : ns) {
    try {
      out.points.push_back(type_ratio(p, d, distortion, epsprime, n, options, par));
    } catch (const NoFeasibleType&) {
      out.infeasible.push_back(n);
    }
  }
  return out;
}

double default_covering_constant(const DistortionSpec& d) {
  return static_cast<double>(d.source_size() * d.reproduction_size()) + 2.0;
}

LogProb achievability_bound_dms(const Pmf& p, const DistortionSpec& d, double distortion,
                                std::int64_t n, double eps, double covering_constant,
                                CurveSide side, const ScanOptions& options,
                                const Parallelism& par) {
  if (n < 2) throw DomainError("blocklength must be >= 2");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("eps must be positive");
  if (!(covering_constant >= 0.0)) throw DomainError("covering constant must be >= 0");
  if (side == CurveSide::ExcessUpper) {
    throw DomainError("side excess-upper applies to the Gaussian regime only");
  }
  const double nn = static_cast<double>(n);
  const double k = static_cast<double>(p.size());
  const double overhead = covering_constant * std::log(nn) / nn + k * std::log1p(nn) / nn;
  const double r0 = rate_distortion_dms(p, d, distortion, options.rd).rate;

  if (side == CurveSide::Correct) {
    const double threshold = r0 - eps - overhead;
    if (threshold < 0.0) {
      throw BoundVacuous("rate threshold falls below zero", {{"threshold", threshold}});
    }
    const auto proj =
        min_divergence_type(p, d, distortion, n, threshold, RateSide::AtMost, options, par);
    if (!proj.minimizer) {
      throw BoundVacuous("no n-type meets the rate threshold", {{"threshold", threshold}});
    }
    return LogProb(-k * std::log1p(nn) - nn * proj.divergence);
  }

  const double eps_prime = eps - overhead;
  if (eps_prime <= 0.0) {
    throw BoundVacuous("log-factor overhead exceeds eps", {{"eps_prime", eps_prime}});
  }
  const double v = dispersion_or_throw(p, d, distortion, par);
  const auto f = marton_exponent_dms(p, d, distortion, r0 + eps_prime);
  const double type_term = f.infeasible ? kNegInf : k * std::log1p(nn) - nn * f.value;
  const double ball_term = k * std::log(2.0) - nn * eps * eps / (2.0 * v);
  const double bound = log_add_exp(type_term, ball_term);
  if (bound >= 0.0) throw BoundVacuous("bound is not below one", {{"log_bound", bound}});
  return LogProb(bound);
}

GaussianBound gaussian_achievability_bound(const GaussianProblem& g, std::int64_t n, double eps) {
  if (n < 1) throw DomainError("blocklength must be >= 1");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("eps must be positive");
  const double nn = static_cast<double>(n);
  const double eps_prime = eps - 2.5 * std::log(nn) / nn - std::log(6.0) / nn;
  if (eps_prime <= 0.0) {
    throw BoundVacuous("log-factor overhead exceeds eps", {{"eps_prime", eps_prime}});
  }
  const double two = 2.0 * eps_prime;
  const double bound = std::log(4.0) - 0.5 * nn * (std::expm1(two) - two);
  if (bound >= 0.0) throw BoundVacuous("bound is not below one", {{"log_bound", bound}});
  const double log_size = std::log(6.0) + 2.5 * std::log(nn) +
                          0.5 * nn * (std::log(g.variance / g.distortion) + two);
  return {LogProb(bound), log_size, eps_prime};
}

void write_csv(std::ostream& out, const MdCurve& curve) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "n,eps,logp,z,target\n";
  for (const auto& r : curve.rows) {
    out << r.n << ',' << num(r.eps) << ',' << num(r.logp.value()) << ',' << num(r.z) << ','
        << num(curve.target) << '\n';
  }
}

}  // namespace mdsc
