#include "mdsc/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "mdsc/dispersion.hpp"
#include "mdsc/error.hpp"

namespace mdsc {

namespace {

// A simplex point together with the quantities the Lagrangian needs.
struct Point {
  std::vector<double> q;
  double kl = 0.0;
  double rate = 0.0;
  std::vector<double> grad;  // tilted information, zero on the zero-rate region
  std::optional<RdWarmStart> warm;
};

class Lagrangian {
 public:
  static constexpr int kStallLimit = 30;

  // sign = +1: minimize D(Q||P) - mu R(Q); sign = -1: minimize D(Q||P) + mu R(Q).
  Lagrangian(const Pmf& p, const DistortionSpec& d, double distortion, double sign,
             const ExponentOptions& options)
      : p_(p), d_(d), distortion_(distortion), sign_(sign), options_(options) {
    for (std::size_t x = 0; x < p.size(); ++x) {
      if (p[x] > 0.0) support_.push_back(x);
    }
  }

  Point evaluate(std::vector<double> q, const RdWarmStart* warm) const {
    Point pt;
    const Pmf law = Pmf::from_weights(q);
    pt.q.assign(law.weights().begin(), law.weights().end());
    pt.kl = kl_divergence(law, p_);
    if (zero_rate_distortion(law, d_) <= distortion_) {
      pt.rate = 0.0;
      pt.grad.assign(p_.size(), 0.0);
      return pt;
    }
    auto tilted = tilted_information(law, d_, distortion_, options_.rd, warm);
    pt.rate = tilted.solution.rate;
    pt.warm = warm_start_from(tilted.solution);
    pt.grad = std::move(tilted.values);
    return pt;
  }

  double objective(const Point& pt, double mu) const { return pt.kl - sign_ * mu * pt.rate; }

  // Exponentiated-gradient descent on the Lagrangian at fixed mu. R(., D)
  // has a kink on the boundary of its zero set, so besides the step-size test
  // the loop also stops once the objective has not moved for a while.
  Point descend(double mu, Point cur, int& iterations, bool& converged) const {
    double eta = 1.0;
    const double noise = 1e-13 + 4.0 * mu * options_.rd.rate_tolerance;
    int stall = 0;
    converged = false;
    for (int it = 0; it < options_.max_descent_iterations; ++it) {
      ++iterations;
      std::vector<double> logw(support_.size());
      for (std::size_t k = 0; k < support_.size(); ++k) {
        const std::size_t x = support_[k];
        const double lq = cur.q[x] > 0.0 ? std::log(cur.q[x]) : -745.0;
        logw[k] = (1.0 - eta) * lq + eta * (std::log(p_[x]) + sign_ * mu * cur.grad[x]);
      }
      const double shift = *std::max_element(logw.begin(), logw.end());
      std::vector<double> next(p_.size(), 0.0);
      for (std::size_t k = 0; k < support_.size(); ++k) {
        next[support_[k]] = std::exp(logw[k] - shift);
      }
      Point cand = evaluate(std::move(next), cur.warm ? &*cur.warm : nullptr);
      const double step = l1_distance(Pmf::from_weights(cand.q), Pmf::from_weights(cur.q));
      const double gain = objective(cur, mu) - objective(cand, mu);
      if (gain > 0.0) {
        stall = gain > noise ? 0 : stall + 1;
        cur = std::move(cand);
        if (step < 1e-12) {
          converged = true;
          break;
        }
        eta = std::min(1.0, 2.0 * eta);
      } else {
        ++stall;
        eta *= 0.5;
      }
      if (stall >= kStallLimit || eta < 1e-12) {
        converged = true;  // at the objective's noise floor
        break;
      }
    }
    return cur;
  }

  const std::vector<std::size_t>& support() const { return support_; }

 private:
  const Pmf& p_;
  const DistortionSpec& d_;
  double distortion_;
  double sign_;
  const ExponentOptions& options_;
  std::vector<std::size_t> support_;
};

ExponentResult finish(const Pmf& p, const Point& pt, double mu, bool converged, int iterations) {
  ExponentResult r;
  r.minimizer = Pmf::from_weights(pt.q);
  r.value = kl_divergence(r.minimizer, p);
  r.minimizer_rate = pt.rate;
  r.active = true;
  r.multiplier = mu;
  r.converged = converged;
  r.iterations = iterations;
  return r;
}

ExponentResult inactive(const Pmf& p, double rate) {
  ExponentResult r;
  r.minimizer = p;
  r.minimizer_rate = rate;
  return r;
}

void check_inputs(const Pmf& p, const DistortionSpec& d, double distortion, double rate) {
  if (p.size() != d.source_size()) throw DimensionMismatch("source and distortion sizes differ");
  if (!(distortion > 0.0) || !std::isfinite(distortion)) {
    throw DomainError("distortion level must be positive and finite");
  }
  if (!(rate >= 0.0) || !std::isfinite(rate)) throw DomainError("rate must be finite and >= 0");
}

// Illinois regula falsi on g(mu) = rate(Q_mu) - target, given a sign change
// between lo and hi. increasing: g grows with mu.
struct MuSearch {
  double mu;
  Point point;
  bool converged;
};

template <class Solve>
MuSearch search_multiplier(Solve&& solve, double lo, Point lo_pt, double hi, Point hi_pt,
                           double target, const ExponentOptions& options) {
  double g_lo = lo_pt.rate - target;
  double g_hi = hi_pt.rate - target;
  int side = 0;
  for (int it = 0; it < options.max_multiplier_iterations; ++it) {
    if (std::fabs(g_hi) <= options.rate_tolerance) return {hi, std::move(hi_pt), true};
    if (std::fabs(g_lo) <= options.rate_tolerance) return {lo, std::move(lo_pt), true};
    double mu = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
    if (!(mu > std::min(lo, hi) && mu < std::max(lo, hi))) mu = 0.5 * (lo + hi);
    if (std::fabs(hi - lo) <= 1e-14 * std::max(1.0, std::fabs(hi))) break;
    const Point& warm = std::fabs(mu - lo) < std::fabs(mu - hi) ? lo_pt : hi_pt;
    Point pt = solve(mu, warm);
    const double g = pt.rate - target;
    if ((g > 0.0) == (g_hi > 0.0)) {
      hi = mu;
      hi_pt = std::move(pt);
      g_hi = g;
      if (side == 1) g_lo *= 0.5;
      side = 1;
    } else {
      lo = mu;
      lo_pt = std::move(pt);
      g_lo = g;
      if (side == -1) g_hi *= 0.5;
      side = -1;
    }
  }
  // The rate along the multiplier path can jump; settle on the feasible end.
  return {hi, std::move(hi_pt), false};
}

}  // namespace

MaxRate max_rate_dms(const Pmf& p, const DistortionSpec& d, double distortion,
                     const RdOptions& rd) {
  ExponentOptions options;
  options.rd = rd;
  Lagrangian lag(p, d, distortion, 1.0, options);
  std::vector<double> start(p.size(), 0.0);
  for (std::size_t x : lag.support()) start[x] = 1.0;
  Point cur = lag.evaluate(start, nullptr);
  if (cur.rate == 0.0) return {0.0, Pmf::from_weights(cur.q)};
  double eta = 1.0;
  for (int it = 0; it < 20'000; ++it) {
    std::vector<double> logw(lag.support().size());
    for (std::size_t k = 0; k < logw.size(); ++k) {
      const std::size_t x = lag.support()[k];
      logw[k] = std::log(cur.q[x]) + eta * cur.grad[x];
    }
    const double shift = *std::max_element(logw.begin(), logw.end());
    std::vector<double> next(p.size(), 0.0);
    for (std::size_t k = 0; k < logw.size(); ++k) {
      next[lag.support()[k]] = std::exp(logw[k] - shift);
    }
    Point cand = lag.evaluate(std::move(next), cur.warm ? &*cur.warm : nullptr);
    const double step = l1_distance(Pmf::from_weights(cand.q), Pmf::from_weights(cur.q));
    if (cand.rate >= cur.rate - 4.0 * rd.rate_tolerance) {
      cur = std::move(cand);
      if (step < 1e-12) break;
      eta = std::min(64.0, 2.0 * eta);
    } else {
      eta *= 0.5;
      if (eta < 1e-10) break;
    }
  }
  return {cur.rate, Pmf::from_weights(cur.q)};
}

ExponentResult marton_exponent_dms(const Pmf& p, const DistortionSpec& d, double distortion,
                                   double rate, const ExponentOptions& options) {
  check_inputs(p, d, distortion, rate);
  const auto base = rate_distortion_dms(p, d, distortion, options.rd);
  if (rate <= base.rate + options.rate_tolerance) return inactive(p, base.rate);

  const auto top = max_rate_dms(p, d, distortion, options.rd);
  if (rate > top.rate + options.rate_tolerance) {
    ExponentResult r;
    r.infeasible = true;
    r.value = kInf;
    r.minimizer = top.maximizer;
    r.minimizer_rate = top.rate;
    r.active = true;
    r.multiplier = kInf;
    return r;
  }

  Lagrangian lag(p, d, distortion, 1.0, options);
  int iterations = 0;
  bool all_converged = true;
  auto solve = [&](double mu, const Point& start) {
    bool ok = false;
    Point pt = lag.descend(mu, start, iterations, ok);
    all_converged = all_converged && ok;
    return pt;
  };

  Point lo_pt = lag.evaluate(std::vector<double>(p.weights().begin(), p.weights().end()),
                             nullptr);
  double lo = 0.0;
  double hi = 1.0;
  Point hi_pt = solve(hi, lo_pt);
  while (hi_pt.rate < rate - options.rate_tolerance) {
    if (hi > 1e8) {
      // The constraint sits at the top of the rate range: the maximizer is optimal.
      Point pt = lag.evaluate(std::vector<double>(top.maximizer.weights().begin(),
                                                  top.maximizer.weights().end()),
                              nullptr);
      return finish(p, pt, kInf, false, iterations);
    }
    lo = hi;
    lo_pt = std::move(hi_pt);
    hi *= 4.0;
    hi_pt = solve(hi, lo_pt);
  }
  auto found = search_multiplier(solve, lo, std::move(lo_pt), hi, std::move(hi_pt), rate, options);
  return finish(p, found.point, found.mu, found.converged && all_converged, iterations);
}

ZeroRateProjection zero_rate_projection(const Pmf& p, const DistortionSpec& d, double distortion) {
  if (p.size() != d.source_size()) throw DimensionMismatch("source and distortion sizes differ");
  std::optional<ZeroRateProjection> best;
  for (std::size_t xh = 0; xh < d.reproduction_size(); ++xh) {
    auto tilt = [&](double s) {
      std::vector<double> w(p.size(), 0.0);
      double mn = kInf;
      for (std::size_t x = 0; x < p.size(); ++x) {
        if (p[x] > 0.0) mn = std::min(mn, d(x, xh));
      }
      for (std::size_t x = 0; x < p.size(); ++x) {
        if (p[x] > 0.0) w[x] = p[x] * std::exp(-s * (d(x, xh) - mn));
      }
      return Pmf::from_weights(std::move(w));
    };
    auto mean = [&](const Pmf& q) {
      double m = 0.0;
      for (std::size_t x = 0; x < q.size(); ++x) m += q[x] * d(x, xh);
      return m;
    };
    double floor = kInf;
    for (std::size_t x = 0; x < p.size(); ++x) {
      if (p[x] > 0.0) floor = std::min(floor, d(x, xh));
    }
    if (floor > distortion) continue;
    Pmf q = p;
    if (mean(p) > distortion) {
      double lo = 0.0;
      double hi = 1.0;
      while (mean(tilt(hi)) > distortion && hi < 1e12) hi *= 2.0;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mean(tilt(mid)) > distortion) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      q = tilt(hi);
    }
    const double kl = kl_divergence(q, p);
    if (!best || kl < best->divergence) best = ZeroRateProjection{kl, q};
  }
  if (!best) throw InfeasibleRate("no source law on the support of P has zero rate");
  return *best;
}

ExponentResult correct_exponent_dms(const Pmf& p, const DistortionSpec& d, double distortion,
                                    double rate, const ExponentOptions& options,
                                    const Parallelism& par) {
  check_inputs(p, d, distortion, rate);
  const auto base = rate_distortion_dms(p, d, distortion, options.rd);
  if (rate >= base.rate - options.rate_tolerance) return inactive(p, base.rate);

  const auto zero = zero_rate_projection(p, d, distortion);
  if (rate <= 0.0) {
    ExponentResult r;
    r.minimizer = zero.minimizer;
    r.value = zero.divergence;
    r.active = true;
    return r;
  }
  Lagrangian lag(p, d, distortion, -1.0, options);
  const auto& support = lag.support();

  // Seeds: P, uniform on supp P, then Dirichlet(1) draws from a fixed stream.
  const int starts = std::max(1, options.starts);
  std::vector<std::vector<double>> seeds;
  seeds.emplace_back(p.weights().begin(), p.weights().end());
  if (starts > 1) {
    std::vector<double> u(p.size(), 0.0);
    for (std::size_t x : support) u[x] = 1.0;
    seeds.push_back(std::move(u));
  }
  std::mt19937_64 rng(options.seed);
  while (static_cast<int>(seeds.size()) < starts) {
    std::vector<double> w(p.size(), 0.0);
    for (std::size_t x : support) {
      // exponential variate from a 53-bit uniform, so the stream is portable
      const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
      w[x] = -std::log(u);
    }
    seeds.push_back(std::move(w));
  }

  std::vector<std::optional<ExponentResult>> runs(seeds.size());
  par.for_each(seeds.size(), [&](std::size_t s) {
    int iterations = 0;
    bool all_converged = true;
    auto solve = [&](double mu, const Point& start) {
      bool ok = false;
      Point pt = lag.descend(mu, start, iterations, ok);
      all_converged = all_converged && ok;
      return pt;
    };
    // Large multipliers push the iterate onto the kink at the zero-rate
    // boundary, so the bracket grows from below.
    Point lo_pt = lag.evaluate(std::vector<double>(p.weights().begin(), p.weights().end()),
                               nullptr);
    double lo = 0.0;
    double hi = 1.0 / 64.0;
    Point hi_pt = solve(hi, lag.evaluate(seeds[s], nullptr));
    while (hi_pt.rate > rate + options.rate_tolerance) {
      if (hi > 1e8) return;
      lo = hi;
      lo_pt = hi_pt;
      hi *= 2.0;
      hi_pt = solve(hi, lo_pt);
    }
    auto found =
        search_multiplier(solve, lo, std::move(lo_pt), hi, std::move(hi_pt), rate, options);
    if (found.point.rate > rate + options.rate_tolerance) return;
    runs[s] = finish(p, found.point, found.mu, found.converged && all_converged, iterations);
  });

  std::optional<ExponentResult> best;
  double lo_val = kInf;
  double hi_val = -kInf;
  int iterations = 0;
  for (const auto& r : runs) {
    if (!r) continue;
    iterations += r->iterations;
    lo_val = std::min(lo_val, r->value);
    hi_val = std::max(hi_val, r->value);
    if (!best || r->value < best->value) best = r;
  }
  if (!best || zero.divergence < best->value) {
    ExponentResult r;
    r.minimizer = zero.minimizer;
    r.value = zero.divergence;
    r.minimizer_rate = 0.0;
    r.active = true;
    r.multiplier = 0.0;
    r.converged = true;
    best = r;
  }
  best->iterations = iterations;
  best->multimodal = hi_val > lo_val && hi_val - lo_val > 1e-6;
  return *best;
}

double gaussian_excess_exponent(const GaussianProblem& g, double rate) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) throw DomainError("rate must be finite and >= 0");
  if (rate <= rate_distortion_gaussian(g)) return 0.0;
  // x = (D/var) e^{2R}; x - 1 - ln x with u = ln x kept away from cancellation
  const double u = 2.0 * rate + std::log(g.distortion / g.variance);
  return 0.5 * (std::expm1(u) - u);
}

double gaussian_correct_exponent(const GaussianProblem& g, double rate) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) throw DomainError("rate must be finite and >= 0");
  if (rate >= rate_distortion_gaussian(g)) return 0.0;
  const double u = 2.0 * rate + std::log(g.distortion / g.variance);
  return 0.5 * (std::expm1(u) - u);
}

LimitRatioReport quadratic_limit_ratio(const Problem& problem, std::span<const double> deltas,
                                       const ExponentOptions& options, const Parallelism& par) {
  if (deltas.empty()) throw DomainError("need at least one delta");
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    if (!(deltas[k] > 0.0) || !std::isfinite(deltas[k])) throw DomainError("deltas must be positive");
    if (k > 0 && !(deltas[k] < deltas[k - 1])) {
      throw DomainError("deltas must be strictly decreasing");
    }
  }
  LimitRatioReport out;
  out.deltas.assign(deltas.begin(), deltas.end());
  out.exponents.resize(deltas.size());
  if (const auto* dms = std::get_if<DmsProblem>(&problem)) {
    out.dispersion = dispersion_dms(dms->source, dms->distortion, dms->level, {}, par).value;
    if (out.dispersion < kDegenerateDispersion) {
      throw DegenerateDispersion("dispersion vanishes", {{"dispersion", out.dispersion}});
    }
    const double r0 = rate_distortion_dms(dms->source, dms->distortion, dms->level, options.rd).rate;
    par.for_each(deltas.size(), [&](std::size_t k) {
      const auto f =
          marton_exponent_dms(dms->source, dms->distortion, dms->level, r0 + deltas[k], options);
      if (f.infeasible) throw InfeasibleRate("delta exceeds the achievable rate range");
      out.exponents[k] = f.value;
    });
  } else {
    const auto& g = std::get<GaussianProblem>(problem);
    out.dispersion = dispersion_gaussian();
    const double r0 = rate_distortion_gaussian(g);
    for (std::size_t k = 0; k < deltas.size(); ++k) {
      out.exponents[k] = gaussian_excess_exponent(g, r0 + deltas[k]);
    }
  }
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    out.ratios.push_back(out.exponents[k] * 2.0 * out.dispersion / (deltas[k] * deltas[k]));
  }
  out.upper_limits.resize(deltas.size());
  out.lower_limits.resize(deltas.size());
  double sup = -kInf;
  double inf = kInf;
  for (std::size_t k = deltas.size(); k-- > 0;) {
    sup = std::max(sup, out.ratios[k]);
    inf = std::min(inf, out.ratios[k]);
    out.upper_limits[k] = sup;
    out.lower_limits[k] = inf;
  }
  const std::size_t m = deltas.size();
  if (m >= 2) {
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      mx += deltas[k];
      my += out.ratios[k] - 1.0;
    }
    mx /= static_cast<double>(m);
    my /= static_cast<double>(m);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      sxy += (deltas[k] - mx) * (out.ratios[k] - 1.0 - my);
      sxx += (deltas[k] - mx) * (deltas[k] - mx);
    }
    out.slope = sxy / sxx;
    const double d1 = deltas[m - 2];
    const double d2 = deltas[m - 1];
    const double r1 = out.ratios[m - 2];
    const double r2 = out.ratios[m - 1];
    out.intercept = r2 - d2 * (r1 - r2) / (d1 - d2);
  } else {
    out.intercept = out.ratios.front();
  }
  return out;
}

double md_exponent_prediction(const Problem& problem, const Parallelism& par) {
  if (const auto* dms = std::get_if<DmsProblem>(&problem)) {
    const double v = dispersion_dms(dms->source, dms->distortion, dms->level, {}, par).value;
    if (v < kDegenerateDispersion) {
      throw DegenerateDispersion("dispersion vanishes", {{"dispersion", v}});
    }
    return -1.0 / (2.0 * v);
  }
  return -1.0;
}

}  // namespace mdsc
