// One line per acceptance criterion: [PASS] or [FAIL], the measured values
// and the wall time. Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mdsc/dispersion.hpp"
#include "mdsc/error.hpp"
#include "mdsc/exponents.hpp"
#include "mdsc/md_empirics.hpp"
#include "oracles.hpp"

using namespace mdsc;
using test::binary_dispersion;
using test::h2;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void criterion(int id, const char* title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("threw: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("[%s] #%d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(),
              secs);
  std::fflush(stdout);
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main() {
  const auto ham2 = DistortionSpec::hamming(2);

  criterion(1, "Blahut-Arimoto vs closed form", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const double a = 0.01 + 0.98 * u(rng);
      const double D = (0.001 + 0.998 * u(rng)) * std::min(a, 1 - a);
      const double r = rate_distortion_dms(Pmf::bernoulli(a), ham2, D).rate;
      worst = std::max(worst, std::fabs(r - (h2(a) - h2(D))));
    }
    const double secs = elapsed_since(t0);
    return Outcome{worst <= 1e-6 && secs < 5.0,
                   fmt("max |error| = %.3g nats over 50 cases (tol 1e-6), %.2f s (limit 5 s)", worst,
                       secs)};
  });

  criterion(2, "dispersion closed form", [&] {
    double worst_fd = 0.0, worst_tilted = 0.0;
    for (int i = 1; i <= 9; ++i) {
      const double a = 0.05 * i;
      for (double D : {0.01, 0.03}) {
        const auto r = dispersion_dms(Pmf::bernoulli(a), ham2, D);
        const double want = binary_dispersion(a);
        worst_fd = std::max(worst_fd, std::fabs(r.value / want - 1));
        worst_tilted = std::max(worst_tilted, std::fabs(r.tilted_value / want - 1));
      }
    }
    return Outcome{worst_fd <= 0.01 && worst_tilted <= 0.01,
                   fmt("max relative error: finite difference %.3g, tilted %.3g (tol 1%%)", worst_fd,
                       worst_tilted)};
  });

  criterion(3, "dispersion maximizer", [&] {
    const auto peak = max_dispersion_bernoulli();
    return Outcome{std::fabs(peak.alpha - 0.0832) <= 1e-3,
                   fmt("alpha* = %.6f, V = %.6f (want 0.0832 +- 1e-3)", peak.alpha, peak.dispersion)};
  });

  criterion(4, "gaussian dispersion", [&] {
    double worst = 0.0;
    const double hh = 1e-4;
    for (double var : {0.5, 1.0, 4.0}) {
      for (double D : {0.1, 0.25}) {
        const GaussianProblem g(var, D);
        const double r0 = rate_distortion_gaussian(g);
        const double second = (gaussian_excess_exponent(g, r0 + 2 * hh) -
                               2 * gaussian_excess_exponent(g, r0 + hh) +
                               gaussian_excess_exponent(g, r0)) / (hh * hh);
        worst = std::max(worst, std::fabs(second - 2.0));
      }
    }
    return Outcome{worst <= 1e-3,
                   fmt("max |second difference - 2| = %.3g over 6 cases (tol 1e-3)", worst)};
  });

  criterion(5, "quadratic limit ratio", [&] {
    const std::vector<double> deltas{0.05, 0.025, 0.0125};
    const auto b = quadratic_limit_ratio(Problem{DmsProblem{Pmf::bernoulli(0.11), ham2, 0.05}}, deltas);
    const auto g = quadratic_limit_ratio(Problem{GaussianProblem(1.0, 0.25)}, deltas);
    double gauss_err = 0.0;
    for (std::size_t k = 0; k < deltas.size(); ++k) {
      const double dl = deltas[k];
      gauss_err = std::max(gauss_err,
                           std::fabs(g.ratios[k] - (std::exp(2 * dl) - 1 - 2 * dl) / (2 * dl * dl)));
    }
    const double last = b.ratios.back();
    const bool ok = std::fabs(last - 1) <= 0.05 && std::fabs(b.intercept - 1) <= 0.02 &&
                    gauss_err <= 1e-12;
    return Outcome{ok, fmt("ratios %.6f %.6f %.6f, |last-1| = %.4f (tol 0.05), intercept %.6f "
                           "(tol 0.02), gaussian identity error %.2g (tol 1e-12)",
                           b.ratios[0], b.ratios[1], b.ratios[2], std::fabs(last - 1), b.intercept,
                           gauss_err)};
  });

  criterion(6, "DMS moderate-deviation trend", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const auto eps = make_epsilon(1.0, 1.0 / 3.0, Regime::Dms);
    const std::vector<std::int64_t> ns{1250, 5000};
    const auto c = md_curve_dms(Pmf::bernoulli(0.11), ham2, 0.05, eps, ns);
    const double secs = elapsed_since(t0);
    const double target = -1.0 / (2 * binary_dispersion(0.11));
    const double gap1250 = std::fabs(c.rows[0].z - target);
    const double gap5000 = std::fabs(c.rows[1].z - target);
    const double rel = gap5000 / std::fabs(target);
    const bool ok = rel <= 0.15 && gap5000 < gap1250 && secs < 60.0;
    return Outcome{ok, fmt("z_1250 = %.4f, z_5000 = %.4f, target %.4f, relative gap at 5000 = %.1f%% "
                           "(tol 15%%), gap shrinks: %s, %.2f s single-threaded (limit 60 s)",
                           c.rows[0].z, c.rows[1].z, target, 100 * rel,
                           gap5000 < gap1250 ? "yes" : "no", secs)};
  });

  criterion(7, "gaussian moderate-deviation trend", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const auto eps = make_epsilon(1.0, 1.0 / 3.0, Regime::Gaussian);
    const std::vector<std::int64_t> ns{1000, 10'000, 100'000, 1'000'000};
    const auto c = gaussian_tail_curve(GaussianProblem(1.0, 0.25), eps, ns);
    const double secs = elapsed_since(t0);
    bool shrinking = true;
    for (std::size_t i = 1; i < c.rows.size(); ++i) {
      shrinking = shrinking && std::fabs(c.rows[i].z + 1) < std::fabs(c.rows[i - 1].z + 1);
    }
    const double rel = std::fabs(c.rows.back().z + 1);
    return Outcome{rel <= 0.1 && shrinking && secs < 5.0,
                   fmt("z = %.4f %.4f %.4f %.4f, gap at 1e6 = %.1f%% (tol 10%%), monotone: %s, "
                       "%.3f s (limit 5 s)",
                       c.rows[0].z, c.rows[1].z, c.rows[2].z, c.rows[3].z, 100 * rel,
                       shrinking ? "yes" : "no", secs)};
  });

  criterion(8, "large-deviation consistency", [&] {
    const GaussianProblem g(1.0, 0.25);
    const std::int64_t n = 100'000;
    const double f = gaussian_excess_exponent(g, rate_distortion_gaussian(g) + 0.1);
    const double upper = gaussian_tail_logprob(n, 0.1, CurveSide::ExcessUpper).value() / n;
    const double both = gaussian_tail_logprob(n, 0.1, CurveSide::Excess).value() / n;
    const double rel = std::fabs(upper / -f - 1);
    return Outcome{rel <= 0.02,
                   fmt("upper-tail (1/n)logp = %.6f vs -F = %.6f, off by %.2f%% (tol 2%%); "
                       "two-sided event for reference: %.6f",
                       upper, -f, 100 * rel, both)};
  });

  criterion(9, "achievability bound validity", [&] {
    const auto p = Pmf::bernoulli(0.11);
    const double r0 = h2(0.11) - h2(0.05);
    int checked = 0, violations = 0, vacuous = 0;
    for (double c : {2.0, 3.0}) {
      for (double J : {0.0, 1.0, default_covering_constant(ham2)}) {
        const auto eps = make_epsilon(c, 1.0 / 3.0, Regime::Dms);
        for (std::int64_t n : {100, 200, 500, 1000, 2000, 5000}) {
          LogProb b;
          try {
            b = achievability_bound_dms(p, ham2, 0.05, n, eps(n), J);
          } catch (const BoundVacuous&) {
            ++vacuous;
            continue;
          }
          ++checked;
          if (b < exact_excess_prob_dms(p, ham2, 0.05, n, r0 + eps(n))) ++violations;
        }
      }
    }
    // Gaussian: against the two-sided tail at eps_n. The upper tail at eps'_n
    // (the event the exponent in the bound comes from) is tallied alongside.
    int gchecked = 0, gviolations = 0, upper_violations = 0;
    std::string failing;
    for (double c : {0.5, 1.0, 2.0}) {
      for (double t : {0.25, 1.0 / 3.0, 0.4}) {
        const auto eps = make_epsilon(c, t, Regime::Gaussian);
        int here = 0;
        for (std::int64_t n = 100; n <= 100'000'000; n *= 10) {
          GaussianBound b;
          try {
            b = gaussian_achievability_bound(GaussianProblem(1.0, 0.25), n, eps(n));
          } catch (const BoundVacuous&) {
            continue;
          }
          ++gchecked;
          if (b.bound < gaussian_tail_logprob(n, eps(n), CurveSide::Excess)) ++here;
          if (b.bound < gaussian_tail_logprob(n, b.eps_prime, CurveSide::ExcessUpper)) {
            ++upper_violations;
          }
        }
        gviolations += here;
        if (here > 0) failing += fmt(" c=%g,t=%.3g:%d", c, t, here);
      }
    }
    const bool ok = violations == 0 && gviolations == 0 && checked > 0 && gchecked > 0;
    return Outcome{ok, fmt("DMS: %d violations in %d informative points (%d vacuous skipped); "
                           "gaussian vs two-sided tail: %d violations in %d points%s%s; "
                           "gaussian vs upper tail at eps': %d violations",
                           violations, checked, vacuous, gviolations, gchecked,
                           failing.empty() ? "" : " on grids", failing.c_str(),
                           upper_violations)};
  });

  criterion(10, "greedy covering", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const auto c = greedy_type_cover(NType({2, 2}), ham2, 0.25);
    const int opt = test::minimum_binary_cover(4, 2, 0.25);
    int cases = 0, bad = 0;
    for (int n = 1; n <= 6; ++n) {
      for (int k = 0; k <= n; ++k) {
        for (double D : {0.25, 0.5}) {
          const auto g = greedy_type_cover(NType({n - k, k}), ham2, D);
          const int o = test::minimum_binary_cover(n, k, D);
          ++cases;
          const double cap = o * (1 + std::log(static_cast<double>(g.class_size)));
          if (!g.covered || static_cast<double>(g.codebook.size()) > cap + 1e-12) ++bad;
        }
      }
    }
    const double secs = elapsed_since(t0);
    const bool ok = c.covered && c.codebook.size() == 2 && opt == 2 && bad == 0 && secs < 10.0;
    return Outcome{ok, fmt("(2,2) at D=0.25: size %zu, verified %s, exhaustive optimum %d; "
                           "%d/%d classes within opt(1+ln|T|); %.2f s (limit 10 s)",
                           c.codebook.size(), c.covered ? "yes" : "no", opt, cases - bad, cases,
                           secs)};
  });

  criterion(11, "type-restricted projection ratio", [&] {
    const std::vector<std::int64_t> ns{250, 500, 1000, 2000, 4000, 8000, 16000};
    const auto curve = type_ratio_curve(Pmf::bernoulli(0.11), ham2, 0.05, 0.05, ns);
    double at2000 = NAN;
    bool monotone = curve.infeasible.empty();
    std::string seq;
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
      const auto& pt = curve.points[i];
      if (pt.n == 2000) at2000 = pt.ratio;
      if (i > 0 && pt.ratio > curve.points[i - 1].ratio) monotone = false;
      seq += fmt("%s%.5f", i ? " " : "", pt.ratio);
    }
    const bool ok = at2000 >= 1.0 && at2000 <= 1.05 && monotone;
    return Outcome{ok, fmt("ratio at n=2000 = %.6f (want [1, 1.05]); doubling grid 250..16000: %s; "
                           "non-increasing: %s",
                           at2000, seq.c_str(), monotone ? "yes" : "no")};
  });

  criterion(12, "partition sanity", [&] {
    double worst_mass = 0.0, worst_pair = 0.0;
    const std::vector<std::pair<Pmf, std::vector<std::int64_t>>> cases{
        {Pmf::bernoulli(0.11), {1, 2, 10, 100, 1000, 5000}},
        {Pmf::bernoulli(0.5), {7, 333, 5000}},
        {Pmf::from_weights({0.5, 0.3, 0.2}), {1, 10, 100, 300}},
        {Pmf::from_weights({0.4, 0.3, 0.2, 0.1}), {5, 40, 80}},
    };
    for (const auto& [p, ns] : cases) {
      for (auto n : ns) worst_mass = std::max(worst_mass, std::fabs(total_type_mass(p, n).prob() - 1));
    }
    const auto d3 = DistortionSpec::hamming(3);
    const auto p3 = Pmf::from_weights({0.5, 0.3, 0.2});
    for (std::int64_t n : {10, 100, 300}) {
      const double t = 0.2 + 1e-7 * std::sqrt(2.0);
      const double s = exact_excess_prob_dms(p3, d3, 0.1, n, t).prob() +
                       exact_correct_prob_dms(p3, d3, 0.1, n, t).prob();
      worst_pair = std::max(worst_pair, std::fabs(s - 1));
    }
    for (std::int64_t n : {10, 1000, 5000}) {
      const double t = 0.15 + 1e-7 * std::sqrt(3.0);
      const double s = exact_excess_prob_dms(Pmf::bernoulli(0.11), ham2, 0.05, n, t).prob() +
                       exact_correct_prob_dms(Pmf::bernoulli(0.11), ham2, 0.05, n, t).prob();
      worst_pair = std::max(worst_pair, std::fabs(s - 1));
    }
    return Outcome{worst_mass <= 1e-9 && worst_pair <= 1e-9,
                   fmt("max |total mass - 1| = %.3g, max |excess + correct - 1| = %.3g (tol 1e-9)",
                       worst_mass, worst_pair)};
  });

  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
