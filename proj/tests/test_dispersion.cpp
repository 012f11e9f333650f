#include <cmath>

#include <doctest.h>

#include "generators.hpp"
#include "mdsc/dispersion.hpp"
#include "mdsc/error.hpp"
#include "mdsc/exponents.hpp"

using namespace mdsc;
using doctest::Approx;

TEST_CASE("bernoulli dispersion closed form") {
  CHECK(dispersion_binary_hamming(0.5) == 0.0);
  const double l = std::log(0.89 / 0.11);
  CHECK(dispersion_binary_hamming(0.11) == Approx(0.11 * 0.89 * l * l).epsilon(1e-15));
  CHECK(dispersion_binary_hamming(0.11) == Approx(0.427921).epsilon(1e-4));
  CHECK(dispersion_binary_hamming(0.89) == Approx(dispersion_binary_hamming(0.11)).epsilon(1e-14));
  CHECK_THROWS_AS(dispersion_binary_hamming(0.0), DomainError);
}

TEST_CASE("finite-difference dispersion matches the closed form") {
  const auto d = DistortionSpec::hamming(2);
  const auto r = dispersion_dms(Pmf::bernoulli(0.11), d, 0.05);
  CHECK(r.value == Approx(0.427921).epsilon(1e-4));
  CHECK(r.tilted_value == Approx(0.427921).epsilon(1e-4));
  CHECK(r.tilted_value == Approx(dispersion_binary_hamming(0.11)).epsilon(1e-6));
  CHECK_FALSE(r.degenerate);
  CHECK(r.derivative.centered);
  const double mean = 0.89 * r.derivative.values[0] + 0.11 * r.derivative.values[1];
  CHECK(std::fabs(mean) < 1e-8);
}

TEST_CASE("symmetric sources have zero dispersion") {
  const auto d = DistortionSpec::hamming(2);
  const auto g = rd_derivative(Pmf::uniform(2), d, 0.2);
  CHECK(std::fabs(g.values[0]) < 1e-8);
  CHECK(std::fabs(g.values[1]) < 1e-8);
  const auto r = dispersion_dms(Pmf::uniform(2), d, 0.2);
  CHECK(r.degenerate);
  CHECK(r.value < 1e-10);
}

TEST_CASE("derivative validation") {
  const auto d = DistortionSpec::hamming(2);
  DerivativeOptions o;
  o.step = 0.2;
  CHECK_THROWS_AS(rd_derivative(Pmf::bernoulli(0.11), d, 0.05, o), DomainError);
  o.step = 0.05;
  CHECK_THROWS_AS(rd_derivative(Pmf::bernoulli(0.01), d, 0.005, o), StepTooLarge);
  CHECK_THROWS_AS(rd_derivative(Pmf::from_weights({1.0, 0.0}), d, 0.05), DomainError);
  CHECK_THROWS_AS(rd_derivative(Pmf::bernoulli(0.11), d, 0.2), DomainError);
}

TEST_CASE("central differences converge at second order") {
  // Error of the plain central difference against the exact derivative:
  // halving the step divides it by about 4.
  const auto d = DistortionSpec::hamming(2);
  const auto p = Pmf::from_weights({0.6, 0.3, 0.1});
  const auto dd = DistortionSpec::hamming(3);
  (void)d;
  const auto exact = tilted_information(p, dd, 0.1);
  double mean = 0.0;
  for (std::size_t x = 0; x < 3; ++x) mean += p[x] * exact.values[x];
  auto error = [&](double step) {
    DerivativeOptions o;
    o.step = step;
    o.richardson = false;
    const auto g = rd_derivative(p, dd, 0.1, o);
    return std::fabs(g.values[2] - (exact.values[2] - mean));
  };
  const double e1 = error(0.04);
  const double e2 = error(0.02);
  CHECK(e1 / e2 == Approx(4.0).epsilon(0.1));
}

TEST_CASE("dispersion over a bernoulli grid") {
  const auto d = DistortionSpec::hamming(2);
  for (double a : {0.05, 0.15, 0.25, 0.35, 0.45}) {
    for (double D : {0.01, 0.03}) {
      CAPTURE(a);
      CAPTURE(D);
      const auto r = dispersion_dms(Pmf::bernoulli(a), d, D);
      const double want = dispersion_binary_hamming(a);
      CHECK(r.value == Approx(want).epsilon(0.01));
      CHECK(r.tilted_value == Approx(want).epsilon(0.01));
    }
  }
}

TEST_CASE("dispersion is permutation invariant") {
  test::Gen gen(31);
  for (int i = 0; i < 5; ++i) {
    const auto p = gen.pmf(3, 0.2);
    const auto d = DistortionSpec::hamming(3);
    const double D = 0.5 * zero_rate_distortion(p, d);
    const auto q = Pmf::from_weights({p[2], p[0], p[1]});
    CHECK(dispersion_dms(p, d, D).value == Approx(dispersion_dms(q, d, D).value).epsilon(1e-6));
  }
}

TEST_CASE("bernoulli dispersion maximizer") {
  const auto peak = max_dispersion_bernoulli();
  CHECK(peak.alpha == Approx(0.0832).epsilon(1e-3 / 0.0832));
  CHECK(peak.dispersion > dispersion_binary_hamming(peak.alpha + 0.01));
  CHECK(peak.dispersion > dispersion_binary_hamming(peak.alpha - 0.01));
  const double h = 1e-6;
  const double slope = (dispersion_binary_hamming(peak.alpha + h) -
                        dispersion_binary_hamming(peak.alpha - h)) / (2 * h);
  CHECK(std::fabs(slope) < 1e-6);
  // the numerical dispersion is largest at alpha* over a grid
  const auto d = DistortionSpec::hamming(2);
  const double at_peak = dispersion_dms(Pmf::bernoulli(0.0832), d, 0.03).value;
  for (double a : {0.05, 0.07, 0.1, 0.15, 0.2}) {
    CHECK(dispersion_dms(Pmf::bernoulli(a), d, 0.03).value < at_peak);
  }
}

TEST_CASE("gaussian dispersion") {
  CHECK(dispersion_gaussian() == 0.5);
  // 1/V from the curvature of the excess exponent at R(var, D)
  for (double var : {0.5, 1.0, 4.0}) {
    const GaussianProblem g(var, 0.25 * var);
    const double r0 = rate_distortion_gaussian(g);
    const double hh = 1e-4;
    const double second = (gaussian_excess_exponent(g, r0 + 2 * hh) -
                           2 * gaussian_excess_exponent(g, r0 + hh) +
                           gaussian_excess_exponent(g, r0)) / (hh * hh);
    CHECK(second == Approx(2.0).epsilon(1e-3));
  }
  CHECK(dispersion_of(GaussianProblem(2.0, 0.1)) == 0.5);
}
