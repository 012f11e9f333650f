#include <cmath>

#include <doctest.h>

#include "generators.hpp"
#include "mdsc/error.hpp"
#include "mdsc/rd_solver.hpp"

using namespace mdsc;
using doctest::Approx;

namespace {

double h(double a) { return a <= 0.0 || a >= 1.0 ? 0.0 : -a * std::log(a) - (1 - a) * std::log(1 - a); }

}  // namespace

TEST_CASE("distortion spec validation") {
  CHECK_NOTHROW(DistortionSpec::from_rows({{0, 1}, {1, 0}}));
  CHECK_THROWS_AS(DistortionSpec::from_rows({{1, 1}, {1, 0}}), DomainError);
  CHECK_THROWS_AS(DistortionSpec::from_rows({{0, -1}, {1, 0}}), DomainError);
  CHECK_THROWS_AS(DistortionSpec::from_rows({{0, INFINITY}, {1, 0}}), DomainError);
  CHECK_THROWS_AS(DistortionSpec::from_rows({{0, 1}, {0}}), DimensionMismatch);
  const auto d = DistortionSpec::hamming(3);
  CHECK(d(0, 0) == 0.0);
  CHECK(d(2, 1) == 1.0);
  CHECK(d.d_max() == 1.0);
}

TEST_CASE("rate-distortion examples") {
  const auto d = DistortionSpec::hamming(2);
  const auto s = rate_distortion_dms(Pmf::bernoulli(0.11), d, 0.05);
  CHECK(s.rate == Approx(h(0.11) - h(0.05)).epsilon(1e-9));
  CHECK(s.rate == Approx(0.148000).epsilon(1e-6));
  CHECK_FALSE(s.zero_rate);
  CHECK(s.converged);
  CHECK(s.slope == Approx(std::log(0.95 / 0.05)).epsilon(1e-6));
  CHECK(std::fabs(s.achieved_distortion - 0.05) <= 1e-9);

  const auto z = rate_distortion_dms(Pmf::bernoulli(0.11), d, 0.11);
  CHECK(z.zero_rate);
  CHECK(z.rate == 0.0);
  CHECK(z.slope == 0.0);

  CHECK(rate_distortion_dms(Pmf::uniform(2), d, 0.1).rate ==
        Approx(std::log(2.0) - h(0.1)).epsilon(1e-9));
  CHECK(rate_distortion_dms(Pmf::uniform(2), d, 0.1).rate == Approx(0.368064).epsilon(1e-6));
  CHECK_THROWS_AS(rate_distortion_dms(Pmf::uniform(2), d, 0.0), DomainError);
}

TEST_CASE("binary-hamming closed form") {
  CHECK(rate_distortion_binary_hamming(0.11, 0.05) == Approx(0.148000).epsilon(1e-6));
  CHECK(rate_distortion_binary_hamming(0.5, 0.0) == Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(rate_distortion_binary_hamming(0.11, 0.25) == 0.0);
  CHECK(rate_distortion_binary_hamming(0.89, 0.05) == Approx(0.148000).epsilon(1e-6));
  CHECK_THROWS_AS(rate_distortion_binary_hamming(0.0, 0.1), DomainError);
  CHECK_THROWS_AS(rate_distortion_binary_hamming(0.3, -0.1), DomainError);
}

TEST_CASE("gaussian rate-distortion") {
  CHECK(rate_distortion_gaussian({1.0, 1.0}) == 0.0);
  CHECK(rate_distortion_gaussian({1.0, 0.25}) == Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(rate_distortion_gaussian({1.0, 4.0}) == 0.0);
  CHECK_THROWS_AS(GaussianProblem(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(GaussianProblem(1.0, -1.0), DomainError);
}

TEST_CASE("blahut-arimoto matches the binary closed form on random instances") {
  test::Gen gen(21);
  const auto d = DistortionSpec::hamming(2);
  for (int i = 0; i < 50; ++i) {
    const double a = gen.uniform(0.01, 0.99);
    const double dm = std::min(a, 1 - a);
    const double D = gen.uniform(0.001, 0.999) * dm;
    CAPTURE(a);
    CAPTURE(D);
    CHECK(std::fabs(rate_distortion_dms(Pmf::bernoulli(a), d, D).rate -
                    rate_distortion_binary_hamming(a, D)) <= 1e-6);
  }
}

TEST_CASE("k-ary hamming closed form") {
  // R = ln k - h(D) - D ln(k-1) for the uniform source, D <= (k-1)/k
  const std::size_t k = 4;
  const auto d = DistortionSpec::hamming(k);
  for (double D : {0.05, 0.2, 0.5, 0.7}) {
    const double want = std::log(4.0) - h(D) - D * std::log(3.0);
    CHECK(rate_distortion_dms(Pmf::uniform(k), d, D).rate == Approx(want).epsilon(1e-8));
  }
}

TEST_CASE("rate is nonincreasing and convex in D") {
  test::Gen gen(22);
  for (int i = 0; i < 20; ++i) {
    const auto k = static_cast<std::size_t>(gen.integer(2, 5));
    const auto p = gen.pmf(k, 0.05);
    std::vector<std::vector<double>> rows(k, std::vector<double>(k));
    for (std::size_t x = 0; x < k; ++x) {
      for (std::size_t y = 0; y < k; ++y) rows[x][y] = x == y ? 0.0 : gen.uniform(0.2, 2.0);
    }
    const auto d = DistortionSpec::from_rows(rows);
    const double dz = zero_rate_distortion(p, d);
    double prev = kInf;
    for (int j = 1; j <= 12; ++j) {
      const double D = dz * j / 12.0;
      const double r = rate_distortion_dms(p, d, D).rate;
      CHECK(r <= prev + 1e-9);
      prev = r;
    }
    const double a = gen.uniform(0.01, 0.9) * dz;
    const double b = gen.uniform(0.01, 0.9) * dz;
    const double mid = rate_distortion_dms(p, d, 0.5 * (a + b)).rate;
    const double avg =
        0.5 * (rate_distortion_dms(p, d, a).rate + rate_distortion_dms(p, d, b).rate);
    CHECK(mid <= avg + 1e-8);
  }
}

TEST_CASE("tilted information mean equals the rate") {
  test::Gen gen(23);
  for (int i = 0; i < 30; ++i) {
    const auto k = static_cast<std::size_t>(gen.integer(2, 5));
    const auto p = gen.pmf(k, 0.05);
    const auto d = DistortionSpec::hamming(k);
    const double D = gen.uniform(0.05, 0.95) * zero_rate_distortion(p, d);
    const auto t = tilted_information(p, d, D);
    double mean = 0.0;
    for (std::size_t x = 0; x < k; ++x) mean += p[x] * t.values[x];
    CHECK(mean == Approx(t.solution.rate).epsilon(1e-6));
  }
}

TEST_CASE("tilted information examples") {
  const auto d = DistortionSpec::hamming(2);
  const auto t = tilted_information(Pmf::bernoulli(0.11), d, 0.05);
  CHECK(0.89 * t.values[0] + 0.11 * t.values[1] == Approx(0.148000).epsilon(1e-6));
  // closed form: j(x) = -ln P(x) - h(D) up to the rate-matching constant
  CHECK(t.values[1] - t.values[0] == Approx(std::log(0.89 / 0.11)).epsilon(1e-7));
  const auto u = tilted_information(Pmf::uniform(3), DistortionSpec::hamming(3), 0.2);
  CHECK(u.values[0] == Approx(u.values[1]).epsilon(1e-10));
  CHECK(u.values[1] == Approx(u.values[2]).epsilon(1e-10));
  CHECK_THROWS_AS(tilted_information(Pmf::bernoulli(0.11), d, 0.2), DomainError);
}

TEST_CASE("warm start gives the same answer") {
  const auto d = DistortionSpec::hamming(3);
  const auto p = Pmf::from_weights({0.5, 0.3, 0.2});
  const auto cold = rate_distortion_dms(p, d, 0.1);
  const auto q = Pmf::from_weights({0.48, 0.31, 0.21});
  const auto warm_start = warm_start_from(cold);
  const auto a = rate_distortion_dms(q, d, 0.1);
  const auto b = rate_distortion_dms(q, d, 0.1, {}, &warm_start);
  CHECK(a.rate == Approx(b.rate).epsilon(1e-9));
}

TEST_CASE("flat record") {
  const auto s = rate_distortion_dms(Pmf::bernoulli(0.11), DistortionSpec::hamming(2), 0.05);
  const auto rec = to_record(s);
  REQUIRE(rec.size() == 6);
  CHECK(rec[0].key == "rate");
  CHECK(rec[0].unit == "nats");
  CHECK(std::get<double>(rec[0].value) == s.rate);
  CHECK(rec[5].key == "zero_rate");
  CHECK(std::get<bool>(rec[5].value) == false);
}

TEST_CASE("nonconvergence is reported, not silent") {
  RdOptions o;
  o.max_inner_iterations = 2;
  o.max_outer_iterations = 3;
  CHECK_THROWS_AS(
      rate_distortion_dms(Pmf::from_weights({0.5, 0.3, 0.2}), DistortionSpec::hamming(3), 0.1, o),
      NonConvergence);
  o.strict = false;
  const auto s =
      rate_distortion_dms(Pmf::from_weights({0.5, 0.3, 0.2}), DistortionSpec::hamming(3), 0.1, o);
  CHECK_FALSE(s.converged);
  CHECK(s.record.distortion_residual != 0.0);
}
