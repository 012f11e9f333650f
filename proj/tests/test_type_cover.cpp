#include <cmath>
#include <cstdint>
#include <sstream>

#include <doctest.h>

#include "mdsc/error.hpp"
#include "oracles.hpp"
#include "mdsc/md_empirics.hpp"

using namespace mdsc;
using doctest::Approx;

namespace {

double word_distortion(const DistortionSpec& d, const std::vector<std::uint32_t>& x,
                       const std::vector<std::uint32_t>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += d(x[i], y[i]);
  return s;
}

}  // namespace

TEST_CASE("type class words") {
  const auto w = type_class_words(NType({2, 2}));
  REQUIRE(w.size() == 6);
  CHECK(w.front() == std::vector<std::uint32_t>{0, 0, 1, 1});
  CHECK(w.back() == std::vector<std::uint32_t>{1, 1, 0, 0});
  CHECK(type_class_words(NType({0, 3})).size() == 1);
  CHECK(type_class_words(NType({1, 1, 1})).size() == 6);
}

TEST_CASE("cover of the balanced length-4 class") {
  const auto d = DistortionSpec::hamming(2);
  const NType q({2, 2});
  const auto c = greedy_type_cover(q, d, 0.25);
  CHECK(c.covered);
  CHECK(c.codebook.size() == 2);
  CHECK(test::minimum_binary_cover(4, 2, 0.25) == 2);
  CHECK(c.class_size == 6);
  CHECK(c.rate == Approx(0.25 * std::log(2.0)).epsilon(1e-14));
  const double h25 = -(0.25 * std::log(0.25) + 0.75 * std::log(0.75));
  CHECK(c.rd_rate == Approx(std::log(2.0) - h25).epsilon(1e-8));
  CHECK(c.rd_rate == Approx(0.1308).epsilon(1e-3));
  CHECK(c.excess_over_rd == Approx(c.rate - c.rd_rate).epsilon(1e-14));
  for (const auto& x : type_class_words(q)) {
    bool hit = false;
    for (const auto& y : c.codebook) hit = hit || word_distortion(d, x, y) <= 1.0;
    CHECK(hit);
  }
}

TEST_CASE("greedy cover is within the harmonic factor of the optimum") {
  const auto d = DistortionSpec::hamming(2);
  for (std::int64_t n = 1; n <= 6; ++n) {
    for (std::int64_t k = 0; k <= n; ++k) {
      for (double D : {0.25, 0.5}) {
        const NType q({n - k, k});
        const auto c = greedy_type_cover(q, d, D);
        const int opt = test::minimum_binary_cover(static_cast<int>(n), static_cast<int>(k), D);
        CAPTURE(n);
        CAPTURE(k);
        CAPTURE(D);
        CHECK(c.covered);
        CHECK(static_cast<double>(c.codebook.size()) <=
              opt * (1.0 + std::log(static_cast<double>(c.class_size))) + 1e-12);
        CHECK(static_cast<int>(c.codebook.size()) >= opt);
      }
    }
  }
}

TEST_CASE("cover extremes") {
  const auto d = DistortionSpec::hamming(2);
  const NType q({3, 2});
  const auto exact = greedy_type_cover(q, d, 0.0);
  CHECK(exact.covered);
  CHECK(static_cast<std::int64_t>(exact.codebook.size()) == exact.class_size);
  CHECK(exact.rate == Approx(std::log(10.0) / 5.0).epsilon(1e-14));
  const auto one = greedy_type_cover(q, d, 1.0);
  CHECK(one.codebook.size() == 1);
  CHECK(one.rate == 0.0);
  const auto t = greedy_type_cover(NType({2, 1, 1}), DistortionSpec::hamming(3), 0.5);
  CHECK(t.covered);
}

TEST_CASE("cover budgets and validation") {
  const auto d = DistortionSpec::hamming(2);
  CoverOptions o;
  o.candidate_cap = 100;
  CHECK_THROWS_AS(greedy_type_cover(NType({4, 4}), d, 0.25, o), BudgetExceeded);
  o = {};
  o.class_cap = 10;
  CHECK_THROWS_AS(greedy_type_cover(NType({3, 3}), d, 0.25, o), BudgetExceeded);
  o = {};
  o.work_cap = 100;
  CHECK_THROWS_AS(greedy_type_cover(NType({3, 3}), d, 0.25, o), BudgetExceeded);
  CHECK_THROWS_AS(greedy_type_cover(NType({3, 3}), d, -0.1), DomainError);
  CHECK_THROWS_AS(greedy_type_cover(NType({1, 1, 1}), d, 0.1), DimensionMismatch);
}

TEST_CASE("cover listing") {
  const auto c = greedy_type_cover(NType({2, 2}), DistortionSpec::hamming(2), 0.25);
  std::ostringstream out;
  write_cover_listing(out, c);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("# rate=", 0) == 0);
  CHECK(line.find(" excess=") != std::string::npos);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::istringstream fields(line);
    int v = 0, count = 0;
    while (fields >> v) {
      CHECK((v == 0 || v == 1));
      ++count;
    }
    CHECK(count == 4);
  }
  CHECK(rows == 2);
}
