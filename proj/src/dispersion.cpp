#include "mdsc/dispersion.hpp"

#include <cmath>
#include <string>

#include "mdsc/error.hpp"

namespace mdsc {

namespace {

Pmf along_direction(const Pmf& p, std::size_t x, double t) {
  // P + t (e_x - P)
  std::vector<double> w(p.size());
  for (std::size_t y = 0; y < p.size(); ++y) w[y] = (1.0 - t) * p[y];
  w[x] += t;
  for (double v : w) {
    if (v < 0.0) {
      throw StepTooLarge("perturbed point leaves the simplex (symbol " + std::to_string(x) +
                         ", step " + std::to_string(t) + ")");
    }
  }
  return Pmf::from_weights(std::move(w));
}

double central_difference(const Pmf& p, const DistortionSpec& d, double distortion,
                          std::size_t x, double h, const RdOptions& rd, const RdWarmStart& warm) {
  const auto plus = rate_distortion_dms(along_direction(p, x, h), d, distortion, rd, &warm);
  const auto minus = rate_distortion_dms(along_direction(p, x, -h), d, distortion, rd, &warm);
  return (plus.rate - minus.rate) / (2.0 * h);
}

}  // namespace

DerivativeVector rd_derivative(const Pmf& p, const DistortionSpec& d, double distortion,
                               const DerivativeOptions& options, const Parallelism& par) {
  if (!(options.step > 0.0 && options.step < 0.1)) {
    throw DomainError("finite-difference step must lie in (0, 0.1)");
  }
  if (!p.strictly_positive()) {
    throw DomainError("rd_derivative needs a strictly positive source");
  }
  if (!(distortion > 0.0 && distortion < zero_rate_distortion(p, d))) {
    throw DomainError("rd_derivative needs 0 < D < zero-rate distortion");
  }
  for (std::size_t x = 0; x < p.size(); ++x) {
    (void)along_direction(p, x, -options.step);
  }

  const auto base = rate_distortion_dms(p, d, distortion, options.rd);
  const auto warm = warm_start_from(base);

  DerivativeVector out;
  out.values.resize(p.size());
  out.method = DerivativeMethod::FiniteDifference;
  out.step = options.step;
  out.centered = true;
  par.for_each(p.size(), [&](std::size_t x) {
    const double coarse = central_difference(p, d, distortion, x, options.step, options.rd, warm);
    if (!options.richardson) {
      out.values[x] = coarse;
      return;
    }
    const double fine =
        central_difference(p, d, distortion, x, 0.5 * options.step, options.rd, warm);
    out.values[x] = (4.0 * fine - coarse) / 3.0;
  });
  return out;
}

double weighted_variance(const Pmf& p, std::span<const double> values) {
  if (values.size() != p.size()) throw DimensionMismatch("variance: size mismatch");
  double mean = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) mean += p[x] * values[x];
  double var = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) {
    const double c = values[x] - mean;
    var += p[x] * c * c;
  }
  return var;
}

DispersionResult dispersion_dms(const Pmf& p, const DistortionSpec& d, double distortion,
                                const DerivativeOptions& options, const Parallelism& par) {
  DispersionResult out;
  out.derivative = rd_derivative(p, d, distortion, options, par);
  out.value = weighted_variance(p, out.derivative.values);
  auto tilted = tilted_information(p, d, distortion, options.rd);
  out.tilted = std::move(tilted.values);
  out.tilted_value = weighted_variance(p, out.tilted);
  out.degenerate = out.value < kDegenerateDispersion;

  const double tolerance = std::max(1e-4, 0.01 * std::fabs(out.tilted_value));
  if (std::fabs(out.value - out.tilted_value) > tolerance) {
    throw CrossCheckMismatch("finite-difference and tilted-information dispersions disagree",
                             {{"finite_difference", out.value},
                              {"tilted", out.tilted_value},
                              {"tolerance", tolerance}});
  }
  return out;
}

double dispersion_binary_hamming(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
  const double l = std::log((1.0 - alpha) / alpha);
  return alpha * (1.0 - alpha) * l * l;
}

BernoulliDispersionPeak max_dispersion_bernoulli() {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 1e-9;
  double b = 0.5;
  double c = b - inv_phi * (b - a);
  double e = a + inv_phi * (b - a);
  double fc = dispersion_binary_hamming(c);
  double fe = dispersion_binary_hamming(e);
  while (b - a > 1e-12) {
    if (fc > fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - inv_phi * (b - a);
      fc = dispersion_binary_hamming(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + inv_phi * (b - a);
      fe = dispersion_binary_hamming(e);
    }
  }
  const double alpha = 0.5 * (a + b);
  return {alpha, dispersion_binary_hamming(alpha)};
}

double dispersion_gaussian() { return 0.5; }

double dispersion_of(const Problem& problem, const Parallelism& par) {
  if (const auto* dms = std::get_if<DmsProblem>(&problem)) {
    return dispersion_dms(dms->source, dms->distortion, dms->level, {}, par).value;
  }
  return dispersion_gaussian();
}

}  // namespace mdsc
