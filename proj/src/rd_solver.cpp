#include "mdsc/rd_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mdsc/error.hpp"

namespace mdsc {

DistortionSpec::DistortionSpec(std::size_t source_size, std::size_t reproduction_size,
                               std::vector<double> table)
    : rows_(source_size), cols_(reproduction_size), table_(std::move(table)) {
  if (rows_ == 0 || cols_ == 0) throw DomainError("distortion table must be non-empty");
  if (table_.size() != rows_ * cols_) {
    throw DimensionMismatch("distortion table has " + std::to_string(table_.size()) +
                            " entries, expected " + std::to_string(rows_ * cols_));
  }
  for (std::size_t x = 0; x < rows_; ++x) {
    bool has_zero = false;
    for (std::size_t y = 0; y < cols_; ++y) {
      const double v = table_[x * cols_ + y];
      if (!std::isfinite(v) || v < 0.0) {
        throw DomainError("distortion entries must be finite and nonnegative");
      }
      has_zero = has_zero || v == 0.0;
      d_max_ = std::max(d_max_, v);
    }
    if (!has_zero) {
      throw DomainError("distortion row " + std::to_string(x) + " has no zero entry");
    }
  }
}

DistortionSpec DistortionSpec::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw DomainError("distortion table must be non-empty");
  const std::size_t cols = rows.front().size();
  std::vector<double> table;
  table.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols) throw DimensionMismatch("distortion rows have unequal lengths");
    table.insert(table.end(), r.begin(), r.end());
  }
  return {rows.size(), cols, std::move(table)};
}

DistortionSpec DistortionSpec::hamming(std::size_t size) {
  std::vector<double> table(size * size, 1.0);
  for (std::size_t i = 0; i < size; ++i) table[i * size + i] = 0.0;
  return {size, size, std::move(table)};
}

double zero_rate_distortion(const Pmf& p, const DistortionSpec& d) {
  if (p.size() != d.source_size()) {
    throw DimensionMismatch("source alphabet does not match distortion table");
  }
  double best = kInf;
  for (std::size_t y = 0; y < d.reproduction_size(); ++y) {
    double s = 0.0;
    for (std::size_t x = 0; x < p.size(); ++x) s += p[x] * d(x, y);
    best = std::min(best, s);
  }
  return best;
}

RdWarmStart warm_start_from(const RdSolution& s) {
  auto w = s.output_marginal.weights();
  return {std::vector<double>(w.begin(), w.end()), s.slope};
}

namespace {

// Blahut-Arimoto state restricted to the support of the source.
class SlopeSolver {
 public:
  SlopeSolver(const Pmf& p, const DistortionSpec& d, const RdOptions& options)
      : options_(options), cols_(d.reproduction_size()) {
    for (std::size_t x = 0; x < p.size(); ++x) {
      if (p[x] <= 0.0) continue;
      q_.push_back(p[x]);
      auto row = d.row(x);
      dist_.insert(dist_.end(), row.begin(), row.end());
    }
    kernel_.resize(dist_.size());
    z_.resize(q_.size());
    c_.resize(cols_);
  }

  struct Eval {
    double value = 0.0;  // -sum_x q(x) ln Z(x)
    double distortion = 0.0;
    double gap = 0.0;
    int iterations = 0;
    bool converged = false;
  };

  Eval solve(double slope, std::vector<double>& r, std::vector<std::size_t>& pruned) {
    for (std::size_t i = 0; i < dist_.size(); ++i) kernel_[i] = std::exp(-slope * dist_[i]);
    // A letter pruned at an earlier slope may belong to the support here.
    if (std::find(r.begin(), r.end(), 0.0) != r.end()) {
      constexpr double revive = 1e-9;
      const double share = revive / static_cast<double>(cols_);
      for (double& v : r) v = (1.0 - revive) * v + share;
    }
    Eval e;
    for (int it = 1; it <= options_.max_inner_iterations; ++it) {
      e.iterations = it;
      e.value = refresh(r);
      e.gap = std::log(*std::max_element(c_.begin(), c_.end()));
      if (e.gap <= options_.rate_tolerance) {
        e.converged = true;
        break;
      }
      double total = 0.0;
      for (std::size_t y = 0; y < cols_; ++y) {
        r[y] *= c_[y];
        if (r[y] != 0.0 && r[y] < options_.prune_threshold) {
          r[y] = 0.0;
          pruned.push_back(y);
        }
        total += r[y];
      }
      for (double& v : r) v /= total;
    }
    if (!e.converged) {
      e.value = refresh(r);
      e.gap = std::log(*std::max_element(c_.begin(), c_.end()));
    }
    e.distortion = distortion(r);
    return e;
  }

 private:
  // Recomputes Z and c for marginal r; returns -sum q ln Z.
  double refresh(const std::vector<double>& r) {
    double value = 0.0;
    std::fill(c_.begin(), c_.end(), 0.0);
    for (std::size_t i = 0; i < q_.size(); ++i) {
      const double* k = kernel_.data() + i * cols_;
      double z = 0.0;
      for (std::size_t y = 0; y < cols_; ++y) z += r[y] * k[y];
      z = std::max(z, 1e-300);
      z_[i] = z;
      value -= q_[i] * std::log(z);
      const double w = q_[i] / z;
      for (std::size_t y = 0; y < cols_; ++y) c_[y] += w * k[y];
    }
    return value;
  }

  double distortion(const std::vector<double>& r) const {
    double total = 0.0;
    for (std::size_t i = 0; i < q_.size(); ++i) {
      const double* k = kernel_.data() + i * cols_;
      const double* dd = dist_.data() + i * cols_;
      double s = 0.0;
      for (std::size_t y = 0; y < cols_; ++y) s += r[y] * k[y] * dd[y];
      total += q_[i] * s / z_[i];
    }
    return total;
  }

  const RdOptions& options_;
  std::size_t cols_;
  std::vector<double> q_;
  std::vector<double> dist_;
  std::vector<double> kernel_;
  std::vector<double> z_;
  std::vector<double> c_;
};

RdSolution zero_rate_solution(const Pmf& p, const DistortionSpec& d, double distortion) {
  std::size_t best = 0;
  double best_d = kInf;
  for (std::size_t y = 0; y < d.reproduction_size(); ++y) {
    double s = 0.0;
    for (std::size_t x = 0; x < p.size(); ++x) s += p[x] * d(x, y);
    if (s < best_d) {
      best_d = s;
      best = y;
    }
  }
  RdSolution sol;
  sol.rate = 0.0;
  sol.output_marginal = Pmf::point_mass(d.reproduction_size(), best);
  sol.slope = 0.0;
  sol.target_distortion = distortion;
  sol.achieved_distortion = best_d;
  sol.zero_rate = true;
  return sol;
}

}  // namespace

RdSolution rate_distortion_dms(const Pmf& p, const DistortionSpec& d, double distortion,
                               const RdOptions& options, const RdWarmStart* warm) {
  if (!(distortion > 0.0) || !std::isfinite(distortion)) {
    throw DomainError("distortion level must be positive and finite");
  }
  const double d_zero = zero_rate_distortion(p, d);
  if (distortion >= d_zero) {
    return zero_rate_solution(p, d, distortion);
  }

  const std::size_t cols = d.reproduction_size();
  std::vector<double> r(cols, 1.0 / static_cast<double>(cols));
  if (warm != nullptr && warm->marginal.size() == cols) {
    constexpr double revive = 1e-9;
    for (std::size_t y = 0; y < cols; ++y) {
      r[y] = (1.0 - revive) * warm->marginal[y] + revive / static_cast<double>(cols);
    }
  }

  SlopeSolver solver(p, d, options);
  ConvergenceRecord record;
  bool all_converged = true;
  double last_gap = 0.0;

  auto evaluate = [&](double slope) {
    auto e = solver.solve(slope, r, record.pruned_letters);
    record.inner_iterations += e.iterations;
    ++record.outer_iterations;
    last_gap = e.gap;
    all_converged = e.converged;
    return e;
  };

  // f(slope) = D(slope) - D is nonincreasing; at slope -> 0 it tends to
  // d_zero - D > 0.
  double lo = 0.0;
  double f_lo = d_zero - distortion;
  double hi = 50.0 / distortion;
  SlopeSolver::Eval best;
  double best_slope = 0.0;

  if (warm != nullptr && warm->slope > 0.0) {
    const double s0 = warm->slope;
    auto e = evaluate(s0);
    best = e;
    best_slope = s0;
    const double f0 = e.distortion - distortion;
    if (std::fabs(f0) <= options.distortion_tolerance) {
      hi = lo = s0;
    } else if (f0 > 0.0) {
      lo = s0;
      f_lo = f0;
      hi = s0 * 1.25;
    } else {
      hi = s0;
      lo = s0 / 1.25;
      f_lo = std::numeric_limits<double>::quiet_NaN();
    }
  }

  double f_hi = 0.0;
  bool done = (lo == hi);
  if (!done) {
    // Establish f(hi) < 0, expanding upward.
    for (;;) {
      auto e = evaluate(hi);
      f_hi = e.distortion - distortion;
      best = e;
      best_slope = hi;
      if (std::fabs(f_hi) <= options.distortion_tolerance) {
        done = true;
        break;
      }
      if (f_hi < 0.0) break;
      lo = hi;
      f_lo = f_hi;
      hi *= 2.0;
      if (hi > 1e15) {
        throw NonConvergence("slope bracket expansion failed", {{"slope", hi}, {"f", f_hi}});
      }
    }
  }
  if (!done && std::isnan(f_lo)) {
    // Warm start landed above the root: walk down until f(lo) > 0.
    for (;;) {
      auto e = evaluate(lo);
      const double f = e.distortion - distortion;
      if (std::fabs(f) <= options.distortion_tolerance) {
        best = e;
        best_slope = lo;
        done = true;
        break;
      }
      if (f > 0.0) {
        f_lo = f;
        break;
      }
      hi = lo;
      f_hi = f;
      lo /= 1.25;
      if (lo < 1e-12) {
        lo = 0.0;
        f_lo = d_zero - distortion;
        break;
      }
    }
  }

  // Illinois-modified regula falsi on the slope.
  int retained = 0;
  for (int it = 0; !done && it < options.max_outer_iterations; ++it) {
    double s = hi - f_hi * (hi - lo) / (f_hi - f_lo);
    if (!(s > lo && s < hi)) s = 0.5 * (lo + hi);
    auto e = evaluate(s);
    const double f = e.distortion - distortion;
    best = e;
    best_slope = s;
    if (std::fabs(f) <= options.distortion_tolerance || (hi - lo) <= 1e-14 * hi) {
      done = true;
      break;
    }
    if (f > 0.0) {
      lo = s;
      f_lo = f;
      if (retained == +1) f_hi *= 0.5;
      retained = +1;
    } else {
      hi = s;
      f_hi = f;
      if (retained == -1) f_lo *= 0.5;
      retained = -1;
    }
  }
  if (!done && options.strict) {
    throw NonConvergence("slope search did not reach the target distortion",
                         {{"distortion_residual", best.distortion - distortion},
                          {"slope", best_slope},
                          {"gap", last_gap}});
  }

  RdSolution sol;
  sol.slope = best_slope;
  sol.rate = std::max(0.0, best.value - best_slope * distortion);
  sol.output_marginal = Pmf::from_weights(r);
  sol.target_distortion = distortion;
  sol.achieved_distortion = best.distortion;
  sol.iterations = record.inner_iterations;
  sol.zero_rate = false;
  sol.converged = all_converged && done;
  record.gap = last_gap;
  record.distortion_residual = best.distortion - distortion;
  std::sort(record.pruned_letters.begin(), record.pruned_letters.end());
  record.pruned_letters.erase(std::unique(record.pruned_letters.begin(), record.pruned_letters.end()),
                              record.pruned_letters.end());
  record.support_boundary =
      !record.pruned_letters.empty() ||
      std::any_of(r.begin(), r.end(), [](double v) { return v > 0.0 && v < 1e-8; });
  sol.record = std::move(record);
  if (options.strict && !sol.converged && sol.record.gap > 1e-6) {
    throw NonConvergence("Blahut-Arimoto hit the iteration cap",
                         {{"gap", sol.record.gap},
                          {"iterations", static_cast<double>(sol.iterations)},
                          {"slope", sol.slope}});
  }
  return sol;
}

double rate_distortion_binary_hamming(double alpha, double distortion) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
  if (!(distortion >= 0.0)) throw DomainError("distortion must be nonnegative");
  const double m = std::min(alpha, 1.0 - alpha);
  if (distortion >= m) return 0.0;
  return binary_entropy(m) - binary_entropy(distortion);
}

GaussianProblem::GaussianProblem(double var, double dist) : variance(var), distortion(dist) {
  if (!(variance > 0.0) || !std::isfinite(variance) || !(distortion > 0.0) ||
      !std::isfinite(distortion)) {
    throw DomainError("Gaussian variance and distortion must be positive and finite");
  }
}

double rate_distortion_gaussian(const GaussianProblem& g) {
  return 0.5 * std::log(std::max(1.0, g.variance / g.distortion));
}

TiltedInformation tilted_information(const Pmf& p, const DistortionSpec& d, double distortion,
                                     const RdOptions& options, const RdWarmStart* warm) {
  if (distortion >= zero_rate_distortion(p, d)) {
    throw DomainError("tilted information needs D below the zero-rate distortion");
  }
  TiltedInformation out;
  out.solution = rate_distortion_dms(p, d, distortion, options, warm);
  out.slope = out.solution.slope;
  const auto r = out.solution.output_marginal.weights();
  out.values.resize(p.size());
  for (std::size_t x = 0; x < p.size(); ++x) {
    double z = 0.0;
    for (std::size_t y = 0; y < r.size(); ++y) {
      z += r[y] * std::exp(-out.slope * d(x, y));
    }
    out.values[x] = -out.slope * distortion - std::log(z);
  }
  return out;
}

std::vector<RecordField> to_record(const RdSolution& s) {
  return {
      {"rate", s.rate, "nats"},
      {"slope", s.slope, "nats_per_distortion"},
      {"distortion", s.achieved_distortion, "distortion"},
      {"iterations", s.iterations, "count"},
      {"converged", s.converged, ""},
      {"zero_rate", s.zero_rate, ""},
  };
}

}  // namespace mdsc
