#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>

#include "mdsc/dispersion.hpp"
#include "mdsc/error.hpp"
#include "mdsc/exponents.hpp"
#include "mdsc/md_empirics.hpp"
#include "mdsc/rd_solver.hpp"

namespace mdsc::cli {

using ojson = nlohmann::ordered_json;

namespace {

// Bad flags or flag combinations found before any computation.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HelpRequested {
  std::string text;
};

template <class T>
void put(nlohmann::json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <class T>
void get(const nlohmann::json& j, const char* key, std::optional<T>& v) {
  if (j.contains(key) && !j.at(key).is_null()) {
    v = j.at(key).get<T>();
  } else {
    v.reset();
  }
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(trim(cur));
  return parts;
}

double parse_double(const std::string& s, std::string_view what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError("cannot parse " + std::string(what) + " from '" + s + "'");
  }
  if (used != s.size()) throw UsageError("cannot parse " + std::string(what) + " from '" + s + "'");
  return v;
}

std::vector<std::vector<double>> read_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<double> row;
    std::string tok;
    while (fields >> tok) row.push_back(parse_double(tok, "number in '" + path + "'"));
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw UsageError("'" + path + "' holds no numbers");
  return rows;
}

struct Source {
  std::optional<Pmf> pmf;
  std::optional<double> variance;
  bool gaussian() const { return variance.has_value(); }
};

Source parse_source(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) {
    throw UsageError("--source must be bern:A, pmf:FILE or gauss:VAR");
  }
  const std::string kind = spec.substr(0, colon);
  const std::string arg = spec.substr(colon + 1);
  Source s;
  if (kind == "bern") {
    const double a = parse_double(arg, "Bernoulli parameter");
    if (!(a >= 0.0 && a <= 1.0)) throw UsageError("Bernoulli parameter must lie in [0,1]");
    s.pmf = Pmf::bernoulli(a);
  } else if (kind == "pmf") {
    std::vector<double> w;
    for (const auto& row : read_rows(arg)) w.insert(w.end(), row.begin(), row.end());
    s.pmf = Pmf::from_weights(std::move(w));
  } else if (kind == "gauss") {
    s.variance = parse_double(arg, "variance");
  } else {
    throw UsageError("unknown source kind '" + kind + "'");
  }
  return s;
}

DistortionSpec parse_distortion(const std::string& spec, std::size_t source_size) {
  if (spec == "hamming") return DistortionSpec::hamming(source_size);
  if (spec.rfind("matrix:", 0) == 0) {
    auto d = DistortionSpec::from_rows(read_rows(spec.substr(7)));
    if (d.source_size() != source_size) {
      throw DimensionMismatch("distortion matrix has " + std::to_string(d.source_size()) +
                              " rows but the source has " + std::to_string(source_size) +
                              " symbols");
    }
    return d;
  }
  throw UsageError("--distortion must be hamming or matrix:FILE");
}

Regime source_regime(const RunConfig& c, const Source& s) {
  const Regime r = s.gaussian() ? Regime::Gaussian : Regime::Dms;
  if (c.regime && *c.regime != to_string(r)) {
    throw UsageError("--regime " + *c.regime + " does not match the source");
  }
  return r;
}

EpsilonSequence parse_eps(const std::string& spec, Regime regime) {
  const auto parts = split(spec, ',');
  if (parts.size() != 2) throw UsageError("--eps expects c,t");
  return make_epsilon(parse_double(parts[0], "eps scale"), parse_double(parts[1], "eps exponent"),
                      regime);
}

CurveSide parse_side(const std::string& s) {
  if (s == "excess") return CurveSide::Excess;
  if (s == "excess-upper") return CurveSide::ExcessUpper;
  if (s == "correct") return CurveSide::Correct;
  throw UsageError("--side must be excess, excess-upper or correct");
}

double require(const std::optional<double>& v, const char* flag) {
  if (!v) throw UsageError(std::string(flag) + " is required");
  return *v;
}

// Unit-tagged numeric field. Rates and exponents may be shown in bits.
struct Emitter {
  bool bits = false;

  ojson num(double v, std::string_view unit) const {
    if (bits && unit == "nats") return {{"value", v / std::numbers::ln2}, {"unit", "bits"}};
    if (bits && unit == "nats2") {
      return {{"value", v / (std::numbers::ln2 * std::numbers::ln2)}, {"unit", "bits2"}};
    }
    return {{"value", v}, {"unit", unit}};
  }
  ojson vec(std::span<const double> v, std::string_view unit) const {
    ojson arr = ojson::array();
    double scale = 1.0;
    std::string u(unit);
    if (bits && unit == "nats") {
      scale = 1.0 / std::numbers::ln2;
      u = "bits";
    }
    for (double x : v) arr.push_back(x * scale);
    return {{"value", arr}, {"unit", u}};
  }
  ojson count(std::int64_t v) const { return {{"value", v}, {"unit", "count"}}; }
};

struct Output {
  std::string text;
};

ojson header(const RunConfig& c, Regime r) {
  return {{"command", c.command}, {"regime", to_string(r)}};
}

Output cmd_rd(const RunConfig& c, const Emitter& em) {
  const auto src = parse_source(c.source);
  const double level = require(c.level, "--level");
  ojson j = header(c, source_regime(c, src));
  if (src.gaussian()) {
    const GaussianProblem g(*src.variance, level);
    j["rate"] = em.num(rate_distortion_gaussian(g), "nats");
    j["zero_rate"] = level >= *src.variance;
  } else {
    const auto d = parse_distortion(c.distortion, src.pmf->size());
    const auto sol = rate_distortion_dms(*src.pmf, d, level);
    for (const auto& f : to_record(sol)) {
      if (const auto* v = std::get_if<double>(&f.value)) {
        j[f.key] = em.num(*v, f.unit);
      } else if (const auto* n = std::get_if<std::int64_t>(&f.value)) {
        j[f.key] = em.count(*n);
      } else {
        j[f.key] = std::get<bool>(f.value);
      }
    }
    j["output_marginal"] = em.vec(sol.output_marginal.weights(), "probability");
  }
  return {j.dump(2) + "\n"};
}

Output cmd_dispersion(const RunConfig& c, const Emitter& em, const Parallelism& par) {
  const auto src = parse_source(c.source);
  const double level = require(c.level, "--level");
  ojson j = header(c, source_regime(c, src));
  if (src.gaussian()) {
    const GaussianProblem g(*src.variance, level);
    (void)g;
    j["dispersion"] = em.num(dispersion_gaussian(), "nats2");
  } else {
    const auto d = parse_distortion(c.distortion, src.pmf->size());
    const auto res = dispersion_dms(*src.pmf, d, level, {}, par);
    j["dispersion"] = em.num(res.value, "nats2");
    j["tilted_dispersion"] = em.num(res.tilted_value, "nats2");
    j["degenerate"] = res.degenerate;
    j["derivative"] = em.vec(res.derivative.values, "nats");
    j["tilted_information"] = em.vec(res.tilted, "nats");
  }
  return {j.dump(2) + "\n"};
}

Output cmd_exponent(const RunConfig& c, const Emitter& em, const Parallelism& par) {
  const auto src = parse_source(c.source);
  const double level = require(c.level, "--level");
  const double rate = require(c.rate, "--rate");
  const CurveSide side = parse_side(c.side);
  if (side == CurveSide::ExcessUpper) throw UsageError("exponent --side is excess or correct");
  ojson j = header(c, source_regime(c, src));
  j["side"] = to_string(side);
  if (src.gaussian()) {
    const GaussianProblem g(*src.variance, level);
    const double v = side == CurveSide::Excess ? gaussian_excess_exponent(g, rate)
                                               : gaussian_correct_exponent(g, rate);
    j["infeasible"] = false;
    j["exponent"] = em.num(v, "nats");
    j["threshold_variance"] = em.num(g.distortion * std::exp(2.0 * rate), "variance");
    return {j.dump(2) + "\n"};
  }
  const auto d = parse_distortion(c.distortion, src.pmf->size());
  const auto r = side == CurveSide::Excess
                     ? marton_exponent_dms(*src.pmf, d, level, rate)
                     : correct_exponent_dms(*src.pmf, d, level, rate, {}, par);
  j["infeasible"] = r.infeasible;
  if (!r.infeasible) {
    j["exponent"] = em.num(r.value, "nats");
    j["multiplier"] = em.num(r.multiplier, "1");
  }
  j["minimizer"] = em.vec(r.minimizer.weights(), "probability");
  j["minimizer_rate"] = em.num(r.minimizer_rate, "nats");
  j["active"] = r.active;
  j["converged"] = r.converged;
  j["multimodal"] = r.multimodal;
  j["iterations"] = em.count(r.iterations);
  return {j.dump(2) + "\n"};
}

std::vector<double> parse_list(const std::string& s, std::string_view what) {
  std::vector<double> out;
  for (const auto& part : split(s, ',')) out.push_back(parse_double(part, what));
  return out;
}

Output cmd_limit_ratio(const RunConfig& c, const Emitter& em, const Parallelism& par) {
  const auto src = parse_source(c.source);
  const double level = require(c.level, "--level");
  const auto deltas = parse_list(c.deltas, "delta");
  ojson j = header(c, source_regime(c, src));
  LimitRatioReport rep;
  if (src.gaussian()) {
    rep = quadratic_limit_ratio(GaussianProblem(*src.variance, level), deltas, {}, par);
  } else {
    const auto d = parse_distortion(c.distortion, src.pmf->size());
    rep = quadratic_limit_ratio(DmsProblem{*src.pmf, d, level}, deltas, {}, par);
  }
  j["dispersion"] = em.num(rep.dispersion, "nats2");
  j["deltas"] = em.vec(rep.deltas, "nats");
  j["exponents"] = em.vec(rep.exponents, "nats");
  j["ratios"] = em.vec(rep.ratios, "1");
  j["upper_limits"] = em.vec(rep.upper_limits, "1");
  j["lower_limits"] = em.vec(rep.lower_limits, "1");
  j["slope"] = em.num(rep.slope, "1/nats");
  j["intercept"] = em.num(rep.intercept, "1");
  return {j.dump(2) + "\n"};
}

ScanOptions scan_options(const RunConfig& c) {
  if (c.budget < 1) throw UsageError("--budget must be positive");
  ScanOptions o;
  o.budget = c.budget;
  return o;
}

Output cmd_md_curve(const RunConfig& c, const Emitter& em, const Parallelism& par) {
  const auto src = parse_source(c.source);
  const double level = require(c.level, "--level");
  if (!c.eps) throw UsageError("--eps is required");
  if (!c.ns) throw UsageError("--ns is required");
  const Regime regime = source_regime(c, src);
  const auto eps = parse_eps(*c.eps, regime);
  const auto ns = expand_grid(*c.ns);
  const CurveSide side = parse_side(c.side);
  if (c.format != "json" && c.format != "csv") throw UsageError("--format must be json or csv");
  MdCurve curve;
  if (src.gaussian()) {
    curve = gaussian_tail_curve(GaussianProblem(*src.variance, level), eps, ns, side);
  } else {
    if (side == CurveSide::ExcessUpper) throw UsageError("excess-upper is a Gaussian-only side");
    const auto d = parse_distortion(c.distortion, src.pmf->size());
    curve = md_curve_dms(*src.pmf, d, level, eps, ns, side, scan_options(c), par);
  }
  if (c.format == "csv") {
    std::ostringstream s;
    write_csv(s, curve);
    return {s.str()};
  }
  ojson j = header(c, regime);
  j["side"] = to_string(side);
  j["target"] = em.num(curve.target, "1");
  j["trend_slope"] = em.num(curve.trend_slope, "1");
  ojson rows = ojson::array();
  for (const auto& r : curve.rows) {
    rows.push_back({{"n", em.count(r.n)},
                    {"eps", em.num(r.eps, "nats")},
                    {"logp", em.num(r.logp.value(), "logprob")},
                    {"z", em.num(r.z, "1")}});
  }
  j["rows"] = std::move(rows);
  return {j.dump(2) + "\n"};
}

Output cmd_cover(const RunConfig& c, const Emitter& em) {
  const double level = require(c.level, "--level");
  if (!c.type) throw UsageError("--type is required");
  std::vector<std::int64_t> counts;
  for (const auto& part : split(*c.type, ',')) {
    const double v = parse_double(part, "type count");
    if (!(v >= 0.0) || v != std::floor(v)) throw UsageError("type counts must be integers >= 0");
    counts.push_back(static_cast<std::int64_t>(v));
  }
  const NType q(counts);
  const auto d = parse_distortion(c.distortion, q.size());
  if (c.format != "json" && c.format != "csv" && c.format != "listing") {
    throw UsageError("--format must be json, csv or listing");
  }
  const auto cover = greedy_type_cover(q, d, level);
  if (c.format != "json") {
    std::ostringstream s;
    write_cover_listing(s, cover);
    return {s.str()};
  }
  ojson j = {{"command", c.command}, {"regime", "dms"}};
  j["covered"] = cover.covered;
  j["size"] = em.count(static_cast<std::int64_t>(cover.codebook.size()));
  j["class_size"] = em.count(cover.class_size);
  j["rate"] = em.num(cover.rate, "nats");
  j["rd_rate"] = em.num(cover.rd_rate, "nats");
  j["excess_over_rd"] = em.num(cover.excess_over_rd, "nats");
  j["codebook"] = {{"value", cover.codebook}, {"unit", "symbol"}};
  return {j.dump(2) + "\n"};
}

Output cmd_bound(const RunConfig& c, const Emitter& em, const Parallelism& par) {
  const auto src = parse_source(c.source);
  const double level = require(c.level, "--level");
  if (!c.eps) throw UsageError("--eps is required");
  if (!c.n) throw UsageError("--n is required");
  const Regime regime = source_regime(c, src);
  const auto eps = parse_eps(*c.eps, regime);
  const std::int64_t n = *c.n;
  if (n < 2) throw UsageError("--n must be >= 2");
  const double e = eps(n);
  const CurveSide side = parse_side(c.side);
  ojson j = header(c, regime);
  j["side"] = to_string(side);
  j["n"] = em.count(n);
  j["eps"] = em.num(e, "nats");
  if (src.gaussian()) {
    if (side != CurveSide::Excess) throw UsageError("the Gaussian bound is on the excess side");
    const GaussianProblem g(*src.variance, level);
    const auto b = gaussian_achievability_bound(g, n, e);
    const auto exact = gaussian_tail_logprob(n, e, CurveSide::Excess);
    j["bound"] = em.num(b.bound.value(), "logprob");
    j["bound_kind"] = "upper";
    j["exact"] = em.num(exact.value(), "logprob");
    j["eps_prime"] = em.num(b.eps_prime, "nats");
    j["codebook_log_size"] = em.num(b.codebook_log_size, "nats");
    j["rate_check"] =
        b.codebook_log_size / static_cast<double>(n) <= rate_distortion_gaussian(g) + e + 1e-12;
    return {j.dump(2) + "\n"};
  }
  if (side == CurveSide::ExcessUpper) throw UsageError("excess-upper is a Gaussian-only side");
  const auto d = parse_distortion(c.distortion, src.pmf->size());
  const double cc = c.covering_constant.value_or(default_covering_constant(d));
  if (!(cc >= 0.0)) throw UsageError("--J must be >= 0");
  const auto opts = scan_options(c);
  const auto b = achievability_bound_dms(*src.pmf, d, level, n, e, cc, side, opts, par);
  const double r0 = rate_distortion_dms(*src.pmf, d, level).rate;
  const auto exact = side == CurveSide::Excess
                         ? exact_excess_prob_dms(*src.pmf, d, level, n, r0 + e, opts, par)
                         : exact_correct_prob_dms(*src.pmf, d, level, n, r0 - e, opts, par);
  j["covering_constant"] = em.num(cc, "1");
  j["bound"] = em.num(b.value(), "logprob");
  j["bound_kind"] = side == CurveSide::Excess ? "upper" : "lower";
  j["exact"] = em.num(exact.value(), "logprob");
  return {j.dump(2) + "\n"};
}

Output dispatch(const RunConfig& c, const Parallelism& par) {
  const Emitter em{c.bits};
  if (c.command == "rd") return cmd_rd(c, em);
  if (c.command == "dispersion") return cmd_dispersion(c, em, par);
  if (c.command == "exponent") return cmd_exponent(c, em, par);
  if (c.command == "limit-ratio") return cmd_limit_ratio(c, em, par);
  if (c.command == "md-curve") return cmd_md_curve(c, em, par);
  if (c.command == "cover") return cmd_cover(c, em);
  if (c.command == "bound") return cmd_bound(c, em, par);
  throw UsageError("unknown command '" + c.command + "'");
}

void one_line(std::ostream& err, std::string_view prefix, const std::string& msg) {
  std::string flat = msg;
  std::replace(flat.begin(), flat.end(), '\n', ' ');
  err << prefix << flat << '\n';
}

}  // namespace

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["command"] = c.command;
  j["source"] = c.source;
  j["distortion"] = c.distortion;
  put(j, "level", c.level);
  put(j, "rate", c.rate);
  put(j, "eps", c.eps);
  put(j, "ns", c.ns);
  put(j, "regime", c.regime);
  j["side"] = c.side;
  j["format"] = c.format;
  put(j, "out", c.out);
  j["threads"] = c.threads;
  j["budget"] = c.budget;
  j["deltas"] = c.deltas;
  put(j, "type", c.type);
  put(j, "n", c.n);
  put(j, "J", c.covering_constant);
  j["bits"] = c.bits;
  return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  c.command = j.at("command").get<std::string>();
  c.source = j.at("source").get<std::string>();
  c.distortion = j.at("distortion").get<std::string>();
  get(j, "level", c.level);
  get(j, "rate", c.rate);
  get(j, "eps", c.eps);
  get(j, "ns", c.ns);
  get(j, "regime", c.regime);
  c.side = j.at("side").get<std::string>();
  c.format = j.at("format").get<std::string>();
  get(j, "out", c.out);
  c.threads = j.at("threads").get<unsigned>();
  c.budget = j.at("budget").get<std::int64_t>();
  c.deltas = j.at("deltas").get<std::string>();
  get(j, "type", c.type);
  get(j, "n", c.n);
  get(j, "J", c.covering_constant);
  c.bits = j.at("bits").get<bool>();
  return c;
}

RunConfig parse_args(int argc, const char* const* argv) {
  RunConfig c;
  CLI::App app{"Rate-distortion, dispersion and moderate-deviation computations", "mdsc"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.add_option("--format", c.format, "json | csv (md-curve) | listing (cover)");
  std::string out;
  auto* out_opt = app.add_option("--out", out, "Write the artifact here instead of stdout");
  app.add_option("--threads", c.threads, "Worker threads (default: hardware parallelism)");

  double level = 0.0;
  double rate = 0.0;
  double cc = 0.0;
  std::int64_t n = 0;
  std::string eps;
  std::string ns;
  std::string regime;
  std::string type;
  std::vector<std::pair<std::string, CLI::Option*>> seen;

  auto source = [&](CLI::App* s) { s->add_option("--source", c.source, "bern:A | pmf:FILE | gauss:VAR")->required(); };
  auto distortion = [&](CLI::App* s) {
    s->add_option("--distortion", c.distortion, "hamming | matrix:FILE");
  };
  auto level_opt = [&](CLI::App* s) {
    seen.emplace_back("level", s->add_option("--level", level, "Distortion level D")->required());
  };
  auto bits = [&](CLI::App* s) { s->add_flag("--bits", c.bits, "Show rates in bits"); };
  auto side = [&](CLI::App* s) { s->add_option("--side", c.side, "excess | excess-upper | correct"); };
  auto regime_opt = [&](CLI::App* s) {
    seen.emplace_back("regime", s->add_option("--regime", regime, "dms | gaussian"));
  };
  auto eps_opt = [&](CLI::App* s) {
    seen.emplace_back("eps", s->add_option("--eps", eps, "c,t for eps_n = c n^-t"));
  };
  auto budget = [&](CLI::App* s) { s->add_option("--budget", c.budget, "Type enumeration cap"); };

  auto* rd = app.add_subcommand("rd", "Rate-distortion function");
  source(rd), distortion(rd), level_opt(rd), bits(rd), regime_opt(rd);

  auto* disp = app.add_subcommand("dispersion", "Source-coding dispersion");
  source(disp), distortion(disp), level_opt(disp), bits(disp), regime_opt(disp);

  auto* expo = app.add_subcommand("exponent", "Excess-distortion or correct-decoding exponent");
  source(expo), distortion(expo), level_opt(expo), bits(expo), side(expo), regime_opt(expo);
  seen.emplace_back("rate", expo->add_option("--rate", rate, "Coding rate in nats")->required());

  auto* lim = app.add_subcommand("limit-ratio", "F(R+delta) 2V / delta^2 along a delta grid");
  source(lim), distortion(lim), level_opt(lim), regime_opt(lim);
  lim->add_option("--deltas", c.deltas, "Decreasing comma list");

  auto* curve = app.add_subcommand("md-curve", "Exact normalized exponents along a blocklength grid");
  source(curve), distortion(curve), level_opt(curve), side(curve), regime_opt(curve), eps_opt(curve),
      budget(curve);
  seen.emplace_back("ns", curve->add_option("--ns", ns, "a:b:log | a:b:lin | comma list")->required());

  auto* cover = app.add_subcommand("cover", "Greedy D-cover of a type class");
  distortion(cover), level_opt(cover);
  seen.emplace_back("type", cover->add_option("--type", type, "Counts, e.g. 2,2")->required());

  auto* bound = app.add_subcommand("bound", "Finite-n achievability bound next to the exact value");
  source(bound), distortion(bound), level_opt(bound), side(bound), regime_opt(bound), eps_opt(bound),
      budget(bound);
  seen.emplace_back("n", bound->add_option("--n", n, "Blocklength")->required());
  seen.emplace_back("J", bound->add_option("--J", cc, "Covering constant"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::ostringstream text;
    std::ostringstream ignored;
    app.exit(e, text, ignored);
    throw HelpRequested{text.str()};
  }
  for (auto* sub : app.get_subcommands()) c.command = sub->get_name();
  if (out_opt->count() > 0) c.out = out;
  for (const auto& [key, opt] : seen) {
    if (opt->count() == 0) continue;
    if (key == "level") c.level = level;
    if (key == "rate") c.rate = rate;
    if (key == "regime") c.regime = regime;
    if (key == "eps") c.eps = eps;
    if (key == "ns") c.ns = ns;
    if (key == "type") c.type = type;
    if (key == "n") c.n = n;
    if (key == "J") c.covering_constant = cc;
  }
  return c;
}

std::vector<std::int64_t> expand_grid(std::string_view spec) {
  std::vector<double> values;
  const auto parts = split(spec, ':');
  if (parts.size() == 3) {
    const double a = parse_double(parts[0], "grid start");
    const double b = parse_double(parts[1], "grid stop");
    if (!(a >= 1.0) || !(b >= a)) throw UsageError("grid needs 1 <= start <= stop");
    constexpr int kPoints = 12;
    for (int i = 0; i < kPoints; ++i) {
      const double f = static_cast<double>(i) / (kPoints - 1);
      if (parts[2] == "log") {
        values.push_back(std::exp(std::log(a) + f * (std::log(b) - std::log(a))));
      } else if (parts[2] == "lin") {
        values.push_back(a + f * (b - a));
      } else {
        throw UsageError("grid spacing must be log or lin");
      }
    }
    values.back() = b;
  } else if (parts.size() == 1) {
    for (const auto& v : split(spec, ',')) values.push_back(parse_double(v, "grid value"));
  } else {
    throw UsageError("grid must be a:b:log, a:b:lin or a comma list");
  }
  std::vector<std::int64_t> out;
  for (double v : values) {
    if (!(v >= 1.0) || !std::isfinite(v) || v > 9e15) {
      throw UsageError("grid values must be finite and >= 1");
    }
    out.push_back(std::llround(v));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig config;
  try {
    config = parse_args(argc, argv);
  } catch (const HelpRequested& h) {
    out << h.text;
    return 0;
  } catch (const CLI::ParseError& e) {
    one_line(err, "error: ", e.what());
    return 2;
  }

  try {
    std::ofstream file;
    if (config.out) {
      file.open(*config.out);
      if (!file) throw UsageError("cannot write '" + *config.out + "'");
    }
    const unsigned threads =
        config.threads > 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    WorkerPool pool(threads);
    const auto result = dispatch(config, Parallelism(pool));
    (config.out ? static_cast<std::ostream&>(file) : out) << result.text;
    return 0;
  } catch (const UsageError& e) {
    one_line(err, "error: ", e.what());
    return 2;
  } catch (const Error& e) {
    if (is_validation_error(e.kind())) {
      one_line(err, "error: " + std::string(to_string(e.kind())) + ": ", e.what());
      return 2;
    }
    ojson report = {{"error", to_string(e.kind())}, {"message", e.what()}};
    ojson residuals = ojson::object();
    for (const auto& r : e.residuals()) residuals[r.name] = r.value;
    report["residuals"] = residuals;
    err << report.dump() << '\n';
    return 3;
  } catch (const std::exception& e) {
    ojson report = {{"error", "internal"}, {"message", e.what()}};
    err << report.dump() << '\n';
    return 3;
  }
}

}  // namespace mdsc::cli
