#include "conclab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

#include "conclab/distributions.hpp"
#include "conclab/format.hpp"
#include "conclab/functionals.hpp"
#include "conclab/numerics.hpp"
#include "conclab/parallel.hpp"
#include "conclab/stats.hpp"
#include "json.hpp"

namespace conclab::harness {

namespace {

using Json = nlohmann::ordered_json;

void require(bool ok, const std::string& message) {
  if (!ok) throw PreconditionError(message);
}

Eigen::VectorXd flat_unit(int n) { return Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n))); }

double soft_max(const Eigen::VectorXd& x) {
  const double top = x.maxCoeff();
  return top + std::log((x.array() - top).exp().sum());
}

using StatisticFn = std::function<double(const Eigen::VectorXd&)>;

StatisticFn compile_statistic(const StatisticSpec& s, int n) {
  if (s.kind == "linear") {
    Eigen::VectorXd a = flat_unit(n);
    if (!s.a.empty()) {
      require(static_cast<int>(s.a.size()) == n, "statistic linear: coefficient count must equal n");
      a = Eigen::Map<const Eigen::VectorXd>(s.a.data(), n);
    }
    return [a](const Eigen::VectorXd& x) { return a.dot(x); };
  }
  if (s.kind == "lp_norm") {
    require(s.p > 0.0, "statistic lp_norm: p must be positive");
    const double p = s.p;
    return [p](const Eigen::VectorXd& x) { return func::lp_functional(x, p); };
  }
  if (s.kind == "lp_sum") {
    require(s.p > 0.0, "statistic lp_sum: p must be positive");
    const double p = s.p;
    return [p](const Eigen::VectorXd& x) {
      double total = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) total += std::pow(std::abs(x[i]), p);
      return total;
    };
  }
  if (s.kind == "lp_of_transport") {
    require(s.p > 0.0, "statistic lp_of_transport: p must be positive");
    const auto law = dist::parse_law(s.law);
    const double p = s.p;
    return [law, p](const Eigen::VectorXd& x) {
      Eigen::VectorXd y(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) y[i] = law.transport(x[i]);
      return func::lp_functional(y, p);
    };
  }
  if (s.kind == "max_abs") return [](const Eigen::VectorXd& x) { return x.cwiseAbs().maxCoeff(); };
  if (s.kind == "custom") {
    if (s.custom_id == "euclidean_norm") return [](const Eigen::VectorXd& x) { return x.norm(); };
    if (s.custom_id == "soft_max") return soft_max;
    throw PreconditionError("statistic custom: unregistered id '" + s.custom_id + "'");
  }
  throw PreconditionError("unknown statistic kind '" + s.kind + "'");
}

using SamplerFn = std::function<void(Rng&, Eigen::VectorXd&)>;

SamplerFn compile_sampler(const SamplerSpec& s) {
  require(s.n >= 1, "sampler: n must be positive");
  if (s.ball_q) {
    const double q = *s.ball_q;
    require(q > 0.0, "sampler: ball exponent must be positive");
    return [q](Rng& rng, Eigen::VectorXd& x) { dist::draw_ball_q(rng, q, x); };
  }
  const auto law = dist::parse_law(s.law);
  return [law](Rng& rng, Eigen::VectorXd& x) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = law.sample(rng);
  };
}

double param(const BoundSpec& b, const std::string& key, std::optional<double> fallback = std::nullopt) {
  const auto it = b.params.find(key);
  if (it != b.params.end()) return it->second;
  if (fallback) return *fallback;
  throw PreconditionError("bound " + b.theorem + ": missing parameter '" + key + "'");
}

Eigen::VectorXd linear_coefficients(const StatisticSpec& s, int n, const std::string& theorem) {
  require(s.kind == "linear", theorem + " needs a linear statistic");
  if (s.a.empty()) return flat_unit(n);
  return Eigen::Map<const Eigen::VectorXd>(s.a.data(), static_cast<Eigen::Index>(s.a.size()));
}

bool known_theorem(const std::string& t) {
  return t == "weibull_linear" || t == "lpn_gauss" || t == "lp_on_lq_ball" || t == "poly_nonlinear";
}

// Sorted absolute deviations from the lower median.
struct Deviations {
  double median = 0.0;
  std::vector<double> sorted;
  std::size_t exceed(double level) const {
    return static_cast<std::size_t>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), level));
  }
};

Deviations deviations(const std::vector<double>& values) {
  Deviations d;
  d.median = stats::median(values);
  d.sorted.reserve(values.size());
  for (double v : values) d.sorted.push_back(std::abs(v - d.median));
  std::sort(d.sorted.begin(), d.sorted.end());
  return d;
}

}  // namespace

// --- ids ---------------------------------------------------------------------

std::string SamplerSpec::id() const {
  if (ball_q) return "ball(q=" + format_double(*ball_q) + ",n=" + std::to_string(n) + ")";
  return law + "^" + std::to_string(n);
}

std::string StatisticSpec::id() const {
  if (kind == "linear") return a.empty() ? "linear(flat)" : "linear(a)";
  if (kind == "lp_of_transport") return "lp_of_transport(p=" + format_double(p) + "," + law + ")";
  if (kind == "custom") return "custom(" + custom_id + ")";
  if (kind == "max_abs") return "max_abs";
  return kind + "(p=" + format_double(p) + ")";
}

bool VerificationReport::all_pass() const {
  return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const Row& r) { return r.pass; });
}

// --- configs -------------------------------------------------------------------

ExperimentConfig parse_config(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const std::exception& e) {
    throw PreconditionError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  try {
    c.name = j.value("name", c.name);
    const auto& s = j.at("sampler");
    c.sampler.n = s.at("n").get<int>();
    if (s.contains("ball_q")) c.sampler.ball_q = s.at("ball_q").get<double>();
    c.sampler.law = s.value("law", c.sampler.law);
    const auto& st = j.at("statistic");
    c.statistic.kind = st.at("kind").get<std::string>();
    c.statistic.p = st.value("p", c.statistic.p);
    c.statistic.law = st.value("law", std::string());
    c.statistic.custom_id = st.value("id", std::string());
    if (st.contains("a")) c.statistic.a = st.at("a").get<std::vector<double>>();
    const auto& b = j.at("bound");
    c.bound.theorem = b.at("theorem").get<std::string>();
    c.bound.grid = b.value("grid", c.bound.grid);
    if (b.contains("params")) c.bound.params = b.at("params").get<std::map<std::string, double>>();
    c.t_grid = j.at("t_grid").get<std::vector<double>>();
    c.trials = j.value("trials", c.trials);
    c.seed = j.value("seed", c.seed);
    if (j.contains("calibration")) {
      const auto& cal = j.at("calibration");
      const std::string mode = cal.value("mode", std::string("default"));
      require(mode == "default" || mode == "calibrated", "calibration mode must be default or calibrated");
      c.calibrated = mode == "calibrated";
      if (cal.contains("constants"))
        for (const auto& [key, value] : cal.at("constants").items())
          c.constants.set(key, value.get<double>(), "config");
    }
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("config: ") + e.what());
  }
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  Json j;
  j["name"] = c.name;
  Json s = {{"n", c.sampler.n}};
  if (c.sampler.ball_q) s["ball_q"] = *c.sampler.ball_q;
  else s["law"] = c.sampler.law;
  j["sampler"] = s;
  Json st = {{"kind", c.statistic.kind}, {"p", c.statistic.p}};
  if (!c.statistic.law.empty()) st["law"] = c.statistic.law;
  if (!c.statistic.custom_id.empty()) st["id"] = c.statistic.custom_id;
  if (!c.statistic.a.empty()) st["a"] = c.statistic.a;
  j["statistic"] = st;
  j["bound"] = {{"theorem", c.bound.theorem}, {"grid", c.bound.grid}, {"params", c.bound.params}};
  j["t_grid"] = c.t_grid;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  Json constants = Json::object();
  for (const auto& [key, entry] : c.constants.entries()) constants[key] = entry.value;
  j["calibration"] = {{"mode", c.calibrated ? "calibrated" : "default"}, {"constants", constants}};
  return j.dump(2) + "\n";
}

void validate(const ExperimentConfig& c) {
  require(c.trials >= kMinTrials, "config: trials must be at least " + std::to_string(kMinTrials));
  require(!c.t_grid.empty(), "config: t_grid is empty");
  for (std::size_t i = 1; i < c.t_grid.size(); ++i)
    require(c.t_grid[i] > c.t_grid[i - 1], "config: t_grid must be strictly increasing");
  for (double t : c.t_grid) require(std::isfinite(t) && t >= 0.0, "config: t_grid values must be finite and >= 0");
  require(known_theorem(c.bound.theorem), "config: unknown theorem '" + c.bound.theorem + "'");
  require(c.bound.grid == "deviation" || c.bound.grid == "theorem_t", "config: grid must be deviation or theorem_t");
  if (c.bound.grid == "theorem_t")
    require(c.bound.theorem == "lpn_gauss" || c.bound.theorem == "poly_nonlinear",
            "config: theorem_t grids need a threshold-form theorem");
  compile_sampler(c.sampler);
  compile_statistic(c.statistic, c.sampler.n);
  if (c.bound.theorem == "lp_on_lq_ball") {
    const double n = param(c.bound, "n", c.sampler.n);
    const double s_max = std::pow(n, 1.0 / param(c.bound, "p") - 1.0 / param(c.bound, "q"));
    require(c.t_grid.back() <= s_max, "config: t_grid exceeds the bound's domain s <= " + format_double(s_max));
  }
  evaluate_bound(c, c.constants);  // surfaces missing parameters
}

// --- simulation ------------------------------------------------------------------

void draw_sample(const SamplerSpec& sampler, Rng& rng, Eigen::VectorXd& x) {
  x.resize(sampler.n);
  compile_sampler(sampler)(rng, x);
}

double evaluate_statistic(const StatisticSpec& statistic, const Eigen::VectorXd& x) {
  return compile_statistic(statistic, static_cast<int>(x.size()))(x);
}

std::vector<double> simulate(const SamplerSpec& sampler, const StatisticSpec& statistic, long long trials,
                             std::uint64_t seed) {
  require(trials >= 1, "simulate: trials must be positive");
  const SamplerFn draw = compile_sampler(sampler);
  const StatisticFn stat = compile_statistic(statistic, sampler.n);
  std::vector<double> values(static_cast<std::size_t>(trials));
  parallel_for(values.size(), [&](std::size_t i) {
    Rng rng(seed, i);
    Eigen::VectorXd x(sampler.n);
    draw(rng, x);
    values[i] = stat(x);
  });
  return values;
}

// --- bounds ------------------------------------------------------------------------

FitTarget fit_target(const std::string& theorem) {
  if (theorem == "weibull_linear") return {"weibull_linear.c_q", false};
  if (theorem == "lp_on_lq_ball") return {"lp_ball.c_q", false};
  if (theorem == "lpn_gauss") return {"lpn_gauss.C", true};
  if (theorem == "poly_nonlinear") return {"poly_nonlinear.C_q", true};
  throw PreconditionError("fit_target: unknown theorem '" + theorem + "'");
}

bounds::TailBoundCurve make_curve(const BoundSpec& b, int n, const StatisticSpec& statistic,
                                  const CalibrationSet& calib) {
  if (b.theorem == "weibull_linear")
    return bounds::weibull_linear_curve(param(b, "q"), linear_coefficients(statistic, n, b.theorem), calib);
  if (b.theorem == "lpn_gauss") return bounds::lpn_gauss_curve(param(b, "n", n), param(b, "p"), calib);
  if (b.theorem == "lp_on_lq_ball")
    return bounds::lp_on_lq_ball_curve(param(b, "n", n), param(b, "p"), param(b, "q"), calib);
  if (b.theorem == "poly_nonlinear") {
    const Eigen::VectorXd sups = linear_coefficients(statistic, n, b.theorem).cwiseAbs();
    const double q = param(b, "q"), p = param(b, "p"), dim = param(b, "n", n);
    return bounds::threshold_curve(
        "poly_nonlinear", {{"q", q}, {"p", p}, {"n", dim}}, calib.id(),
        [=](double t) { return bounds::poly_nonlinear_bound(q, p, sups, dim, t, calib).threshold_lorentz; },
        calib.get("poly_nonlinear.C"));
  }
  throw PreconditionError("unknown theorem '" + b.theorem + "'");
}

std::vector<BoundPoint> evaluate_bound(const ExperimentConfig& c, const CalibrationSet& calib) {
  std::vector<BoundPoint> out;
  out.reserve(c.t_grid.size());
  const int n = c.sampler.n;
  if (c.bound.grid == "theorem_t") {
    for (double t : c.t_grid) {
      BoundPoint point;
      if (c.bound.theorem == "lpn_gauss") {
        point.deviation = bounds::lpn_gauss_bound(param(c.bound, "n", n), param(c.bound, "p"), t, calib);
        point.bound = std::min(2.0, calib.get("lpn_gauss.C_prob") * std::exp(-0.5 * t * t));
      } else {
        const Eigen::VectorXd sups = linear_coefficients(c.statistic, n, c.bound.theorem).cwiseAbs();
        const auto b = bounds::poly_nonlinear_bound(param(c.bound, "q"), param(c.bound, "p"), sups,
                                                    param(c.bound, "n", n), t, calib);
        point.deviation = b.threshold_lorentz;
        point.bound = std::min(2.0, b.probability);
      }
      out.push_back(point);
    }
    return out;
  }
  const auto curve = make_curve(c.bound, n, c.statistic, calib);
  for (double t : c.t_grid) out.push_back({t, curve(t)});
  return out;
}

// --- verification -------------------------------------------------------------------

namespace {

std::vector<Row> compare(const ExperimentConfig& c, const Deviations& dev, const CalibrationSet& calib) {
  const auto points = evaluate_bound(c, calib);
  const std::size_t trials = dev.sorted.size();
  std::vector<Row> rows;
  for (std::size_t i = 0; i < points.size(); ++i) {
    Row r;
    r.t = c.t_grid[i];
    r.deviation = points[i].deviation;
    const std::size_t hits = dev.exceed(r.deviation);
    r.empirical = static_cast<double>(hits) / trials;
    const auto ci = stats::wilson(hits, trials);
    r.ci_lo = ci.lo;
    r.ci_hi = ci.hi;
    r.bound = points[i].bound;
    r.pass = r.bound >= r.ci_lo;
    rows.push_back(r);
  }
  return rows;
}

// Most aggressive value of the fit key whose bound clears the Wilson upper
// limit at every grid point of the fitting split.
double fit_constant(const ExperimentConfig& c, const Deviations& fit_dev, const FitTarget& target) {
  const auto clears = [&](double value) {
    CalibrationSet calib = c.constants;
    calib.set(target.key, value, "trial");
    for (const Row& r : compare(c, fit_dev, calib))
      if (r.bound < r.ci_hi) return false;
    return true;
  };
  constexpr double kRange = 25.0;  // log-value search window
  const double sign = target.larger_is_conservative ? 1.0 : -1.0;
  const auto pred = [&](double u) { return clears(std::exp(sign * u)); };
  if (!pred(kRange))
    throw NumericalFailure("calibration: no value of " + target.key + " makes the bound clear the fitting split");
  if (pred(-kRange)) return std::exp(-sign * kRange);
  const double u = num::bisect_predicate(pred, -kRange, kRange, 200, 1e-9);
  return std::exp(sign * u);
}

}  // namespace

VerificationReport verify_bound(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  validate(config);
  VerificationReport report;
  report.name = config.name;
  report.sampler = config.sampler.id();
  report.statistic = config.statistic.id();
  report.bound = config.bound.theorem + "[" + config.bound.grid + "]";
  report.seed = config.seed;
  report.trials = config.trials;

  CalibrationSet calib = config.constants;
  std::uint64_t verify_seed = config.seed;
  if (config.calibrated) {
    const FitTarget target = fit_target(config.bound.theorem);
    report.calibration.calibrated = true;
    report.calibration.key = target.key;
    report.calibration.fit_seed = derive_seed(config.seed, 0);
    verify_seed = derive_seed(config.seed, 1);
    const auto fit_dev = deviations(simulate(config.sampler, config.statistic, config.trials,
                                             report.calibration.fit_seed));
    const double value = fit_constant(config, fit_dev, target);
    calib.set_fitted(target.key, value, config.name, report.calibration.fit_seed, config.trials);
    report.calibration.value = value;
  }
  report.calibration.verify_seed = verify_seed;
  report.calibration.calib_id = calib.id();
  const auto dev = deviations(simulate(config.sampler, config.statistic, config.trials, verify_seed));
  report.median = dev.median;
  report.rows = compare(config, dev, calib);
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

// --- Gaussian convex order -------------------------------------------------------------

namespace {

struct SmoothFunction {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<double(const Eigen::VectorXd&)> gradient_norm;
};

SmoothFunction smooth_function(const std::string& f, int n) {
  if (f == "linear") {
    const Eigen::VectorXd theta = flat_unit(n);
    return {[theta](const Eigen::VectorXd& x) { return theta.dot(x); }, [](const Eigen::VectorXd&) { return 1.0; }};
  }
  if (f == "euclidean_norm")
    return {[](const Eigen::VectorXd& x) { return x.norm(); },
            [](const Eigen::VectorXd& x) { return x.norm() > 0.0 ? 1.0 : 0.0; }};
  if (f == "constant")
    return {[](const Eigen::VectorXd&) { return 0.0; }, [](const Eigen::VectorXd&) { return 0.0; }};
  if (f == "soft_max")
    return {soft_max, [](const Eigen::VectorXd& x) {
              const Eigen::ArrayXd w = (x.array() - x.maxCoeff()).exp();
              return std::sqrt((w * w).sum()) / w.sum();
            }};
  throw PreconditionError("pisier_check: no gradient registered for f = '" + f + "'");
}

std::function<double(double)> convex_function(const std::string& phi) {
  if (phi == "square") return [](double t) { return t * t; };
  if (phi == "quartic") return [](double t) { return t * t * t * t; };
  if (phi == "abs") return [](double t) { return std::abs(t); };
  if (phi == "cosh") return [](double t) { return std::cosh(t); };
  throw PreconditionError("pisier_check: unknown convex function '" + phi + "'");
}

}  // namespace

PisierReport pisier_check(const std::string& f, const std::string& phi, int n, long long trials,
                          std::uint64_t seed) {
  require(n >= 1 && trials >= 2, "pisier_check: need n >= 1 and trials >= 2");
  const SmoothFunction fn = smooth_function(f, n);
  const auto convex = convex_function(phi);
  std::vector<double> left(static_cast<std::size_t>(trials)), right(static_cast<std::size_t>(trials));
  const std::uint64_t left_seed = derive_seed(seed, 0), right_seed = derive_seed(seed, 1);
  parallel_for(left.size(), [&](std::size_t i) {
    Eigen::VectorXd x(n), y(n);
    Rng a(left_seed, i);
    for (int j = 0; j < n; ++j) x[j] = a.normal();
    for (int j = 0; j < n; ++j) y[j] = a.normal();
    left[i] = convex(fn.value(x) - fn.value(y));
    Rng b(right_seed, i);
    for (int j = 0; j < n; ++j) x[j] = b.normal();
    right[i] = convex(0.5 * num::kPi * fn.gradient_norm(x) * b.normal());
  });
  const auto l = stats::mean_se(left), r = stats::mean_se(right);
  PisierReport out{f, phi, n, trials, seed, l.mean, l.se, r.mean, r.se, 0.0, 0.0, false};
  out.ratio = r.mean != 0.0 ? l.mean / r.mean : (l.mean == 0.0 ? 1.0 : num::kInf);
  if (l.mean != 0.0 && r.mean != 0.0)
    out.ratio_se = std::abs(out.ratio) * std::hypot(l.se / l.mean, r.se / r.mean);
  out.pass = l.mean <= r.mean + 3.0 * std::hypot(l.se, r.se);
  return out;
}

std::string to_json(const PisierReport& r) {
  Json j = {{"f", r.f},         {"phi", r.phi},     {"n", r.n},           {"trials", r.trials},
            {"seed", r.seed},   {"lhs", r.lhs},     {"lhs_se", r.lhs_se}, {"rhs", r.rhs},
            {"rhs_se", r.rhs_se}, {"ratio", r.ratio}, {"ratio_se", r.ratio_se}, {"pass", r.pass}};
  return j.dump(2) + "\n";
}

// --- random rotations ------------------------------------------------------------------

Eigen::MatrixXd haar_rotation(int n, Rng& rng) {
  require(n >= 1, "haar_rotation: n must be positive");
  Eigen::MatrixXd g(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = rng.normal();
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  if (Eigen::PartialPivLU<Eigen::MatrixXd>(q).determinant() < 0.0) q.col(0) = -q.col(0);
  return q;
}

RotationReport experiment_random_rotation(int n, double q, const std::string& g, long long trials,
                                          std::uint64_t seed, bool identity, std::vector<double> lambdas,
                                          std::optional<double> p) {
  require(q > 4.0, "experiment_random_rotation: q must exceed 4");
  require(n >= 1 && trials >= 2, "experiment_random_rotation: need n >= 1 and trials >= 2");
  const double lo = q / (q - 2.0), hi = q / 2.0;
  const double p_value = p ? *p : 0.5 * (lo + hi);
  require(p_value > lo && p_value < hi, "experiment_random_rotation: need q/(q-2) < p < q/2");
  RotationReport out;
  out.n = n;
  out.q = q;
  out.p = p_value;
  out.scale = std::pow(2.0, -1.0 / q) / q;
  out.g = g;
  out.trials = trials;
  out.seed = seed;
  out.identity = identity;

  Eigen::MatrixXd u = Eigen::MatrixXd::Identity(n, n);
  if (!identity) {
    Rng rng(seed, 0);
    u = haar_rotation(n, rng);
  }
  // Every registered g is linear or rotation invariant, so g(UX) needs one row.
  std::function<double(const Eigen::VectorXd&)> eval;
  if (g == "first_coordinate") {
    const Eigen::VectorXd w = u.row(0).transpose();
    eval = [w](const Eigen::VectorXd& x) { return w.dot(x); };
  } else if (g == "mean_coordinate") {
    const Eigen::VectorXd w = u.colwise().sum().transpose() / std::sqrt(static_cast<double>(n));
    eval = [w](const Eigen::VectorXd& x) { return w.dot(x); };
  } else if (g == "euclidean_norm") {
    eval = [](const Eigen::VectorXd& x) { return x.norm(); };
  } else {
    throw PreconditionError("experiment_random_rotation: unregistered g '" + g + "'");
  }
  const auto law = dist::poly_tail(q, out.scale);
  std::vector<double> values(static_cast<std::size_t>(trials));
  const std::uint64_t trial_seed = derive_seed(seed, 1);
  parallel_for(values.size(), [&](std::size_t i) {
    Rng rng(trial_seed, i);
    Eigen::VectorXd x(n);
    for (int j = 0; j < n; ++j) x[j] = law.sample(rng);
    values[i] = eval(x);
  });
  const Deviations dev = deviations(values);
  const double nd = static_cast<double>(n);
  for (double lambda : lambdas) {
    RotationRow row;
    row.lambda = lambda;
    row.probability = std::exp(-0.5 * lambda * lambda);
    row.quantile = stats::quantile_sorted(dev.sorted, 1.0 - row.probability);
    row.ratio = lambda > 0.0 ? row.quantile / lambda : num::kInf;
    const double cap = std::min(std::pow(nd, 0.5 - 0.5 / p_value - 1.0 / q) / lambda,
                                std::pow(nd, 0.5 / p_value - 1.0 / q));
    row.in_range = std::exp(lambda * lambda / (2.0 * q)) <= cap;
    out.rows.push_back(row);
  }
  return out;
}

std::string to_json(const RotationReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"lambda", row.lambda},
                    {"probability", row.probability},
                    {"quantile", row.quantile},
                    {"ratio", row.ratio},
                    {"in_range", row.in_range}});
  Json j = {{"n", r.n},         {"q", r.q},       {"p", r.p},           {"scale", r.scale},
            {"g", r.g},         {"trials", r.trials}, {"seed", r.seed}, {"identity", r.identity},
            {"rows", rows}};
  return j.dump(2) + "\n";
}

// --- report JSON --------------------------------------------------------------------------

std::string report_json(const VerificationReport& r) {
  Json rows = Json::array();
  for (const Row& row : r.rows)
    rows.push_back({{"t", row.t},
                    {"deviation", row.deviation},
                    {"empirical", row.empirical},
                    {"ci_lo", row.ci_lo},
                    {"ci_hi", row.ci_hi},
                    {"bound", row.bound},
                    {"pass", row.pass}});
  Json j;
  j["name"] = r.name;
  j["sampler"] = r.sampler;
  j["statistic"] = r.statistic;
  j["bound"] = r.bound;
  j["seed"] = r.seed;
  j["trials"] = r.trials;
  j["median"] = r.median;
  j["calibration"] = {{"calibrated", r.calibration.calibrated},
                      {"key", r.calibration.key},
                      {"value", r.calibration.value},
                      {"fit_seed", r.calibration.fit_seed},
                      {"verify_seed", r.calibration.verify_seed},
                      {"calib_id", r.calibration.calib_id}};
  j["rows"] = rows;
  j["all_pass"] = r.all_pass();
  return j.dump(2) + "\n";
}

}  // namespace conclab::harness
