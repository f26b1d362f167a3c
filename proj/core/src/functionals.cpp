#include "conclab/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "conclab/numerics.hpp"
#include "conclab/parallel.hpp"

namespace conclab::func {

using num::kInf;

double lp_functional(const Eigen::VectorXd& x, double p) {
  if (!(p > 0.0)) throw PreconditionError("lp_functional: p must be positive");
  const double peak = x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
  if (std::isinf(p) || peak == 0.0) return peak;
  double sum = 0.0;
  for (double v : x) sum += std::pow(std::abs(v) / peak, p);
  return peak * std::pow(sum, 1.0 / p);
}

namespace {

void check_lorentz(double r, double q) {
  if (!(r >= 1.0) || !(q > 1.0)) throw PreconditionError("lorentz: need r >= 1 and q > 1");
}

std::vector<double> sorted_abs(const Eigen::VectorXd& v) {
  std::vector<double> out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = std::abs(v[i]);
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

}  // namespace

double lorentz_weight(int m, double r, double q) {
  return std::max(static_cast<double>(m), r * std::pow(static_cast<double>(m), 1.0 / q));
}

double lorentz_dual(const Eigen::VectorXd& y, double r, double q) {
  check_lorentz(r, q);
  const std::vector<double> s = sorted_abs(y);
  double prefix = 0.0;
  double best = 0.0;
  for (std::size_t k = 1; k <= s.size(); ++k) {
    prefix += s[k - 1];
    best = std::max(best, prefix / lorentz_weight(static_cast<int>(k), r, q));
  }
  return best;
}

double lorentz_dual_sweep(const Eigen::VectorXd& y, double r, double q) {
  check_lorentz(r, q);
  const std::vector<double> s = sorted_abs(y);
  const double cap = std::min(std::pow(r, q / (q - 1.0)), static_cast<double>(s.size()));
  double prefix = 0.0;
  double best = 0.0;
  for (std::size_t k = 1; k <= s.size() && static_cast<double>(k) <= cap; ++k) {
    prefix += s[k - 1];
    best = std::max(best, prefix / (r * std::pow(static_cast<double>(k), 1.0 / q)));
  }
  return 2.0 * best;
}

// For sorted |x| the pairing with an admissible y is sum_j (x_j - x_{j+1}) P_j,
// where P is the concave nondecreasing prefix-sum profile of y with P <= w.
// The weights are concave below the first index m1 with w_{m1} = m1, and the
// constraints past m1 are implied. Any admissible P with P_{m1} = alpha and
// last slope s lies below min(w, alpha - s (m1 - j)), continued with slope s,
// and that profile is itself admissible once s >= alpha - w_{m1-1}. The value
// is nondecreasing in alpha, so alpha = min(m1, s + w_{m1-1}) and the remaining
// objective is concave piecewise linear in s with breakpoints where the line
// meets some w_j.
double lorentz_norm(const Eigen::VectorXd& x, double r, double q) {
  check_lorentz(r, q);
  const std::vector<double> sorted = sorted_abs(x);
  const int n = static_cast<int>(sorted.size());
  if (n == 0) return 0.0;
  std::vector<double> coef(n + 1, 0.0);
  for (int j = 1; j <= n; ++j) coef[j] = sorted[j - 1] - (j < n ? sorted[j] : 0.0);
  int m1 = 1;
  while (m1 <= n && r * std::pow(static_cast<double>(m1), 1.0 / q) > m1) ++m1;
  std::vector<double> w(n + 1, 0.0);
  for (std::size_t m = 1; m < w.size(); ++m) w[m] = lorentz_weight(static_cast<int>(m), r, q);
  if (m1 > n) {
    double value = 0.0;
    for (int j = 1; j <= n; ++j) value += coef[j] * w[j];
    return value;
  }
  const double top = static_cast<double>(m1);
  const double below = w[m1 - 1];
  const auto apex = [&](double slope) { return std::min(top, slope + below); };
  const auto objective = [&](double slope) {
    const double alpha = apex(slope);
    double value = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double line = alpha + slope * (j - m1);
      value += coef[j] * (j < m1 ? std::min(w[j], line) : line);
    }
    return value;
  };
  const double slope_max = m1 > 1 ? std::min(1.0, below / (m1 - 1)) : 1.0;
  std::vector<double> breakpoints{0.0, slope_max, top - below};
  for (int j = 1; j < m1; ++j) {
    breakpoints.push_back((top - w[j]) / (top - j));
    if (j < m1 - 1) breakpoints.push_back((below - w[j]) / (m1 - 1 - j));
  }
  double best = 0.0;
  for (double slope : breakpoints)
    if (slope >= 0.0 && slope <= slope_max) best = std::max(best, objective(slope));
  return best;
}

std::function<double(double)> gaussian_log_mgf() {
  return [](double t) { return 0.5 * t * t; };
}

std::function<double(double)> rademacher_log_mgf() {
  // log cosh t without overflow.
  return [](double t) {
    const double a = std::abs(t);
    return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
  };
}

std::function<double(double)> log_mgf(const dist::Distribution1D& law) {
  if (law.discrete()) {
    const auto atoms = law.atoms();
    return [atoms](double t) {
      double peak = -kInf;
      for (const auto& [x, w] : atoms)
        if (w > 0.0) peak = std::max(peak, t * x);
      double sum = 0.0;
      for (const auto& [x, w] : atoms)
        if (w > 0.0) sum += w * std::exp(t * x - peak);
      return peak + std::log(sum);
    };
  }
  if (!law.has_density()) throw PreconditionError("log_mgf: law needs atoms or a density");
  return [law](double t) {
    if (t == 0.0) return 0.0;
    const dist::Support sup = law.support();
    bool overflow = false;
    const auto integrand = [&](double x) {
      const double d = law.density(x).value_or(0.0);
      if (!(d > 0.0)) return 0.0;
      const double e = t * x + std::log(d);
      if (e > 700.0) {
        overflow = true;
        return 0.0;
      }
      return std::exp(e);
    };
    try {
      const double lo = std::isfinite(sup.lo) ? sup.lo : -kInf;
      const double hi = std::isfinite(sup.hi) ? sup.hi : kInf;
      const num::Integral total = num::integrate_split(integrand, lo, hi, {0.0}, 1e-10);
      if (overflow || !(total.value > 0.0)) return kInf;
      return std::log(total.value);
    } catch (const NumericalFailure&) {
      return kInf;
    }
  };
}

double orlicz_body_value(const OrliczSpec& spec, const Eigen::VectorXd& a) {
  if (static_cast<Eigen::Index>(spec.xi.size()) != a.size())
    throw PreconditionError("orlicz: one log-MGF per coordinate required");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) sum += spec.xi[i](spec.x_level * a[i]);
  return sum / spec.x_level;
}

double orlicz_quantile(const OrliczSpec& spec, const Eigen::VectorXd& a) {
  if (!(spec.x_level > 0.0)) throw PreconditionError("orlicz_quantile: x_level must be positive");
  if (static_cast<Eigen::Index>(spec.xi.size()) != a.size())
    throw PreconditionError("orlicz_quantile: one log-MGF per coordinate required");
  if (a.size() == 0 || a.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  const auto gauge = [&](double y) {
    Eigen::VectorXd scaled = a / y;
    return orlicz_body_value(spec, scaled);
  };
  // gauge is nonincreasing in y; an infinite value counts as outside the body.
  const auto inside = [&](double y) {
    const double g = gauge(y);
    return std::isfinite(g) && g <= 1.0;
  };
  double hi = a.cwiseAbs().maxCoeff();
  int steps = 0;
  while (!inside(hi)) {
    hi *= 2.0;
    if (++steps > 2000) {
      std::ostringstream os;
      os << "orlicz_quantile: no y up to " << hi << " places a inside the body";
      throw NumericalFailure(os.str());
    }
  }
  double lo = hi;
  steps = 0;
  while (lo > 0.0 && inside(lo)) {
    lo *= 0.5;
    if (++steps > 2000) return 0.0;
  }
  return num::bisect_predicate(inside, lo, hi);
}

namespace {

// E (|1 + X/t|^p + |1 - X/t|^p)/2, infinite when the integral diverges.
double latala_moment(const dist::Distribution1D& law, double p, double t) {
  const auto h = [&](double x) {
    return 0.5 * (std::pow(std::abs(1.0 + x / t), p) + std::pow(std::abs(1.0 - x / t), p));
  };
  if (law.discrete()) {
    double sum = 0.0;
    for (const auto& [x, w] : law.atoms()) sum += w * h(x);
    return sum;
  }
  if (!law.has_density()) throw PreconditionError("latala_functional: law needs atoms or density");
  // h and the density are even, so integrate over [0, inf) and double.
  const double hi = law.support().hi;
  const auto integrand = [&](double x) {
    const double d = law.density(x).value_or(0.0);
    return d > 0.0 ? h(x) * d : 0.0;
  };
  try {
    if (std::isfinite(hi)) return 2.0 * num::integrate_split(integrand, 0.0, hi, {t}, 1e-10).value;
    const double cut = std::max(2.0 * t, law.quantile_upper(1e-4));
    double value = num::integrate_split(integrand, 0.0, cut, {t}, 1e-10).value;
    // x = cut / u maps the tail onto (0, 1]; an endpoint blow-up signals divergence.
    value += num::integrate_singular(
                 [&](double u) {
                   const double x = cut / u;
                   const double g = std::isfinite(x) ? integrand(x) : 0.0;
                   return g > 0.0 ? g * (x / u) : 0.0;
                 }, 0.0,
                 1.0, 1e-10)
                 .value;
    return std::isfinite(value) ? 2.0 * value : kInf;
  } catch (const NumericalFailure&) {
    return kInf;
  }
}

}  // namespace

LatalaResult latala_functional(const std::vector<dist::Distribution1D>& laws, double p) {
  if (!(p >= 2.0)) throw PreconditionError("latala_functional: p must be at least 2");
  for (const auto& law : laws)
    if (!law.symmetric()) throw PreconditionError("latala_functional: laws must be symmetric");
  const auto excess = [&](double t) {
    double sum = 0.0;
    for (const auto& law : laws) {
      const double m = latala_moment(law, p, t);
      if (!std::isfinite(m)) return kInf;
      sum += std::log(m);
    }
    return sum - p;
  };
  const auto admissible = [&](double t) { return excess(t) <= 0.0; };
  double hi = 1.0;
  int steps = 0;
  while (!admissible(hi)) {
    hi *= 2.0;
    if (!std::isfinite(excess(hi)) || ++steps > 1100) return {kInf, false};
  }
  double lo = hi;
  steps = 0;
  while (admissible(lo)) {
    lo *= 0.5;
    if (++steps > 1100) return {0.0, true};
  }
  return {num::bisect_predicate(admissible, lo, hi), true};
}

double discrete_sum_moment(const std::vector<dist::Distribution1D>& laws, double p) {
  std::vector<std::vector<std::pair<double, double>>> atoms;
  double outcomes = 1.0;
  for (const auto& law : laws) {
    if (!law.discrete()) throw PreconditionError("discrete_sum_moment: laws must be finite");
    atoms.push_back(law.atoms());
    outcomes *= static_cast<double>(atoms.back().size());
  }
  if (outcomes > 1e8) throw PreconditionError("discrete_sum_moment: too many joint outcomes");
  double total = 0.0;
  const auto walk = [&](auto&& self, std::size_t i, double sum, double weight) -> void {
    if (i == atoms.size()) {
      total += weight * std::pow(std::abs(sum), p);
      return;
    }
    for (const auto& [x, w] : atoms[i]) self(self, i + 1, sum + x, weight * w);
  };
  walk(walk, 0, 0.0, 1.0);
  return total;
}

stats::MeanEstimate poisson_hull_functional(const VectorSampler& sampler, int dim,
                                            const Eigen::VectorXd& a, double delta, long m,
                                            std::uint64_t seed) {
  if (!(delta > 0.0 && delta < 0.5)) throw PreconditionError("poisson_hull: delta in (0, 1/2)");
  if (m < 2) throw PreconditionError("poisson_hull: need at least two trials");
  if (a.size() != dim) throw PreconditionError("poisson_hull: a has the wrong dimension");
  std::vector<double> maxima(static_cast<std::size_t>(m), 0.0);
  if (a.cwiseAbs().maxCoeff() > 0.0) {
    parallel_for(maxima.size(), [&](std::size_t trial) {
      Rng rng(seed, trial);
      const std::uint64_t count = rng.poisson(1.0 / delta);
      Eigen::VectorXd draw(dim);
      double best = 0.0;
      for (std::uint64_t j = 0; j < count; ++j) {
        sampler(rng, draw);
        best = std::max(best, a.dot(draw));
      }
      maxima[trial] = best;
    });
  }
  return stats::mean_se(maxima);
}

double euclidean(const Eigen::VectorXd& x, const Eigen::VectorXd& y) { return (x - y).norm(); }

double lipschitz_constant(const std::vector<Eigen::VectorXd>& points,
                          const std::vector<double>& values, const Metric& metric) {
  if (points.size() != values.size()) throw PreconditionError("lipschitz: size mismatch");
  double lip = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double d = metric(points[i], points[j]);
      if (d > 0.0) lip = std::max(lip, std::abs(values[i] - values[j]) / d);
    }
  return lip;
}

double lipschitz_extension_eval(const std::vector<Eigen::VectorXd>& points,
                                const std::vector<double>& values, const Eigen::VectorXd& x,
                                const Metric& metric, double lip) {
  if (points.empty()) throw PreconditionError("lipschitz_extension_eval: empty point set");
  if (points.size() != values.size()) throw PreconditionError("lipschitz: size mismatch");
  const double constant = lip >= 0.0 ? lip : lipschitz_constant(points, values, metric);
  double best = kInf;
  for (std::size_t i = 0; i < points.size(); ++i)
    best = std::min(best, values[i] + constant * metric(x, points[i]));
  return best;
}

}  // namespace conclab::func
