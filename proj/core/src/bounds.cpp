#include "conclab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "conclab/format.hpp"
#include "conclab/functionals.hpp"
#include "conclab/numerics.hpp"

namespace conclab::bounds {

using num::kInf;

double TailBoundCurve::operator()(double t) const { return std::min(2.0, raw(t)); }

bool TailBoundCurve::nonincreasing_on(const std::vector<double>& grid) const {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if ((*this)(grid[i]) > (*this)(grid[i - 1])) return false;
  return true;
}

std::string to_csv(const TailBoundCurve& curve, const std::vector<double>& grid) {
  std::ostringstream os;
  os << "t,bound,source,calib-id\n";
  for (double t : grid)
    os << format_double(t) << ',' << format_double(curve(t)) << ',' << curve.source << ','
       << curve.calib_id << '\n';
  return os.str();
}

TailBoundCurve threshold_curve(std::string source, std::map<std::string, double> params,
                               std::string calib_id, std::function<double(double)> threshold,
                               double scale) {
  TailBoundCurve curve{std::move(source), std::move(params), std::move(calib_id), {}};
  curve.raw = [threshold = std::move(threshold), scale](double s) {
    if (!(s > threshold(0.0))) return scale;
    double hi = 1.0;
    while (threshold(hi) <= s) {
      hi *= 2.0;
      if (hi > 1e6) return 0.0;
    }
    const double t =
        num::bisect_predicate([&](double x) { return threshold(x) > s; }, 0.0, hi, 200, 0.0);
    return scale * std::exp(-0.5 * t * t);
  };
  return curve;
}

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw PreconditionError(message);
}

// |a|_r for the conjugate exponent r = q/(q-1), infinite at q = 1.
double conjugate_norm(const Eigen::VectorXd& a, double q) {
  if (q <= 1.0) return func::lp_functional(a, kInf);
  return func::lp_functional(a, q / (q - 1.0));
}

double ratio_power(double t, double scale, double power) {
  if (scale == 0.0) return kInf;  // 1/0 = inf
  return std::pow(t / scale, power);
}

}  // namespace

double weibull_linear_bound(double q, const Eigen::VectorXd& a, double t,
                            const CalibrationSet& calib) {
  require(q > 0.0, "weibull_linear_bound: q must be positive");
  require(t >= 0.0, "weibull_linear_bound: t must be nonnegative");
  require(a.size() > 0 && a.cwiseAbs().maxCoeff() > 0.0, "weibull_linear_bound: a must be nonzero");
  const double c = calib.get("weibull_linear.c_q");
  const double gaussian = ratio_power(t, a.norm(), 2.0);
  const double heavy = ratio_power(t, conjugate_norm(a, q), q);
  const double exponent = q > 2.0 ? std::max(gaussian, heavy) : std::min(gaussian, heavy);
  return std::min(2.0, 2.0 * std::exp(-c * exponent));
}

TailBoundCurve weibull_linear_curve(double q, const Eigen::VectorXd& a,
                                    const CalibrationSet& calib) {
  TailBoundCurve curve;
  curve.source = "weibull_linear";
  curve.params = {{"q", q}, {"n", double(a.size())}, {"a_2", a.norm()}};
  curve.calib_id = calib.id();
  curve.raw = [q, a, calib](double t) { return weibull_linear_bound(q, a, t, calib); };
  return curve;
}

NonlinearWeibull weibull_nonlinear_bound(double q, double lip2_sharp, double lipinf_sharp,
                                         double lip2, double lipinf, double n, double t,
                                         const CalibrationSet& calib) {
  require(q > 0.0 && q < 1.0, "weibull_nonlinear_bound: need 0 < q < 1");
  require(lip2_sharp > 0.0 && lipinf_sharp > 0.0 && lip2 > 0.0 && lipinf > 0.0,
          "weibull_nonlinear_bound: Lipschitz constants must be positive");
  require(n >= 1.0 && t > 0.0, "weibull_nonlinear_bound: need n >= 1 and t > 0");
  NonlinearWeibull out;
  const double c = calib.get("weibull_nonlinear.c_q");
  const double exponent = std::min(std::pow(t / lip2_sharp, 2.0), std::pow(t / lipinf_sharp, q));
  out.probability = std::min(2.0, 2.0 * std::exp(-c * exponent));
  double log_arg = n / std::pow(t, -2.0 + 4.0 / q);
  if (!(log_arg >= num::kE)) {
    log_arg = num::kE;
    out.log_clipped = true;
  }
  const double growth = 1.0 + std::pow(std::log(log_arg), 1.0 / q - 0.5);
  out.threshold = calib.get("weibull_nonlinear.C_q") * growth *
                  (t * lip2 + std::pow(t, 2.0 / q) * lipinf);
  return out;
}

PolyNonlinear poly_nonlinear_bound(double q, double p, const Eigen::VectorXd& grad_sups, double n,
                                   double t, const CalibrationSet& calib, double lip_p) {
  require(q > 2.0 && std::isfinite(q), "poly_nonlinear_bound: need 2 < q < inf");
  require(p > 2.0 * q / (q - 2.0) && std::isfinite(p), "poly_nonlinear_bound: need 2q/(q-2) < p < inf");
  require(t >= 0.0 && n >= 1.0, "poly_nonlinear_bound: need t >= 0 and n >= 1");
  require(grad_sups.size() > 0, "poly_nonlinear_bound: empty gradient bound");
  PolyNonlinear out;
  out.r = std::max(1.0, calib.get("poly_nonlinear.C_r") * t * t * std::exp(t * t / q));
  const Eigen::VectorXd squares = grad_sups.array().square();
  out.threshold_lorentz =
      calib.get("poly_nonlinear.C_q") * t * std::sqrt(func::lorentz_norm(squares, out.r, q / 2.0));
  const double lip = lip_p >= 0.0 ? lip_p : func::lp_functional(grad_sups, p);
  out.threshold_lp = calib.get("poly_nonlinear.C_pq") * lip *
                     (std::pow(n, 0.5 - 1.0 / p) * t + std::pow(n, 1.0 / q) * t * std::exp(t * t / (2.0 * q)));
  out.probability = std::min(2.0, calib.get("poly_nonlinear.C") * std::exp(-0.5 * t * t));
  return out;
}

double lpn_gauss_mean(double n, double p) {
  return n * std::exp(0.5 * p * std::log(2.0) + num::lgamma(0.5 * (p + 1.0)) - 0.5 * std::log(num::kPi));
}

double lpn_gauss_bound(double n, double p, double t, const CalibrationSet& calib) {
  require(n >= 1.0 && p > 0.0 && t >= 0.0, "lpn_gauss_bound: need n >= 1, p > 0, t >= 0");
  const double c = calib.get("lpn_gauss.C");
  const double root_n = std::sqrt(n);
  if (p <= 1.0) return c * root_n * t;
  if (p <= 1.5) return c * root_n * t + c * std::pow(n, 0.25) * std::pow(t, 1.5);
  if (p <= 2.0) return c * root_n * t + c * std::pow(n, 1.0 - 0.5 * p) * std::pow(t, p);
  const double spread = std::sqrt(num::gaussian_abs_moment(2.0 * (p - 1.0)));
  return c * std::pow(2.0, p) * std::max(spread * root_n * t, std::pow(t, p));
}

TailBoundCurve lpn_gauss_curve(double n, double p, const CalibrationSet& calib) {
  return threshold_curve("lpn_gauss", {{"n", n}, {"p", p}}, calib.id(),
                         [n, p, calib](double t) { return lpn_gauss_bound(n, p, t, calib); },
                         calib.get("lpn_gauss.C_prob"));
}

double lpn_gauss_rel_bound(double n, double p, double eps, const CalibrationSet& calib) {
  require(n >= 1.0 && p >= 1.0, "lpn_gauss_rel_bound: need n >= 1 and p >= 1");
  require(eps > 0.0 && eps < 1.0, "lpn_gauss_rel_bound: eps must lie in (0, 1)");
  const double big_c = calib.get("lpn_rel.C");
  const double c = calib.get("lpn_rel.c");
  double value;
  if (p <= 2.0) {
    value = big_c * std::exp(-c * n * eps * eps);
  } else if (p < calib.get("lpn_rel.c_log") * std::log(n)) {
    const double moderate = p * std::pow(8.0, -p) * n * eps * eps;
    const double large = p * std::pow(n, 2.0 / p) * std::pow(eps, 2.0 / p);
    value = big_c * std::exp(-c * std::min(moderate, large));
  } else {
    value = big_c * std::pow(n, -c * eps);
  }
  return std::min(2.0, value);
}

double lp_on_lq_ball_bound(double n, double p, double q, double s, const CalibrationSet& calib) {
  require(n >= 1.0 && p > 0.0 && q > 0.0, "lp_on_lq_ball_bound: need n >= 1 and p, q > 0");
  const double s_max = std::pow(n, 1.0 / p - 1.0 / q);
  if (!(s >= 0.0 && s <= s_max * (1.0 + 1e-12))) {
    std::ostringstream os;
    os << "lp_on_lq_ball_bound: s must lie in [0, " << s_max << "]";
    throw PreconditionError(os.str());
  }
  const double c = calib.get("lp_ball.c_q");
  const double scale = std::pow(n, -2.0 / p + 2.0 / q + 1.0);
  double exponent;
  if (p <= q) {
    exponent = std::pow(c, 1.0 / p) * scale * s * s;
  } else {
    const double quadratic = std::pow(c, p) * std::pow(p, -2.0 * p / q) * scale * s * s;
    const double heavy = c * std::pow(n, (p - q + p * q) / (p * p)) * std::pow(s, q / p);
    exponent = std::min(quadratic, heavy);
  }
  return std::min(2.0, 2.0 * std::exp(-exponent));
}

TailBoundCurve lp_on_lq_ball_curve(double n, double p, double q, const CalibrationSet& calib) {
  TailBoundCurve curve;
  curve.source = "lp_on_lq_ball";
  curve.params = {{"n", n}, {"p", p}, {"q", q}};
  curve.calib_id = calib.id();
  const double s_max = std::pow(n, 1.0 / p - 1.0 / q);
  // Past the stated range the bound at its end still applies, since the tail is nonincreasing.
  curve.raw = [=](double s) { return lp_on_lq_ball_bound(n, p, q, std::min(s, s_max), calib); };
  return curve;
}

BerryEsseen berry_esseen_bound(const Eigen::VectorXd& a, const std::vector<double>& third_moments,
                               double r, double r_moment, double n, double x,
                               const CalibrationSet& calib) {
  require(static_cast<Eigen::Index>(third_moments.size()) == a.size() && a.size() > 0,
          "berry_esseen_bound: one third moment per coefficient");
  require(r >= 3.0 && n >= 1.0, "berry_esseen_bound: need r >= 3 and n >= 1");
  BerryEsseen out;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    out.uniform += std::pow(std::abs(a[i]), 3.0) * third_moments[i];
  out.uniform *= calib.get("berry_esseen.C");
  out.nonuniform = calib.get("berry_esseen.C_r") * std::pow(1.0 + std::abs(x), -r) *
                   (third_moments.front() / std::sqrt(n) + std::pow(n, -(r - 2.0) / 2.0) * r_moment);
  return out;
}

double berry_esseen_reach(double r, double n, double third_moment, double r_moment,
                          const CalibrationSet& calib) {
  require(r >= 3.0 && n >= 1.0, "berry_esseen_reach: need r >= 3 and n >= 1");
  const double log_level =
      std::log(calib.get("berry_esseen.C_r") *
               (third_moment / std::sqrt(n) + std::pow(n, -(r - 2.0) / 2.0) * r_moment));
  const auto gap = [&](double x) {
    return log_level - r * std::log1p(x) - num::log_normal_sf(x);
  };
  if (gap(0.0) > 0.0) return 0.0;
  double hi = 1.0;
  while (gap(hi) <= 0.0) hi *= 2.0;
  return num::bisect_root(gap, 0.0, hi, 1e-12);
}

std::pair<double, double> cusp_split(double p, double t) {
  require(p > 0.0, "cusp_split: p must be positive");
  const double power = std::pow(std::abs(t), p);
  if (p >= 1.0 || std::abs(t) >= 1.0) return {power, 0.0};
  const double cap = 0.5 * p * t * t + 1.0 - 0.5 * p;
  return {cap, power - cap};
}

}  // namespace conclab::bounds
