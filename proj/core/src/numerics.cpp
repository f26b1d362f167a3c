#include "conclab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace conclab::num {

namespace {
constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
}  // namespace

double normal_pdf(double t) { return std::exp(log_normal_pdf(t)); }

double log_normal_pdf(double t) { return -0.5 * t * t - kLogSqrt2Pi; }

double normal_cdf(double t) { return 0.5 * std::erfc(-t / kSqrt2); }

double normal_sf(double t) { return 0.5 * std::erfc(t / kSqrt2); }

double log_normal_sf(double t) {
  if (t < 30.0) return std::log(normal_sf(t));
  // Asymptotic series of the Mills ratio; four terms are exact to double
  // precision once t >= 30.
  const double r = 1.0 / (t * t);
  const double series = 1.0 - r + 3.0 * r * r - 15.0 * r * r * r + 105.0 * r * r * r * r;
  return -0.5 * t * t - std::log(t) - kLogSqrt2Pi + std::log(series);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -kInf;
    if (p == 1.0) return kInf;
    throw PreconditionError("normal_quantile: probability outside [0,1]");
  }
  if (p > 0.5) return normal_quantile_upper(1.0 - p);
  return -kSqrt2 * boost::math::erfc_inv(2.0 * p);
}

double normal_quantile_upper(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    if (q == 0.0) return kInf;
    if (q == 1.0) return -kInf;
    throw PreconditionError("normal_quantile_upper: probability outside [0,1]");
  }
  return kSqrt2 * boost::math::erfc_inv(2.0 * q);
}

double lgamma(double x) { return boost::math::lgamma(x); }

double tgamma(double x) { return boost::math::tgamma(x); }

double gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(a, x);
}

double gamma_q_inv(double a, double q) {
  if (q >= 1.0) return 0.0;
  if (q <= 0.0) return kInf;
  return boost::math::gamma_q_inv(a, q);
}

double gaussian_abs_moment(double u) {
  if (!(u > -1.0)) throw PreconditionError("gaussian_abs_moment: need u > -1");
  return std::exp(0.5 * u * std::log(2.0) + lgamma(0.5 * (u + 1.0)) - 0.5 * std::log(kPi));
}

double pow0(double x, double p) {
  if (p == 0.0) return 1.0;
  return std::pow(x, p);
}

Integral integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                   double abs_tol) {
  if (a == b) return {};
  if (a > b) {
    Integral r = integrate(f, b, a, rel_tol, abs_tol);
    r.value = -r.value;
    return r;
  }
  double err = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, 18, rel_tol, &err, &l1);
  if (!std::isfinite(value)) {
    std::ostringstream os;
    os << "integrate: non-finite value on [" << a << ", " << b << "]";
    throw NumericalFailure(os.str());
  }
  const double budget = std::max(abs_tol, rel_tol * std::max(std::abs(value), l1 * 1e-3));
  if (err > 1e3 * budget && err > 1e-9 * std::max(1.0, l1)) {
    std::ostringstream os;
    os << "integrate: error estimate " << err << " exceeds budget on [" << a << ", " << b << "]";
    throw NumericalFailure(os.str());
  }
  return {value, err};
}

Integral integrate_singular(const std::function<double(double)>& f, double a, double b,
                            double rel_tol) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
    throw PreconditionError("integrate_singular: need a finite interval a < b");
  thread_local boost::math::quadrature::tanh_sinh<double> rule;
  double err = 0.0;
  double l1 = 0.0;
  double value = 0.0;
  try {
    value = rule.integrate([&f](double x) { return f(x); }, a, b, rel_tol, &err, &l1);
  } catch (const std::domain_error& e) {
    throw NumericalFailure(std::string("integrate_singular: ") + e.what());
  }
  if (!std::isfinite(value) || err > 1e3 * rel_tol * std::max(std::abs(value), 1e-3 * l1)) {
    std::ostringstream os;
    os << "integrate_singular: error estimate " << err << " exceeds budget on [" << a << ", " << b
       << "]";
    throw NumericalFailure(os.str());
  }
  return {value, err};
}

Integral integrate_split(const std::function<double(double)>& f, double a, double b,
                         std::initializer_list<double> cuts, double rel_tol) {
  std::vector<double> pts{a};
  for (double c : cuts)
    if (c > a && c < b) pts.push_back(c);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  Integral total;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Integral piece = integrate(f, pts[i], pts[i + 1], rel_tol);
    total.value += piece.value;
    total.error += piece.error;
  }
  return total;
}

double bisect_predicate(const std::function<bool(double)>& pred, double lo, double hi, int max_iter,
                        double width) {
  for (int i = 0; i < max_iter; ++i) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (pred(mid))
      hi = mid;
    else
      lo = mid;
    if (width > 0.0 && hi - lo <= width) break;
  }
  return hi;
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi, double width,
                   int max_iter) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    std::ostringstream os;
    os << "bisect_root: no sign change on [" << lo << ", " << hi << "] (f=" << flo << ", " << fhi
       << ")";
    throw NumericalFailure(os.str());
  }
  for (int i = 0; i < max_iter && hi - lo > width; ++i) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

}  // namespace conclab::num
