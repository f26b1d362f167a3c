#include "conclab/tail_opt.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "conclab/format.hpp"
#include "conclab/numerics.hpp"

namespace conclab::tail {

using num::kInf;

namespace {

// Integral of the survival function over [u, sup support).
double survival_integral(const dist::Distribution1D& law, double u) {
  const dist::Support sup = law.support();
  const double lo = std::max(u, sup.lo);
  double total = 0.0;
  if (u < sup.lo) total += sup.lo - u;  // survival is 1 below the support
  if (lo >= sup.hi) return total;
  auto s = [&](double x) { return law.sf(x); };
  if (std::isfinite(sup.hi)) return total + num::integrate(s, lo, sup.hi).value;
  // Split so the mapped infinite piece starts where the tail is small.
  const double mid = std::max(lo, law.quantile_upper(1e-6));
  if (mid > lo) total += num::integrate(s, lo, mid).value;
  return total + num::integrate(s, mid, kInf).value;
}

}  // namespace

double law_mean(const dist::Distribution1D& law) {
  if (auto m = law.mean()) return *m;
  const dist::Support sup = law.support();
  double pos = 0.0, neg = 0.0;
  if (sup.hi > 0.0) pos = survival_integral(law, std::max(0.0, sup.lo));
  if (sup.lo < 0.0) {
    auto c = [&](double x) { return law.cdf(x); };
    neg = num::integrate(c, sup.lo, std::min(0.0, sup.hi)).value;
  }
  return pos - neg;
}

double hinge_expectation(const dist::Distribution1D& law, double t, double a) {
  if (!(a > 0.0)) throw PreconditionError("hinge_expectation: slope must be positive");
  return a * survival_integral(law, t - 1.0 / a);
}

ConvexWitness optimal_markov(const dist::Distribution1D& law, double t) {
  const double mean = law_mean(law);
  if (!(t > mean)) {
    std::ostringstream os;
    os << "optimal_markov: threshold " << t << " must exceed the mean " << mean;
    throw PreconditionError(os.str());
  }
  const double top = law.support().hi;
  if (t >= top) {
    // Any slope with t - 1/a >= sup support gives bound 0; report the smallest.
    const double c = t - top;
    return {t, c > 0.0 ? 1.0 / c : kInf, 0.0};
  }
  // Stationarity in c = 1/a: zeta(c) = int_{t-c}^inf (x - t) dmu, decreasing in c.
  auto zeta = [&](double c) { return survival_integral(law, t - c) - c * law.sf(t - c); };
  double lo = 0.0, hi = 1.0;
  int expansions = 0;
  while (zeta(hi) >= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++expansions > 200) {
      std::ostringstream os;
      os << "optimal_markov: no sign change of the stationarity integral up to 1/a = " << hi;
      throw NumericalFailure(os.str());
    }
  }
  // Largest c with zeta(c) >= 0, i.e. the smallest admissible slope.
  const double c = num::bisect_predicate([&](double x) { return zeta(x) < 0.0; }, lo, hi, 400,
                                         1e-12 * std::max(1.0, hi));
  return {t, 1.0 / c, law.sf(t - c)};
}

RegularityConstants regularity_constants(double p, double b) {
  if (!(p > 2.0)) throw PreconditionError("regularity_constants: need p > 2");
  if (b == 0.0 || b < -1.0 / p * (1.0 + 1e-12))
    throw PreconditionError("regularity_constants: need b >= -1/p and b != 0");
  // Two comparison profiles: polynomial (1 + x/p)^{-p} on (-p, inf) and
  // (1 - b x)^{1/b} on its interval I.
  auto poly = [p](double x) { return std::pow(1.0 + x / p, -p); };
  auto expo = [b](double x) { return std::pow(1.0 - b * x, 1.0 / b); };
  const double iminus_lo = b > 0.0 ? -kInf : 1.0 / b;

  auto integ = [](auto f, double lo, double hi) {
    return num::integrate(f, lo, hi, 1e-13).value;
  };
  // Moments over (0, inf) of (1 + x/k)^{-k}, computed in v = (1 + x/k)^{-1} so
  // the slowly decaying polynomial tail becomes a finite-range integrand.
  auto singular = [](auto f) { return num::integrate_singular(f, 0.0, 1.0, 1e-13).value; };
  auto power_profile = [&](double k, int order) {
    if (order == 0) return singular([k](double v) { return k * std::pow(v, k - 2.0); });
    return singular([k](double v) { return k * k * (1.0 - v) * std::pow(v, k - 3.0); });
  };
  const double poly_first = power_profile(p, 1);
  const double poly_mass = power_profile(p, 0);
  double expo_first, expo_mass;
  if (b > 0.0) {
    // u = 1 - b x maps I+ onto (0, 1).
    const double r = 1.0 / b;
    expo_first = singular([r](double u) { return (1.0 - u) * std::pow(u, r); }) / (b * b);
    expo_mass = singular([r](double u) { return std::pow(u, r); }) / b;
  } else {
    expo_first = power_profile(-1.0 / b, 1);
    expo_mass = power_profile(-1.0 / b, 0);
  }

  // Solve int_{-c}^0 -x f(x) dx = target for c, the integrand blowing up at
  // the left end of the domain (or the integral diverging at -inf).
  auto solve_left = [&](auto f, double domain_lo, double target) {
    auto lhs = [&](double c) { return integ([&](double x) { return -x * f(x); }, -c, 0.0); };
    double lo = 0.0, hi;
    if (std::isfinite(domain_lo)) {
      const double end = -domain_lo;
      double gap = 0.5 * end;
      hi = end - gap;
      while (lhs(hi) < target) {
        lo = hi;
        gap *= 0.5;
        hi = end - gap;
        if (gap < 1e-14 * end) throw NumericalFailure("regularity_constants: bracket failure");
      }
    } else {
      hi = 1.0;
      while (lhs(hi) < target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) throw NumericalFailure("regularity_constants: bracket failure");
      }
    }
    return num::bisect_root([&](double c) { return lhs(c) - target; }, lo, hi, 1e-14);
  };

  RegularityConstants rc;
  rc.p = p;
  rc.b = b;
  const double c_a = solve_left(expo, iminus_lo, poly_first);
  const double c_ahat = solve_left(poly, -p, expo_first);
  rc.a_pb = 1.0 / c_a;
  rc.a_hat_pb = 1.0 / c_ahat;
  // Ratios P{Y > t - c}/P{Y > t} = 1 + P{t - c < Y <= t}/P{Y > t}, each piece
  // compared with the profile that dominates it.
  rc.R_sharp = c_a < p ? 1.0 + integ(poly, -c_a, 0.0) / expo_mass : kInf;
  rc.R_flat = 1.0 + integ(expo, -c_ahat, 0.0) / poly_mass;
  return rc;
}

GradientQuantileMap constant_xi(double L) {
  return {[L](double) { return L; }, [](double) { return 0.0; }};
}

double eta_inverse(const GradientQuantileMap& xi, double y) {
  if (y <= 0.0) return 0.0;
  auto s = [&](double v) { return 0.5 * num::kPi * v * xi.xi(v); };
  double hi = 1.0;
  while (s(hi) < y) {
    hi *= 2.0;
    if (hi > 1e300) throw NumericalFailure("eta_inverse: xi too small to invert");
  }
  return num::bisect_root([&](double v) { return s(v) - y; }, 0.0, hi, 0.0);
}

namespace {

double eta_prime(const GradientQuantileMap& xi, double eta) {
  double dxi;
  if (xi.xi_prime) {
    dxi = xi.xi_prime(eta);
  } else {
    const double h = 1e-6 * std::max(1.0, eta);
    dxi = (xi.xi(eta + h) - xi.xi(std::max(0.0, eta - h))) / (eta + h - std::max(0.0, eta - h));
  }
  return 1.0 / (0.5 * num::kPi * (xi.xi(eta) + eta * dxi));
}

}  // namespace

double envelope_log_density(double A, const GradientQuantileMap& xi, double x) {
  const double e = eta_inverse(xi, x);
  return -std::log(A + 0.5) - std::log(e) - std::log(eta_prime(xi, e)) + 0.5 * e * e;
}

GradientTailResult tail_from_gradient(double A, const GradientQuantileMap& xi, double p, double b,
                                      double T0, double t) {
  if (!(A > 0.0)) throw PreconditionError("tail_from_gradient: need A > 0");
  if (!(T0 > 0.0)) throw PreconditionError("tail_from_gradient: need T0 > 0");
  GradientTailResult out;
  out.constants = regularity_constants(p, b);

  auto g = [&](double x) { return envelope_log_density(A, xi, x); };
  auto derivs = [&](double x) {
    const double h = 1e-4 * std::max(1.0, std::abs(x));
    const double gp = g(x + h), g0 = g(x), gm = g(x - h);
    return std::pair{(gp - gm) / (2.0 * h), (gp - 2.0 * g0 + gm) / (h * h)};
  };

  if (!(t > T0)) throw PreconditionError("tail_from_gradient: need t > T0");
  const double eta_T0 = eta_inverse(xi, T0);
  if (!((A + 0.5) * std::exp(-0.5 * eta_T0 * eta_T0) < 0.5))
    throw PreconditionError("tail_from_gradient: need (A + 1/2) exp(-eta(T0)^2/2) < 1/2");

  // E W <= int_0^inf P{W >= s} ds since W contributes nothing positive below 0.
  try {
    auto tailw = [&](double s) {
      const double e = eta_inverse(xi, s);
      return std::min(0.5, (A + 0.5) * std::exp(-0.5 * e * e));
    };
    // The min switches branches where eta reaches sqrt(2 log(2A + 1)).
    const double eta_kink = std::sqrt(2.0 * std::log(2.0 * A + 1.0));
    const double kink = 0.5 * num::kPi * eta_kink * xi.xi(eta_kink);
    out.mean_upper = 0.5 * kink + num::integrate(tailw, kink, kInf, 1e-10).value;
  } catch (const NumericalFailure& e) {
    throw PreconditionError(std::string("tail_from_gradient: E W unverifiable: ") + e.what());
  }
  if (!(t > std::max(out.mean_upper, T0))) {
    std::ostringstream os;
    os << "tail_from_gradient: t = " << t << " must exceed max{E W, T0} = "
       << std::max(out.mean_upper, T0);
    throw PreconditionError(os.str());
  }
  const auto [gpt, gppt] = derivs(t);
  (void)gppt;
  out.g_prime_t = gpt;
  if (!(gpt > 0.0) || t - out.constants.a_hat_pb / gpt < T0) {
    std::ostringstream os;
    os << "tail_from_gradient: need t - a_hat/g'(t) >= T0, got " << t - out.constants.a_hat_pb / gpt;
    throw PreconditionError(os.str());
  }

  // Differential condition on a grid; slack 1e-3 on both sides.
  const double lower = -1.0 / p - 1e-3;
  const double upper = b + 1e-3;
  const double grid_hi = std::max(2.0 * t, T0 + 10.0);
  const int points = 400;
  for (int i = 0; i <= points; ++i) {
    const double x = T0 + (grid_hi - T0) * i / points;
    const auto [d1, d2] = derivs(x);
    const double ratio = d2 / (d1 * d1);
    if (!(ratio >= lower && ratio <= upper)) {
      DifferentialRefusal r;
      r.x = x;
      r.ratio = ratio;
      r.lower = -1.0 / p;
      r.upper = b;
      std::ostringstream os;
      os << "g''/g'^2 = " << ratio << " at x = " << x << " outside [" << -1.0 / p << ", " << b
         << "]";
      r.message = os.str();
      out.refusal = r;
      return out;
    }
  }
  out.eta_t = eta_inverse(xi, t);
  out.bound = 4.0 * (A + 0.5) * out.constants.R_sharp * std::exp(-0.5 * out.eta_t * out.eta_t);
  return out;
}

dist::Distribution1D power_exponential_surrogate(double power) {
  if (!(power > 0.0)) throw PreconditionError("surrogate: power must be positive");
  return dist::tail_surrogate([power](double t) { return std::exp(-std::pow(t, power)); },
                              "exp_power:p=" + format_double(power));
}

}  // namespace conclab::tail
