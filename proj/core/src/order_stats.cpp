#include "conclab/order_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "conclab/numerics.hpp"
#include "conclab/parallel.hpp"
#include "conclab/rng.hpp"

namespace conclab::order {

namespace {

// Bisect an increasing f for f(x) = target until the ends are adjacent.
// Returns the end on the requested side of the crossing.
template <class F>
double bisect_increasing(F f, double target, double lo, double hi, bool want_hi) {
  for (int i = 0; i < 4000; ++i) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) < target) lo = mid;
    else hi = mid;
  }
  return want_hi ? hi : lo;
}

// t - log(1 + t), with a series where the difference cancels.
double shifted_log(double t) {
  if (t < 1e-2) {
    double term = t, sum = 0.0;
    for (int j = 2; j < 12; ++j) {
      term *= -t;
      sum += -term / j;  // t^j terms of t - log1p(t), signs (-1)^j / j
    }
    return sum;
  }
  return t - std::log1p(t);
}

void require_n_k(int n, int k) {
  if (n < 1 || k < 1 || k > n) {
    std::ostringstream os;
    os << "order statistics: need 1 <= k <= n, got n=" << n << " k=" << k;
    throw PreconditionError(os.str());
  }
}

}  // namespace

double xi1(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw PreconditionError("xi1: argument outside [0, 1]");
  return std::exp(t) * (1.0 - t);
}

double xi2(double t) {
  if (!(t >= 0.0)) throw PreconditionError("xi2: argument must be nonnegative");
  return std::exp(-t) * (1.0 + t);
}

double xi1_inverse_complement_log(double log_y) {
  if (!(log_y <= 0.0)) throw PreconditionError("xi1 inverse: need y <= 1");
  if (log_y == 0.0) return 1.0;
  if (log_y == -num::kInf) return 0.0;
  // u = 1 - t solves log u + 1 - u = log y; in s = log u the root lies in
  // [log y - 1, min(0, log y)].
  auto f = [](double s) { return s - std::expm1(s); };
  const double s = bisect_increasing(f, log_y, log_y - 1.0, std::min(0.0, log_y), false);
  return std::exp(s);
}

double xi1_inverse_log(double log_y) {
  if (!(log_y <= 0.0)) throw PreconditionError("xi1 inverse: need y <= 1");
  if (log_y == 0.0) return 0.0;
  if (log_y == -num::kInf) return 1.0;
  auto f = [](double s) { return s - std::expm1(s); };
  const double s = bisect_increasing(f, log_y, log_y - 1.0, std::min(0.0, log_y), false);
  return -std::expm1(s);
}

double xi2_inverse_log(double log_y) {
  if (!(log_y <= 0.0) || log_y == -num::kInf)
    throw PreconditionError("xi2 inverse: need y in (0, 1]");
  if (log_y == 0.0) return 0.0;
  const double z = -log_y;
  double hi = std::max(1.0, 2.0 * z);
  while (shifted_log(hi) < z) hi *= 2.0;
  return bisect_increasing(shifted_log, z, 0.0, hi, true);
}

XiInverse xi_inverse(int which, double y) {
  XiInverse out;
  if (which == 1) {
    if (!(y >= 0.0 && y <= 1.0)) throw PreconditionError("xi1 inverse: y outside [0, 1]");
    out.value = xi1_inverse_log(std::log(y));
    out.analytic_upper = std::min(std::sqrt(2.0 * (1.0 - y)), 1.0 - y / num::kE);
    return out;
  }
  if (which == 2) {
    if (!(y > 0.0 && y <= 1.0)) throw PreconditionError("xi2 inverse: y outside (0, 1]");
    const double z = -std::log(y);
    out.value = xi2_inverse_log(std::log(y));
    out.analytic_upper = y <= 2.0 / num::kE ? z + std::log1p(4.0 * z)
                                            : std::sqrt(2.0 * z + 10.0 * std::pow(z, 1.5));
    return out;
  }
  throw PreconditionError("xi_inverse: which must be 1 or 2");
}

double top_order_bound(int n, int k, double t) {
  require_n_k(n, k);
  const double log_y = (-t * t - 4.0 * std::log(static_cast<double>(k))) / (2.0 * k);
  return std::min(1.0, k / (n + 1.0) * (1.0 + xi2_inverse_log(log_y)));
}

double bottom_order_bound(int n, int k, double t) {
  require_n_k(n, k);
  const double m = n - k + 1.0;
  const double log_y = (-t * t - 4.0 * std::log(m)) / (2.0 * m);
  return std::min(1.0, 1.0 - m / (n + 1.0) * xi1_inverse_complement_log(log_y));
}

double renyi_log_complement(int n, int k, double t, double c) {
  require_n_k(n, k);
  if (k == n) return -num::kInf;
  const double lk = std::log(static_cast<double>(k));
  const double gap = n - k + 1.0;
  const double spread = std::max((t + std::sqrt(lk)) * std::sqrt(k / (n * gap)), (t * t + lk) / gap);
  return std::log1p(-static_cast<double>(k) / n) - c * spread;
}

double renyi_bound(int n, int k, double t, double c) {
  return std::min(1.0, -std::expm1(renyi_log_complement(n, k, t, c)));
}

const char* to_string(EnvelopeSource s) {
  switch (s) {
    case EnvelopeSource::top: return "top";
    case EnvelopeSource::bottom: return "bottom";
    case EnvelopeSource::renyi: return "renyi";
  }
  return "?";
}

Envelope uniform_order_envelope(int n, double t, const CalibrationSet& calib, bool include_renyi) {
  if (n < 1) throw PreconditionError("uniform_order_envelope: need n >= 1");
  if (!(t >= 0.0)) throw PreconditionError("uniform_order_envelope: need t >= 0");
  const double c = calib.get("order_renyi.c");
  Envelope env;
  env.n = n;
  env.t = t;
  env.upper.resize(n);
  env.source.resize(n);
  env.top.resize(n);
  env.bottom.resize(n);
  env.renyi.resize(n);
  for (int k = 1; k <= n; ++k) {
    const int i = k - 1;
    env.top[i] = top_order_bound(n, k, t);
    env.bottom[i] = bottom_order_bound(n, k, t);
    env.renyi[i] = renyi_bound(n, k, t, c);
    env.upper[i] = env.top[i];
    env.source[i] = EnvelopeSource::top;
    if (env.bottom[i] < env.upper[i]) {
      env.upper[i] = env.bottom[i];
      env.source[i] = EnvelopeSource::bottom;
    }
    if (include_renyi && env.renyi[i] < env.upper[i]) {
      env.upper[i] = env.renyi[i];
      env.source[i] = EnvelopeSource::renyi;
    }
  }
  for (int i = n - 2; i >= 0; --i) {
    if (env.upper[i + 1] < env.upper[i]) {
      env.upper[i] = env.upper[i + 1];
      env.source[i] = env.source[i + 1];
    }
  }
  return env;
}

OrderSumBound order_sum_bound(const dist::Distribution1D& law, int n, int k, double lambda) {
  if (!(k >= 1 && 2.0 * k < n + 1.0)) throw PreconditionError("order_sum_bound: need 1 <= k < (n+1)/2");
  if (!(lambda >= 2.0)) throw PreconditionError("order_sum_bound: need lambda >= 2");
  if (law.support().lo < 0.0) throw PreconditionError("order_sum_bound: law must be nonnegative");
  OrderSumBound out;
  const double np1 = n + 1.0;
  const double l2 = lambda * lambda;
  out.median_index = (n + 1) / 2;
  out.median_term = law.quantile_upper(std::exp(-l2 / np1) / 12.0);
  out.top_term = law.quantile_upper(std::exp(-0.5 * l2) / (num::kE * np1));
  // The upper quantile is taken at 1 - s (1 - xi1^{-1}(...)) with the small
  // probability formed directly, so the argument never rounds to 1.
  auto integrand = [&](double s) {
    const double log_y = (-l2 - 4.0 * std::log(np1 * s)) / (2.0 * np1 * s);
    const double q = s * xi1_inverse_complement_log(log_y);
    return law.quantile_upper(q);
  };
  const double lo = k / np1;
  try {
    out.integral_term = lo < 0.5 ? np1 * num::integrate(integrand, lo, 0.5, 1e-10).value : 0.0;
  } catch (const NumericalFailure& e) {
    out.integral_term = num::kInf;
    out.finite = false;
    out.note = std::string("integral term diverged: ") + e.what();
  }
  out.total = out.median_index * out.median_term + out.integral_term + out.top_term;
  if (!std::isfinite(out.total)) {
    out.finite = false;
    out.total = num::kInf;
    if (out.note.empty()) out.note = "quantile infinite at the required level";
  }
  return out;
}

double closed_form_sum_bound(SumKind kind, double shape, int n, int k, double lambda,
                             const CalibrationSet& calib) {
  if (n < 1 || k < 1) throw PreconditionError("closed_form_sum_bound: need n, k >= 1");
  if (!(lambda > 0.0)) throw PreconditionError("closed_form_sum_bound: need lambda > 0");
  const double nn = n, l2 = lambda * lambda;
  switch (kind) {
    case SumKind::poly: {
      const double p = shape;
      if (!(p > 1.0)) throw PreconditionError("closed_form_sum_bound: poly needs p > 1");
      if (4.0 * k > n + 1.0) throw PreconditionError("closed_form_sum_bound: poly needs k <= (n+1)/4");
      const double C = calib.get("sum_poly.C");
      const double kk = k;
      return C * p * nn / (p - 1.0) + C * std::pow(nn / kk, 1.0 / p) * (1.0 + p * kk * kk / l2) *
                                          std::exp(l2 / (2.0 * p * kk));
    }
    case SumKind::weibull: {
      const double q = shape;
      if (!(q > 0.0)) throw PreconditionError("closed_form_sum_bound: weibull needs q > 0");
      if (k != 1) throw PreconditionError("closed_form_sum_bound: weibull form is for the full sum");
      const double C = calib.get("sum_weibull.C_q");
      const double spread = std::pow(lambda, 2.0 / q);
      return q <= 1.0 ? C * (nn + spread) : C * (nn + std::pow(nn, 1.0 - 1.0 / q) * spread);
    }
    case SumKind::normal_pow: {
      const double p = shape;
      if (!(p > 0.0)) throw PreconditionError("closed_form_sum_bound: normal_pow needs p > 0");
      if (k != 1) throw PreconditionError("closed_form_sum_bound: normal_pow form is for the full sum");
      const double C = calib.get("sum_normal_pow.C_p");
      const double lp = std::pow(lambda, p);
      return p <= 2.0 ? C * (nn + std::pow(nn, 1.0 - 0.5 * p) * lp) : C * (nn + lp);
    }
  }
  throw PreconditionError("closed_form_sum_bound: unknown kind");
}

double exponential_tail_corollary_form(int n, double lambda, const CalibrationSet& calib) {
  if (n < 1) throw PreconditionError("exponential_tail_corollary_form: need n >= 1");
  return calib.get("sum_weibull.C_q") * (n + lambda * lambda * std::log(static_cast<double>(n)));
}

long long envelope_coverage(const std::vector<double>& upper, long long trials, std::uint64_t seed) {
  if (upper.empty() || trials < 1) throw PreconditionError("envelope_coverage: need bounds and trials");
  std::vector<char> covered(static_cast<std::size_t>(trials));
  parallel_for(covered.size(), [&](std::size_t trial) {
    Rng rng(seed, trial);
    std::vector<double> g(upper.size());
    for (auto& v : g) v = rng.uniform();
    std::sort(g.begin(), g.end());
    bool ok = true;
    for (std::size_t k = 0; k < g.size() && ok; ++k) ok = g[k] <= upper[k];
    covered[trial] = ok;
  });
  return std::count(covered.begin(), covered.end(), 1);
}

}  // namespace conclab::order
