// Deviation functions of exponential sums, uniform order-statistic envelopes
// and sum-of-order-statistics bounds.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "conclab/calibration.hpp"
#include "conclab/distributions.hpp"

namespace conclab::order {

// e^t (1 - t) on [0, 1] and e^{-t} (1 + t) on [0, inf); both decrease from 1.
double xi1(double t);
double xi2(double t);

struct XiInverse {
  double value = 0.0;
  double analytic_upper = 0.0;  // closed-form upper estimate of the inverse
};

// which = 1 needs y in [0, 1]; which = 2 needs y in (0, 1].
XiInverse xi_inverse(int which, double y);

// Inverses taking log y, so arguments far below the double range are usable.
// Each rounds toward the larger inverse.
double xi1_inverse_log(double log_y);
// 1 - xi1^{-1}(y) without cancellation; rounds toward the smaller value.
double xi1_inverse_complement_log(double log_y);
double xi2_inverse_log(double log_y);

// Per-k upper bounds on the k-th smallest of n uniforms.
double top_order_bound(int n, int k, double t);
double bottom_order_bound(int n, int k, double t);
double renyi_bound(int n, int k, double t, double c);
// log(1 - renyi_bound), finite for k < n even where the bound rounds to 1.
double renyi_log_complement(int n, int k, double t, double c);

enum class EnvelopeSource { top, bottom, renyi };
const char* to_string(EnvelopeSource s);

struct Envelope {
  int n = 0;
  double t = 0.0;
  std::vector<double> upper;  // upper[k - 1] bounds the k-th order statistic
  std::vector<EnvelopeSource> source;
  std::vector<double> top, bottom, renyi;  // the individual formulas
};

// Minimum of the three formulas, clipped to 1 and made nondecreasing by a
// suffix minimum (the k-th order statistic is below every later bound).
// The renyi term uses the constant "order_renyi.c" and can be excluded.
Envelope uniform_order_envelope(int n, double t, const CalibrationSet& calib = {},
                                bool include_renyi = true);

struct OrderSumBound {
  int median_index = 0;
  double median_term = 0.0;    // bound on the median order statistic
  double integral_term = 0.0;  // bound on the sum strictly above the median up to n - k
  double top_term = 0.0;       // bound on the maximum
  double total = 0.0;          // bound on the sum of the n - k + 1 smallest
  bool finite = true;
  std::string note;
};

// Nonnegative law, 1 <= k < (n + 1) / 2, lambda >= 2.
OrderSumBound order_sum_bound(const dist::Distribution1D& law, int n, int k, double lambda);

enum class SumKind { poly, weibull, normal_pow };

// Closed-form bounds on the sum of the n - k + 1 smallest (k = 1: the full
// sum), for tails t^{-p}, exp(-t^q) and powers |Z|^p of normals. The shape
// parameter is p or q; constants "sum_poly.C", "sum_weibull.C_q",
// "sum_normal_pow.C_p".
double closed_form_sum_bound(SumKind kind, double shape, int n, int k, double lambda,
                             const CalibrationSet& calib = {});

// The exponential-tail value obtained from the order-statistic route alone,
// C (n + lambda^2 log n); the closed form above uses the sharper C (n + lambda^2).
double exponential_tail_corollary_form(int n, double lambda, const CalibrationSet& calib = {});

// Number of trials, trial i drawn from Rng(seed, i), in which every order
// statistic of n = upper.size() uniforms lies below its bound.
long long envelope_coverage(const std::vector<double>& upper, long long trials, std::uint64_t seed);

}  // namespace conclab::order
