// Closed-form concentration bounds. Every unspecified constant is read from a
// CalibrationSet under the key noted beside each function, so fitted values
// can replace the default of 1.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "conclab/calibration.hpp"

namespace conclab::bounds {

// A probability bound as a function of the deviation level, clipped to <= 2.
struct TailBoundCurve {
  std::string source;
  std::map<std::string, double> params;
  std::string calib_id = "default";
  std::function<double(double)> raw;

  double operator()(double t) const;
  bool nonincreasing_on(const std::vector<double>& grid) const;
};

// Columns t, bound, source, calib-id.
std::string to_csv(const TailBoundCurve& curve, const std::vector<double>& grid);

// Turns "P{|f - M f| > threshold(t)} <= scale * exp(-t^2/2)" into a curve in
// the deviation s by inverting the increasing threshold.
TailBoundCurve threshold_curve(std::string source, std::map<std::string, double> params,
                               std::string calib_id, std::function<double(double)> threshold,
                               double scale);

// Linear forms in independent Weibull-type coordinates, keyed "weibull_linear.c_q":
//   q <= 1:     2 exp(-c min{(t/|a|_2)^2, (t/|a|_inf)^q})
//   1 <= q <= 2: 2 exp(-c min{(t/|a|_2)^2, (t/|a|_{q/(q-1)})^q})
//   q > 2:      2 exp(-c max{(t/|a|_2)^2, (t/|a|_{q/(q-1)})^q})
double weibull_linear_bound(double q, const Eigen::VectorXd& a, double t,
                            const CalibrationSet& calib = {});
TailBoundCurve weibull_linear_curve(double q, const Eigen::VectorXd& a,
                                    const CalibrationSet& calib = {});

struct NonlinearWeibull {
  // 2 exp(-c min{(t/Lip2#)^2, (t/Lipinf#)^q}), key "weibull_nonlinear.c_q".
  double probability = 2.0;
  // Deviation exceeded with probability at most 2 exp(-t^2/2), key "weibull_nonlinear.C_q":
  // C (1 + log(n / t^{-2+4/q})^{1/q-1/2}) (t Lip2 + t^{2/q} Lipinf).
  double threshold = 0.0;
  // The logarithm's argument was raised to e because t^{-2+4/q} >= n / e.
  bool log_clipped = false;
};

NonlinearWeibull weibull_nonlinear_bound(double q, double lip2_sharp, double lipinf_sharp,
                                         double lip2, double lipinf, double n, double t,
                                         const CalibrationSet& calib = {});

struct PolyNonlinear {
  double r = 1.0;              // C_r t^2 exp(t^2/q), floored at 1; key "poly_nonlinear.C_r"
  double threshold_lorentz = 0.0;  // C_q t |(sup|d_i f|^2)_i|_{r,q/2}^{1/2}; key "poly_nonlinear.C_q"
  double threshold_lp = 0.0;   // C_pq Lip_p (n^{1/2-1/p} t + n^{1/q} t e^{t^2/(2q)}); key "poly_nonlinear.C_pq"
  double probability = 2.0;    // C exp(-t^2/2); key "poly_nonlinear.C"
};

// Polynomial-tail coordinates, 2 < q, 2q/(q-2) < p. lip_p < 0 uses
// |grad_sups|_p, an upper bound for sup_x |grad f(x)|_p.
PolyNonlinear poly_nonlinear_bound(double q, double p, const Eigen::VectorXd& grad_sups, double n,
                                   double t, const CalibrationSet& calib = {},
                                   double lip_p = -1.0);

// E sum |Z_i|^p = pi^{-1/2} n 2^{p/2} Gamma((p+1)/2).
double lpn_gauss_mean(double n, double p);
// Deviation of sum |Z_i|^p from its median exceeded with probability at most
// C exp(-t^2/2); key "lpn_gauss.C" multiplies every branch.
double lpn_gauss_bound(double n, double p, double t, const CalibrationSet& calib = {});
TailBoundCurve lpn_gauss_curve(double n, double p, const CalibrationSet& calib = {});
// Probability that |Z|_p leaves [(1-eps) E|Z|_p, (1+eps) E|Z|_p], p >= 1;
// keys "lpn_rel.C", "lpn_rel.c" and "lpn_rel.c_log" (the p >= c log n switch).
double lpn_gauss_rel_bound(double n, double p, double eps, const CalibrationSet& calib = {});

// P{| |X|_p - M|X|_p | > s} for X uniform in the l_q^n ball, 0 <= s <= n^{1/p-1/q};
// key "lp_ball.c_q".
double lp_on_lq_ball_bound(double n, double p, double q, double s, const CalibrationSet& calib = {});
TailBoundCurve lp_on_lq_ball_curve(double n, double p, double q, const CalibrationSet& calib = {});

struct BerryEsseen {
  double uniform = 0.0;     // C sum |a_i|^3 E|X_i|^3, key "berry_esseen.C"
  double nonuniform = 0.0;  // C_r (1+|x|)^{-r} (n^{-1/2} E|X|^3 + n^{-(r-2)/2} E|X|^r), key "berry_esseen.C_r"
};

BerryEsseen berry_esseen_bound(const Eigen::VectorXd& a, const std::vector<double>& third_moments,
                               double r, double r_moment, double n, double x,
                               const CalibrationSet& calib = {});
// Largest x at which the non-uniform bound is still below the Gaussian tail
// 1 - Phi(x); the Gaussian approximation is informative up to probability
// 1 - Phi(x) at that point.
double berry_esseen_reach(double r, double n, double third_moment, double r_moment,
                          const CalibrationSet& calib = {});

// |t|^p = u(t) + v(t) with u = |t|^p off (-1, 1) and the quadratic cap
// p t^2/2 + 1 - p/2 inside; v is supported on (-1, 1). For p >= 1, u = |t|^p.
std::pair<double, double> cusp_split(double p, double t);

}  // namespace conclab::bounds
