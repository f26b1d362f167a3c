// Scalar numerics shared by every module: Gaussian special functions,
// adaptive quadrature and bracketed root finding.
#pragma once

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace conclab {

// Raised when an iterative method cannot produce a trustworthy value.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when inputs violate an operation's documented precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace num {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kE = 2.71828182845904523536;

double normal_pdf(double t);
double log_normal_pdf(double t);
double normal_cdf(double t);
// Upper tail 1 - Phi(t), accurate far into the tail.
double normal_sf(double t);
// log(1 - Phi(t)); finite for every finite t.
double log_normal_sf(double t);
double normal_quantile(double p);
// Returns z with 1 - Phi(z) = q.
double normal_quantile_upper(double q);

double lgamma(double x);
double tgamma(double x);
// Regularized upper incomplete gamma Q(a, x) and its inverse in x.
double gamma_q(double a, double x);
double gamma_q_inv(double a, double q);

// E|Z|^u for standard normal Z, u > -1.
double gaussian_abs_moment(double u);

// x^p with 0^0 = 1.
double pow0(double x, double p);

struct Integral {
  double value = 0.0;
  double error = 0.0;
};

// Adaptive Gauss-Kronrod on [a, b]; either end may be infinite.
// Throws NumericalFailure when the estimate is not finite or the error
// estimate exceeds max(abs_tol, rel_tol * |value|) by more than 1e3.
Integral integrate(const std::function<double(double)>& f, double a, double b,
                   double rel_tol = 1e-12, double abs_tol = 1e-300);

// Tanh-sinh rule on a finite interval, for integrable endpoint singularities.
Integral integrate_singular(const std::function<double(double)>& f, double a, double b,
                            double rel_tol = 1e-12);

// Integral over [a, b] split at the supplied interior points.
Integral integrate_split(const std::function<double(double)>& f, double a, double b,
                         std::initializer_list<double> cuts, double rel_tol = 1e-12);

// Bisection on a predicate that is false on [lo, x*) and true on [x*, hi].
// Returns the smallest point observed where the predicate holds.
double bisect_predicate(const std::function<bool(double)>& pred, double lo, double hi,
                        int max_iter = 200, double width = 0.0);

// Root of a function with f(lo) and f(hi) of opposite signs.
double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double width = 1e-12, int max_iter = 400);

}  // namespace num
}  // namespace conclab
