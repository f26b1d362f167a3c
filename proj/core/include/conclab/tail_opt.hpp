// Optimal convex Markov bounds, the regularity constants that sandwich them
// against the true tail, and the gradient-to-tail pipeline built on both.
#pragma once

#include <functional>
#include <optional>
#include <string>

#include "conclab/distributions.hpp"

namespace conclab::tail {

// Hinge phi(x) = max{0, slope (x - threshold) + 1} minimizing E phi(Y) / phi(t)
// over convex nondecreasing phi.
struct ConvexWitness {
  double threshold = 0.0;
  double slope = 0.0;
  double bound_value = 0.0;
};

// Mean of a law, from its closed form or by quadrature of the tails.
double law_mean(const dist::Distribution1D& law);

// E max{0, a (Y - t) + 1}.
double hinge_expectation(const dist::Distribution1D& law, double t, double a);

ConvexWitness optimal_markov(const dist::Distribution1D& law, double t);

struct RegularityConstants {
  double p = 0.0;
  double b = 0.0;
  double a_pb = 0.0;
  double a_hat_pb = 0.0;
  double R_flat = 0.0;
  double R_sharp = 0.0;
};

// p > 2 and -1/p <= b, b != 0 (b = -1/p is the closed boundary case).
RegularityConstants regularity_constants(double p, double b);

// Nondecreasing map from deviation level to gradient quantile. The derivative
// is optional; a central difference is used when it is absent.
struct GradientQuantileMap {
  std::function<double(double)> xi;
  std::function<double(double)> xi_prime;
};

GradientQuantileMap constant_xi(double L);

// Inverse of s -> (pi / 2) s xi(s) on [0, inf).
double eta_inverse(const GradientQuantileMap& xi, double y);

struct DifferentialRefusal {
  double x = 0.0;
  double ratio = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::string message;
};

struct GradientTailResult {
  std::optional<double> bound;
  std::optional<DifferentialRefusal> refusal;
  RegularityConstants constants;
  double eta_t = 0.0;
  double g_prime_t = 0.0;
  double mean_upper = 0.0;  // upper estimate of E W
};

// g(x) = -log of the density implied by the envelope (A + 1/2) exp(-eta^2/2).
double envelope_log_density(double A, const GradientQuantileMap& xi, double x);

// Returns 4 (A + 1/2) R_sharp exp(-eta(t)^2 / 2) once the differential
// condition -1/p <= g''/g'^2 <= b holds on a grid over
// [T0, max(2t, T0 + 10)]. Throws
// PreconditionError when t is not beyond T0, E W and the shift a_hat/g'(t).
GradientTailResult tail_from_gradient(double A, const GradientQuantileMap& xi, double p, double b,
                                      double T0, double t);

// Surrogate law with P{W > t} = exp(-t^power) for t > 0 and W >= 0.
dist::Distribution1D power_exponential_surrogate(double power);

}  // namespace conclab::tail
