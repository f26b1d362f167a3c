// Minkowski-type functionals: lp quasi-norms, the Lorentz-type norm generated
// by normalized sign vectors and its dual, the Orlicz quantile functional,
// the Latala moment functional, the Poisson-hull functional and Lipschitz
// extension.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "conclab/distributions.hpp"
#include "conclab/rng.hpp"
#include "conclab/stats.hpp"

namespace conclab::func {

// (sum |x_i|^p)^{1/p} for p in (0, inf), max |x_i| for p = inf.
double lp_functional(const Eigen::VectorXd& x, double p);

// Weight max{m, r m^{1/q}} of a sign vector with m nonzero entries.
double lorentz_weight(int m, double r, double q);

// Exact dual max_k S_k(y) / lorentz_weight(k), S_k the sum of the k largest |y_i|.
double lorentz_dual(const Eigen::VectorXd& y, double r, double q);
// 2 max{r^{-1} k^{-1/q} S_k(y) : 1 <= k <= min{r^{q/(q-1)}, n}}, within a
// factor 2 above the exact dual.
double lorentz_dual_sweep(const Eigen::VectorXd& y, double r, double q);
// Norm whose unit ball is the hull of the normalized sign vectors, as the
// bidual: the best concave prefix-sum profile below the weights.
double lorentz_norm(const Eigen::VectorXd& x, double r, double q);

// Per-coordinate log moment generating functions t -> log E exp(t X_i).
struct OrliczSpec {
  std::vector<std::function<double(double)>> xi;
  double x_level = 1.0;
};

std::function<double(double)> gaussian_log_mgf();
std::function<double(double)> rademacher_log_mgf();
// By summation for finite laws and quadrature otherwise; +inf where the
// integral diverges or the exponent passes 700.
std::function<double(double)> log_mgf(const dist::Distribution1D& law);

// inf{y > 0 : sum_i xi_i(x a_i / y) / x <= 1}.
double orlicz_quantile(const OrliczSpec& spec, const Eigen::VectorXd& a);
// sum_i xi_i(x a_i) / x, the gauge whose unit sublevel set is the body.
double orlicz_body_value(const OrliczSpec& spec, const Eigen::VectorXd& a);

struct LatalaResult {
  double value = 0.0;
  bool finite = true;
};

// inf{t > 0 : sum_i ln E (|1 + X_i/t|^p + |1 - X_i/t|^p)/2 <= p} for
// independent symmetric coordinates.
LatalaResult latala_functional(const std::vector<dist::Distribution1D>& laws, double p);
// E |sum X_i|^p for finite laws by enumerating every joint outcome.
double discrete_sum_moment(const std::vector<dist::Distribution1D>& laws, double p);

// Draws one random vector into the output slot.
using VectorSampler = std::function<void(Rng&, Eigen::VectorXd&)>;

// E max_{0 <= j <= N} <a, X^(j)> with N ~ Poisson(1/delta) and X^(0) = 0,
// estimated over m trials with per-trial streams.
stats::MeanEstimate poisson_hull_functional(const VectorSampler& sampler, int dim,
                                            const Eigen::VectorXd& a, double delta, long m,
                                            std::uint64_t seed);

using Metric = std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;
double euclidean(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// Largest |f(z) - f(w)| / rho(z, w) over distinct points.
double lipschitz_constant(const std::vector<Eigen::VectorXd>& points,
                          const std::vector<double>& values, const Metric& metric = euclidean);
// inf_z {f(z) + lip rho(x, z)}; lip < 0 means "compute from the data".
double lipschitz_extension_eval(const std::vector<Eigen::VectorXd>& points,
                                const std::vector<double>& values, const Eigen::VectorXd& x,
                                const Metric& metric = euclidean, double lip = -1.0);

}  // namespace conclab::func
