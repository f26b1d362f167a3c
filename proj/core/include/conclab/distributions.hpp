// One-dimensional laws, quantile transport from the standard normal, and
// reproducible samplers (including the uniform law on the l_q ball).
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "conclab/rng.hpp"

namespace conclab::dist {

struct Support {
  double lo;
  double hi;
};

// Interface implemented by each law. Only cdf, id and support are required;
// everything else has a generic fallback.
class Law {
 public:
  virtual ~Law() = default;
  virtual std::string id() const = 0;
  virtual double cdf(double t) const = 0;
  virtual Support support() const = 0;
  // P{X > t}; override when 1 - cdf loses precision.
  virtual double sf(double t) const { return 1.0 - cdf(t); }
  virtual bool has_density() const { return false; }
  virtual double density(double) const { return 0.0; }
  virtual double log_density(double t) const;
  // Closed-form generalized inverse when available.
  virtual std::optional<double> quantile(double) const { return std::nullopt; }
  // F^{-1}(exp(log_p)) and F^{-1}(1 - exp(log_q)); defaults go through quantile.
  virtual double lower_quantile_log(double log_p) const;
  virtual double upper_quantile_log(double log_q) const;
  virtual bool symmetric() const { return false; }
  virtual std::optional<double> mean() const { return std::nullopt; }
  // Atoms (value, mass) for purely discrete laws, empty otherwise.
  virtual std::vector<std::pair<double, double>> atoms() const { return {}; }
  virtual double sample(Rng& rng) const;

 protected:
  double generic_quantile(double s) const;
};

class Distribution1D {
 public:
  explicit Distribution1D(std::shared_ptr<const Law> law);

  std::string id() const { return law_->id(); }
  double cdf(double t) const { return law_->cdf(t); }
  double sf(double t) const { return law_->sf(t); }
  Support support() const { return law_->support(); }
  bool symmetric() const { return law_->symmetric(); }
  bool has_density() const { return law_->has_density(); }
  std::optional<double> density(double t) const;
  std::optional<double> mean() const { return law_->mean(); }
  std::vector<std::pair<double, double>> atoms() const { return law_->atoms(); }
  bool discrete() const { return !law_->atoms().empty(); }

  // Generalized inverse inf{t : F(t) > s}, s in (0, 1).
  double quantile(double s) const;
  // quantile(1 - q) evaluated without forming 1 - q.
  double quantile_upper(double q) const;
  // Local Lipschitz constant of the quantile function; +inf without density.
  double quantile_lip(double s) const;
  // F^{-1}(Phi(z)), evaluated through log tail probabilities.
  double transport(double z) const;
  // Local Lipschitz constant of F^{-1} o Phi.
  double transport_lip(double z) const;

  double sample(Rng& rng) const { return law_->sample(rng); }
  const Law& law() const { return *law_; }

 private:
  std::shared_ptr<const Law> law_;
};

Distribution1D normal();
Distribution1D uniform01();
Distribution1D exponential();
Distribution1D laplace();
// Symmetric, P{|X| >= t} = exp(-(scale t)^q).
Distribution1D weibull_sym(double q, double scale = 1.0);
// Symmetric, P{|X| > t} = (scale |t| + 1)^{-q}.
Distribution1D poly_tail(double q, double scale = 1.0);
// Density exp(-|t|^q) / (2 Gamma(1 + 1/q)).
Distribution1D generalized_gaussian(double q);
Distribution1D point_mass(double x);
Distribution1D rademacher();
// Finite law; masses are normalized.
Distribution1D discrete(std::vector<std::pair<double, double>> atoms);
// Law with P{X > t} = min(1, envelope(t)) for t > 0 and X >= 0.
Distribution1D tail_surrogate(std::function<double(double)> envelope, std::string name);

// Parses normal | uniform01 | exp | laplace | weibull_sym:q=v | poly_tail:q=v
// | rademacher | point:x=v. Throws std::invalid_argument otherwise.
Distribution1D parse_law(const std::string& id);

// inf{t : F(t) > s} by bisection on the CDF.
double generalized_inverse(const Distribution1D& dist, double s);

double h_q(double q, double t);
double h_q_prime(double q, double t);

std::vector<double> transport_map(const std::vector<Distribution1D>& laws,
                                  const std::vector<double>& x);

// n x m matrix; column j is one draw of a vector in R^n from stream (seed, j).
struct SampleBatch {
  Eigen::MatrixXd values;
  std::vector<std::string> laws;
  std::uint64_t seed = 0;
  std::string streams = "column";
};

// laws has length 1 (shared) or n.
SampleBatch sample(const std::vector<Distribution1D>& laws, std::size_t n, std::size_t m,
                   std::uint64_t seed);
// Columns uniform on the unit l_q ball of R^n.
SampleBatch sample_ball_q(std::size_t n, double q, std::size_t m, std::uint64_t seed);
// One draw from the ball sampler into out (length n).
void draw_ball_q(Rng& rng, double q, Eigen::Ref<Eigen::VectorXd> out);

// Header row of law identifiers, one row per draw.
std::string to_csv(const SampleBatch& batch);

}  // namespace conclab::dist
