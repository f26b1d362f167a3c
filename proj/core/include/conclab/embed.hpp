// Random almost-isometric embeddings W : R^k -> (R^n, |.|_K) with independent
// entries, checked on a packing net of the unit sphere of the averaged norm
// |x|_{Kflat} = E|Wx|_K.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "conclab/calibration.hpp"
#include "conclab/distributions.hpp"
#include "conclab/stats.hpp"

namespace conclab::embed {

// Gauge of a convex body containing 0 in its interior: an l_p ball or a
// polytope {x : <f_i, x> <= 1}.
class NormBody {
 public:
  static NormBody lp(int n, double p);
  static NormBody polytope(Eigen::MatrixXd facet_normals);  // one normal per row

  int dimension() const { return n_; }
  std::string name() const;
  bool euclidean() const { return !is_polytope_ && p_ == 2.0; }
  double operator()(const Eigen::Ref<const Eigen::VectorXd>& y) const;
  // A g with <g, y> = |y|_K and <g, z> <= |z|_K for every z.
  Eigen::VectorXd subgradient(const Eigen::VectorXd& y) const;
  // sup of the gauge over the Euclidean unit sphere (exact for both kinds).
  double sphere_lipschitz() const;

 private:
  NormBody() = default;
  int n_ = 0;
  double p_ = 2.0;
  Eigen::MatrixXd facets_;
  bool is_polytope_ = false;
};

// Entry laws: a single shared law or row-major n*k laws.
struct EntryLaws {
  std::vector<dist::Distribution1D> laws;
  const dist::Distribution1D& at(int i, int j, int k) const;
  void draw(Rng& rng, Eigen::MatrixXd& w) const;  // w is n x k
};

struct EmbeddingSpec {
  int n = 0;
  int k = 0;
  EntryLaws entries;
  NormBody body = NormBody::lp(1, 2.0);
  double b = 0.0;                              // 0 means body.sphere_lipschitz()
  std::function<double(double)> xi;            // gradient-quantile map
  double connectivity = 1.4142135623730951;    // L(Q)
  double T = 2.0;
  // When set, ratios are tested against this tolerance instead of the epsilon
  // built from xi; used by the Dvoretzky recipe, whose constant is free.
  std::optional<double> target_epsilon;
  int expectation_draws = 2000;  // per net point
  int metric_draws = 200;        // common draws defining the packing metric
};

struct EpsilonParts {
  double value = 0.0;
  double drift = 0.0;   // 8 L T xi(T)
  double spread = 0.0;  // 28 L sqrt(int_2^{T+40} xi^2 t^3 e^{-t^2/2})
};

EpsilonParts epsilon_from_xi(double connectivity, double T, const std::function<double(double)>& xi);
bool embedding_condition(double epsilon, int k, double T);

stats::MeanEstimate estimate_Ebody(const EmbeddingSpec& spec, int m, const Eigen::VectorXd& x,
                                   std::uint64_t seed);

struct TrialRatios {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  bool rank_deficient = false;
  bool success = false;
};

struct RatioRecord {
  int trial = 0;
  int net_index = 0;
  double ratio = 0.0;
};

struct EmbeddingReport {
  int n = 0;
  int k = 0;
  std::string body;
  double b = 0.0;
  double T = 0.0;
  std::optional<EpsilonParts> epsilon;  // from xi, when T >= 2 and xi is given
  double tolerance = 0.0;               // epsilon actually tested
  double slack = 0.0;                   // 3 SE of the cached expectations
  bool condition_ok = false;
  double success_floor = 0.0;           // 1 - exp(-T^2/4)
  double net_radius = 0.0;
  int net_size = 0;
  std::optional<stats::MeanEstimate> sphere_mean;  // M, Dvoretzky recipe only
  std::vector<TrialRatios> trials;
  double success_rate = 0.0;
  std::vector<RatioRecord> ratios;
  std::uint64_t seed = 0;
};

// (1/m) sum_s |W_s z|_K over m fixed draws: a norm on R^k that estimates
// |z|_{Kflat} and defines the packing metric.
class AveragedNorm {
 public:
  AveragedNorm(const EmbeddingSpec& spec, int draws, std::uint64_t seed);
  double operator()(const Eigen::VectorXd& z) const;
  // A g with <g, z> = norm(z) and <g, u> <= norm(u) for every u.
  Eigen::VectorXd subgradient(const Eigen::VectorXd& z) const;

 private:
  NormBody body_;
  std::vector<Eigen::MatrixXd> mats_;
  std::vector<Eigen::MatrixXd> grams_;  // W^T W, used for the Euclidean body
};

// Greedy packing of the unit sphere of AveragedNorm(spec, spec.metric_draws,
// derive_seed(seed, 0)) at radius net_eps; one net point per row.
Eigen::MatrixXd build_net(const EmbeddingSpec& spec, double net_eps, std::uint64_t seed);

EmbeddingReport verify_embedding(const EmbeddingSpec& spec, int trials, double net_eps,
                                 std::uint64_t seed);

// Mean of |theta|_K over the uniform sphere.
stats::MeanEstimate sphere_mean(const NormBody& body, int m, std::uint64_t seed);

// Standard Gaussian entries, T = C eps sqrt(n) M / b with C keyed "dvoretzky.C".
EmbeddingReport gaussian_dvoretzky(int n, int k, double eps, const NormBody& body, int trials,
                                   std::uint64_t seed, const CalibrationSet& calib = {});

// Largest admissible dimension for two-sided exponential entries into l_p^n,
// with xi(t) = C b n^{-1/p}((log n)^{1/2} + t) and C keyed "embed.exponential.C_p".
struct DimensionRecipe {
  double n = 0.0;
  double p = 1.0;
  double b = 0.0;
  double T = 0.0;        // largest T >= 2 with epsilon(T) <= target; 0 if none
  double epsilon = 0.0;  // epsilon(T)
  double k_max = 0.0;    // T^2 / (19 log(1/epsilon)), before flooring
};
DimensionRecipe exponential_dimension(int n, double p, double target_epsilon,
                                      const CalibrationSet& calib = {});

std::string to_json(const EmbeddingReport& report);
// Columns trial, net_index, ratio.
std::string ratios_to_csv(const EmbeddingReport& report);

}  // namespace conclab::embed
