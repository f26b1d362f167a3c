#include "conclab/embed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "conclab/format.hpp"
#include "conclab/numerics.hpp"
#include "conclab/parallel.hpp"
#include "conclab/rng.hpp"
#include "json.hpp"

namespace conclab::embed {

namespace {

constexpr double kNetBudget = 1e6;

// Seed streams inside one embedding experiment.
enum Stream : std::uint64_t { kNetStream = 1, kExpectationStream = 2, kTrialStream = 3 };

void check_spec(const EmbeddingSpec& spec) {
  if (spec.n < 1 || spec.k < 1) throw PreconditionError("embedding: n and k must be positive");
  if (spec.body.dimension() != spec.n) throw PreconditionError("embedding: body dimension must equal n");
  const std::size_t count = spec.entries.laws.size();
  if (count != 1 && count != static_cast<std::size_t>(spec.n) * spec.k)
    throw PreconditionError("embedding: need one shared entry law or n*k laws");
  if (spec.expectation_draws < 2 || spec.metric_draws < 1)
    throw PreconditionError("embedding: draw counts too small");
}

double body_constant(const EmbeddingSpec& spec) {
  return spec.b > 0.0 ? spec.b : spec.body.sphere_lipschitz();
}

}  // namespace

// --- NormBody -----------------------------------------------------------------

NormBody NormBody::lp(int n, double p) {
  if (n < 1) throw PreconditionError("NormBody::lp: n must be positive");
  if (!(p >= 1.0)) throw PreconditionError("NormBody::lp: p must be >= 1");
  NormBody body;
  body.n_ = n;
  body.p_ = p;
  return body;
}

NormBody NormBody::polytope(Eigen::MatrixXd facet_normals) {
  if (facet_normals.rows() < facet_normals.cols() + 1 || facet_normals.cols() < 1)
    throw PreconditionError("NormBody::polytope: need at least n+1 facet normals in R^n");
  NormBody body;
  body.n_ = static_cast<int>(facet_normals.cols());
  body.facets_ = std::move(facet_normals);
  body.is_polytope_ = true;
  return body;
}

std::string NormBody::name() const {
  if (is_polytope_) return "polytope(" + std::to_string(facets_.rows()) + ")";
  if (std::isinf(p_)) return "linf";
  return "l" + format_double(p_);
}

double NormBody::operator()(const Eigen::Ref<const Eigen::VectorXd>& y) const {
  if (is_polytope_) return std::max(0.0, (facets_ * y).maxCoeff());
  if (std::isinf(p_)) return y.cwiseAbs().maxCoeff();
  if (p_ == 1.0) return y.cwiseAbs().sum();
  if (p_ == 2.0) return y.norm();
  const double scale = y.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return scale * std::pow((y.cwiseAbs() / scale).array().pow(p_).sum(), 1.0 / p_);
}

Eigen::VectorXd NormBody::subgradient(const Eigen::VectorXd& y) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(y.size());
  const double value = (*this)(y);
  if (value == 0.0) return g;
  if (is_polytope_) {
    Eigen::Index best = 0;
    (facets_ * y).maxCoeff(&best);
    return facets_.row(best).transpose();
  }
  if (std::isinf(p_)) {
    Eigen::Index best = 0;
    y.cwiseAbs().maxCoeff(&best);
    g[best] = y[best] > 0 ? 1.0 : -1.0;
    return g;
  }
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double sign = y[i] > 0 ? 1.0 : (y[i] < 0 ? -1.0 : 0.0);
    g[i] = sign * std::pow(std::abs(y[i]) / value, p_ - 1.0);
  }
  return g;
}

double NormBody::sphere_lipschitz() const {
  if (is_polytope_) return facets_.rowwise().norm().maxCoeff();
  if (p_ >= 2.0) return 1.0;
  return std::pow(static_cast<double>(n_), 1.0 / p_ - 0.5);
}

// --- Entry laws ---------------------------------------------------------------

const dist::Distribution1D& EntryLaws::at(int i, int j, int k) const {
  return laws.size() == 1 ? laws.front() : laws[static_cast<std::size_t>(i) * k + j];
}

void EntryLaws::draw(Rng& rng, Eigen::MatrixXd& w) const {
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      w(i, j) = at(static_cast<int>(i), static_cast<int>(j), static_cast<int>(w.cols())).sample(rng);
}

// --- epsilon ------------------------------------------------------------------

EpsilonParts epsilon_from_xi(double connectivity, double T, const std::function<double(double)>& xi) {
  if (!(T >= 2.0)) throw PreconditionError("epsilon_from_xi: T must be >= 2");
  if (!(connectivity > 0.0)) throw PreconditionError("epsilon_from_xi: connectivity factor must be positive");
  if (!xi) throw PreconditionError("epsilon_from_xi: xi is required");
  const double upper = T + 40.0;
  double previous = xi(0.0);
  for (int i = 1; i <= 128; ++i) {
    const double current = xi(upper * i / 128.0);
    if (current < previous - 1e-12 * std::abs(previous))
      throw PreconditionError("epsilon_from_xi: xi must be nondecreasing");
    previous = current;
  }
  const auto integrand = [&](double t) {
    const double x = xi(t);
    return x * x * t * t * t * std::exp(-0.5 * t * t);
  };
  const double integral = num::integrate(integrand, 2.0, upper, 1e-10).value;
  EpsilonParts parts;
  parts.drift = 8.0 * connectivity * T * xi(T);
  parts.spread = 28.0 * connectivity * std::sqrt(integral);
  parts.value = parts.drift + parts.spread;
  return parts;
}

bool embedding_condition(double epsilon, int k, double T) {
  if (!(epsilon > 0.0 && epsilon <= 0.5)) return false;
  return k <= T * T / (19.0 * std::log(1.0 / epsilon));
}

// --- expectations -------------------------------------------------------------

namespace {

// E|W omega|_K for every row omega of the net, from one shared batch of draws.
std::vector<stats::MeanEstimate> net_expectations(const EmbeddingSpec& spec, const Eigen::MatrixXd& net,
                                                  int draws, std::uint64_t seed) {
  const Eigen::Index points = net.rows();
  std::vector<Eigen::VectorXd> values(draws);
  parallel_for(draws, [&](std::size_t s) {
    Rng rng(seed, s);
    Eigen::MatrixXd w(spec.n, spec.k);
    spec.entries.draw(rng, w);
    const Eigen::MatrixXd images = w * net.transpose();
    values[s].resize(points);
    for (Eigen::Index j = 0; j < points; ++j) values[s][j] = spec.body(images.col(j));
  });
  std::vector<stats::MeanEstimate> out(points);
  for (Eigen::Index j = 0; j < points; ++j) {
    std::vector<double> column(draws);
    for (int s = 0; s < draws; ++s) column[s] = values[s][j];
    out[j] = stats::mean_se(column);
  }
  return out;
}

}  // namespace

stats::MeanEstimate estimate_Ebody(const EmbeddingSpec& spec, int m, const Eigen::VectorXd& x,
                                   std::uint64_t seed) {
  check_spec(spec);
  if (x.size() != spec.k) throw PreconditionError("estimate_Ebody: x must have k coordinates");
  if (m < 2) throw PreconditionError("estimate_Ebody: need at least two draws");
  for (const auto& law : spec.entries.laws) {
    const auto mean = law.mean();
    if (mean && !std::isfinite(*mean)) throw PreconditionError("estimate_Ebody: entry law lacks a first moment");
  }
  return net_expectations(spec, x.transpose(), m, seed).front();
}

// --- averaged norm ------------------------------------------------------------

AveragedNorm::AveragedNorm(const EmbeddingSpec& spec, int draws, std::uint64_t seed) : body_(spec.body) {
  if (draws < 1) throw PreconditionError("AveragedNorm: need at least one draw");
  mats_.assign(draws, Eigen::MatrixXd(spec.n, spec.k));
  for (int s = 0; s < draws; ++s) {
    Rng rng(seed, s);
    spec.entries.draw(rng, mats_[s]);
  }
  if (body_.euclidean()) {
    grams_.reserve(draws);
    for (const auto& w : mats_) grams_.push_back(w.transpose() * w);
  }
}

double AveragedNorm::operator()(const Eigen::VectorXd& z) const {
  double total = 0.0;
  if (!grams_.empty()) {
    for (const auto& g : grams_) total += std::sqrt(std::max(0.0, z.dot(g * z)));
  } else {
    for (const auto& w : mats_) total += body_(w * z);
  }
  return total / mats_.size();
}

Eigen::VectorXd AveragedNorm::subgradient(const Eigen::VectorXd& z) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(z.size());
  if (!grams_.empty()) {
    for (const auto& gram : grams_) {
      const Eigen::VectorXd gz = gram * z;
      const double value = std::sqrt(std::max(0.0, z.dot(gz)));
      if (value > 0.0) g += gz / value;
    }
    return g / grams_.size();
  }
  for (const auto& w : mats_) g += w.transpose() * body_.subgradient(w * z);
  return g / mats_.size();
}

// --- net ----------------------------------------------------------------------

Eigen::MatrixXd build_net(const EmbeddingSpec& spec, double net_eps, std::uint64_t seed) {
  check_spec(spec);
  if (!(net_eps > 0.0 && net_eps < 1.0)) throw PreconditionError("build_net: net_eps must lie in (0, 1)");
  const int k = spec.k;
  if (k * std::log(12.0 / net_eps) > std::log(kNetBudget))
    throw PreconditionError("build_net: (12/net_eps)^k exceeds the 1e6-point budget; "
                            "increase net_eps or reduce k");

  const AveragedNorm metric(spec, spec.metric_draws, derive_seed(seed, 0));

  // Candidate directions, densely covering the sphere relative to the radius.
  std::vector<Eigen::VectorXd> candidates;
  if (k == 1) {
    candidates = {Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, -1.0)};
  } else {
    const double estimate = 4.0 * k * std::pow(3.0 / net_eps, k - 1);
    const auto count = static_cast<std::size_t>(std::min(kNetBudget, std::ceil(estimate)));
    Rng rng(seed, 1);
    candidates.resize(count);
    for (auto& c : candidates) {
      c.resize(k);
      for (int j = 0; j < k; ++j) c[j] = rng.normal();
    }
  }
  std::vector<double> scale(candidates.size());
  parallel_for(candidates.size(), [&](std::size_t i) { scale[i] = metric(candidates[i]); });
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!(scale[i] > 0.0) || !std::isfinite(scale[i]))
      throw NumericalFailure("build_net: averaged norm vanishes on a direction; entry laws are degenerate");
    candidates[i] /= scale[i];
  }
  std::vector<Eigen::VectorXd> grads(candidates.size());
  parallel_for(candidates.size(), [&](std::size_t i) { grads[i] = metric.subgradient(candidates[i]); });

  Eigen::VectorXd axis_norms(k);
  for (int j = 0; j < k; ++j) axis_norms[j] = metric(Eigen::VectorXd::Unit(k, j));

  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    bool covered = false;
    for (std::size_t idx : chosen) {
      const auto& w = candidates[idx];
      // Both points have unit norm, so subgradients give lower bounds on the distance.
      const double lower = std::max(1.0 - grads[i].dot(w), 1.0 - grads[idx].dot(c));
      if (lower >= net_eps) continue;
      const Eigen::VectorXd diff = c - w;
      if (diff.cwiseAbs().dot(axis_norms) < net_eps || metric(diff) < net_eps) {
        covered = true;
        break;
      }
    }
    if (!covered) chosen.push_back(i);
  }
  Eigen::MatrixXd net(chosen.size(), k);
  for (std::size_t r = 0; r < chosen.size(); ++r) net.row(r) = candidates[chosen[r]].transpose();
  return net;
}

// --- verification -------------------------------------------------------------

EmbeddingReport verify_embedding(const EmbeddingSpec& spec, int trials, double net_eps, std::uint64_t seed) {
  check_spec(spec);
  if (trials < 1) throw PreconditionError("verify_embedding: trials must be positive");
  EmbeddingReport report;
  report.n = spec.n;
  report.k = spec.k;
  report.body = spec.body.name();
  report.b = body_constant(spec);
  report.T = spec.T;
  report.seed = seed;
  report.net_radius = net_eps;
  report.success_floor = 1.0 - std::exp(-spec.T * spec.T / 4.0);
  if (spec.xi && spec.T >= 2.0) report.epsilon = epsilon_from_xi(spec.connectivity, spec.T, spec.xi);
  if (spec.target_epsilon) {
    report.tolerance = *spec.target_epsilon;
  } else if (report.epsilon) {
    report.tolerance = report.epsilon->value;
  } else {
    throw PreconditionError("verify_embedding: need xi with T >= 2, or a target epsilon");
  }
  report.condition_ok = embedding_condition(report.tolerance, spec.k, spec.T);
  if (!spec.target_epsilon && !report.condition_ok)
    throw PreconditionError("verify_embedding: epsilon = " + format_double(report.tolerance) +
                            " violates 0 < eps <= 1/2, k <= T^2 / (19 log(1/eps))");

  const Eigen::MatrixXd net = build_net(spec, net_eps, derive_seed(seed, kNetStream));
  report.net_size = static_cast<int>(net.rows());
  const auto expectations =
      net_expectations(spec, net, spec.expectation_draws, derive_seed(seed, kExpectationStream));
  for (const auto& e : expectations) report.slack = std::max(report.slack, 3.0 * e.se / e.mean);

  const double lo = 1.0 - report.tolerance - report.slack;
  const double hi = 1.0 + report.tolerance + report.slack;
  const Eigen::Index points = net.rows();
  std::vector<Eigen::VectorXd> trial_ratios(trials);
  report.trials.resize(trials);
  const std::uint64_t trial_seed = derive_seed(seed, kTrialStream);
  parallel_for(trials, [&](std::size_t t) {
    Rng rng(trial_seed, t);
    Eigen::MatrixXd w(spec.n, spec.k);
    spec.entries.draw(rng, w);
    const Eigen::MatrixXd images = w * net.transpose();
    Eigen::VectorXd& ratios = trial_ratios[t];
    ratios.resize(points);
    for (Eigen::Index j = 0; j < points; ++j) ratios[j] = spec.body(images.col(j)) / expectations[j].mean;
    TrialRatios& out = report.trials[t];
    out.min_ratio = ratios.minCoeff();
    out.max_ratio = ratios.maxCoeff();
    // A nontrivial kernel sends some x to 0, whatever the net sees.
    if (spec.k > spec.n) {
      out.rank_deficient = true;
    } else {
      const Eigen::JacobiSVD<Eigen::MatrixXd> svd(w);
      const auto& sv = svd.singularValues();
      out.rank_deficient = !(sv[sv.size() - 1] > 1e-12 * sv[0]);
    }
    if (out.rank_deficient) out.min_ratio = 0.0;
    out.success = !out.rank_deficient && out.min_ratio >= lo && out.max_ratio <= hi;
  });
  int successes = 0;
  for (const auto& t : report.trials) successes += t.success;
  report.success_rate = static_cast<double>(successes) / trials;
  report.ratios.reserve(static_cast<std::size_t>(trials) * points);
  for (int t = 0; t < trials; ++t)
    for (Eigen::Index j = 0; j < points; ++j)
      report.ratios.push_back({t, static_cast<int>(j), trial_ratios[t][j]});
  return report;
}

stats::MeanEstimate sphere_mean(const NormBody& body, int m, std::uint64_t seed) {
  if (m < 2) throw PreconditionError("sphere_mean: need at least two draws");
  std::vector<double> values(m);
  const int n = body.dimension();
  parallel_for(m, [&](std::size_t s) {
    Rng rng(seed, s);
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = rng.normal();
    values[s] = body(z) / z.norm();
  });
  return stats::mean_se(values);
}

EmbeddingReport gaussian_dvoretzky(int n, int k, double eps, const NormBody& body, int trials,
                                   std::uint64_t seed, const CalibrationSet& calib) {
  if (!(eps > 0.0 && eps < 0.5)) throw PreconditionError("gaussian_dvoretzky: eps must lie in (0, 1/2)");
  if (body.dimension() != n) throw PreconditionError("gaussian_dvoretzky: body dimension must equal n");
  const auto mean = sphere_mean(body, 4000, derive_seed(seed, 7));
  const double b = body.sphere_lipschitz();
  EmbeddingSpec spec;
  spec.n = n;
  spec.k = k;
  spec.entries.laws = {dist::normal()};
  spec.body = body;
  spec.b = b;
  spec.connectivity = 1.0;  // constant Q
  const double level = 2.0 * b / (std::sqrt(static_cast<double>(n)) * mean.mean);
  spec.xi = [level](double) { return level; };
  spec.T = calib.get("dvoretzky.C") * eps * std::sqrt(static_cast<double>(n)) * mean.mean / b;
  spec.target_epsilon = eps;
  const double net_eps = std::max(eps / 2.0, 12.0 * std::pow(kNetBudget, -1.0 / k) * (1.0 + 1e-12));
  EmbeddingReport report = verify_embedding(spec, trials, net_eps, seed);
  report.sphere_mean = mean;
  return report;
}

DimensionRecipe exponential_dimension(int n, double p, double target_epsilon, const CalibrationSet& calib) {
  if (n < 2) throw PreconditionError("exponential_dimension: n must be at least 2");
  if (!(target_epsilon > 0.0 && target_epsilon <= 0.5))
    throw PreconditionError("exponential_dimension: target epsilon must lie in (0, 1/2]");
  DimensionRecipe out;
  out.n = n;
  out.p = p;
  out.b = NormBody::lp(n, p).sphere_lipschitz();
  const double nd = static_cast<double>(n);
  const double level = calib.get("embed.exponential.C_p") * out.b * std::pow(nd, -1.0 / p);
  const double root_log = std::sqrt(std::log(nd));
  const auto xi = [=](double t) { return level * (root_log + t); };
  const double connectivity = std::sqrt(2.0);
  const auto eps_at = [&](double T) { return epsilon_from_xi(connectivity, T, xi).value; };
  out.epsilon = eps_at(2.0);
  if (out.epsilon > target_epsilon) return out;
  double hi = 4.0;
  while (eps_at(hi) <= target_epsilon) {
    hi *= 2.0;
    if (hi > 1e8) throw NumericalFailure("exponential_dimension: epsilon does not grow with T");
  }
  // Smallest T where epsilon exceeds the target; the admissible T sits just below it.
  out.T = num::bisect_predicate([&](double T) { return eps_at(T) > target_epsilon; }, 2.0, hi, 200, 1e-10);
  out.epsilon = eps_at(out.T);
  out.k_max = out.T * out.T / (19.0 * std::log(1.0 / target_epsilon));
  return out;
}

// --- export -------------------------------------------------------------------

std::string to_json(const EmbeddingReport& report) {
  nlohmann::ordered_json j;
  j["n"] = report.n;
  j["k"] = report.k;
  j["body"] = report.body;
  j["b"] = report.b;
  j["T"] = report.T;
  if (report.epsilon) {
    j["epsilon"] = {{"value", report.epsilon->value},
                    {"drift", report.epsilon->drift},
                    {"spread", report.epsilon->spread}};
  } else {
    j["epsilon"] = nullptr;
  }
  j["tolerance"] = report.tolerance;
  j["slack"] = report.slack;
  j["condition_ok"] = report.condition_ok;
  j["success_floor"] = report.success_floor;
  j["success_rate"] = report.success_rate;
  j["net_radius"] = report.net_radius;
  j["net_size"] = report.net_size;
  if (report.sphere_mean) j["sphere_mean"] = {{"mean", report.sphere_mean->mean}, {"se", report.sphere_mean->se}};
  j["seed"] = report.seed;
  auto& trials = j["trials"] = nlohmann::ordered_json::array();
  for (const auto& t : report.trials)
    trials.push_back({{"min_ratio", t.min_ratio},
                      {"max_ratio", t.max_ratio},
                      {"rank_deficient", t.rank_deficient},
                      {"success", t.success}});
  return j.dump(2) + "\n";
}

std::string ratios_to_csv(const EmbeddingReport& report) {
  std::ostringstream out;
  out << "trial,net_index,ratio\n";
  for (const auto& r : report.ratios) out << r.trial << ',' << r.net_index << ',' << format_double(r.ratio) << '\n';
  return out.str();
}

}  // namespace conclab::embed
