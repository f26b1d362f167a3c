#include "conclab/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "conclab/format.hpp"
#include "conclab/numerics.hpp"
#include "conclab/parallel.hpp"

namespace conclab::dist {

using num::kInf;

namespace {

constexpr double kLog2 = 0.69314718055994530942;

// Smallest t with pred(t) true, for a predicate monotone in t.
double monotone_search(const std::function<bool(double)>& pred, Support sup) {
  double lo, hi;
  if (std::isfinite(sup.lo)) {
    lo = sup.lo - std::max(1.0, std::abs(sup.lo));
  } else {
    lo = -1.0;
    while (pred(lo)) {
      lo *= 2.0;
      if (!std::isfinite(lo)) throw NumericalFailure("quantile search: no lower bracket");
    }
  }
  if (std::isfinite(sup.hi)) {
    hi = sup.hi;
    if (!pred(hi)) hi = sup.hi + std::max(1.0, std::abs(sup.hi));
  } else {
    hi = 1.0;
    while (!pred(hi)) {
      hi *= 2.0;
      if (!std::isfinite(hi)) throw NumericalFailure("quantile search: no upper bracket");
    }
  }
  // Halve until lo and hi are adjacent doubles (at least 80 halvings from a
  // unit bracket), so F(hi-) <= s < F(hi) holds in floating point.
  for (int i = 0; i < 4000; ++i) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (pred(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

std::string with_param(const std::string& name, const std::string& key, double v) {
  return name + ":" + key + "=" + format_double(v);
}

class NormalLaw final : public Law {
 public:
  std::string id() const override { return "normal"; }
  double cdf(double t) const override { return num::normal_cdf(t); }
  double sf(double t) const override { return num::normal_sf(t); }
  Support support() const override { return {-kInf, kInf}; }
  bool has_density() const override { return true; }
  double density(double t) const override { return num::normal_pdf(t); }
  double log_density(double t) const override { return num::log_normal_pdf(t); }
  std::optional<double> quantile(double s) const override { return num::normal_quantile(s); }
  double upper_quantile_log(double log_q) const override {
    if (log_q > -kLog2) return -upper_quantile_log(std::log(-std::expm1(log_q)));
    if (log_q > -700.0) return num::normal_quantile_upper(std::exp(log_q));
    return num::bisect_root([&](double z) { return num::log_normal_sf(z) - log_q; }, 30.0,
                            std::sqrt(-4.0 * log_q) + 1.0, 0.0);
  }
  double lower_quantile_log(double log_p) const override { return -upper_quantile_log(log_p); }
  bool symmetric() const override { return true; }
  std::optional<double> mean() const override { return 0.0; }
  double sample(Rng& rng) const override { return rng.normal(); }
};

class Uniform01Law final : public Law {
 public:
  std::string id() const override { return "uniform01"; }
  double cdf(double t) const override { return std::clamp(t, 0.0, 1.0); }
  Support support() const override { return {0.0, 1.0}; }
  bool has_density() const override { return true; }
  double density(double t) const override { return (t >= 0.0 && t <= 1.0) ? 1.0 : 0.0; }
  std::optional<double> quantile(double s) const override { return s; }
  double upper_quantile_log(double log_q) const override { return -std::expm1(log_q); }
  double lower_quantile_log(double log_p) const override { return std::exp(log_p); }
  std::optional<double> mean() const override { return 0.5; }
  double sample(Rng& rng) const override { return rng.uniform(); }
};

class ExponentialLaw final : public Law {
 public:
  std::string id() const override { return "exp"; }
  double cdf(double t) const override { return t <= 0.0 ? 0.0 : -std::expm1(-t); }
  double sf(double t) const override { return t <= 0.0 ? 1.0 : std::exp(-t); }
  Support support() const override { return {0.0, kInf}; }
  bool has_density() const override { return true; }
  double density(double t) const override { return t < 0.0 ? 0.0 : std::exp(-t); }
  double log_density(double t) const override { return t < 0.0 ? -kInf : -t; }
  std::optional<double> quantile(double s) const override { return -std::log1p(-s); }
  double upper_quantile_log(double log_q) const override { return -log_q; }
  double lower_quantile_log(double log_p) const override { return -std::log1p(-std::exp(log_p)); }
  std::optional<double> mean() const override { return 1.0; }
  double sample(Rng& rng) const override { return rng.exponential(); }
};

// Symmetric law given by its one-sided tail P{X > x} = tail(x) / 2, x >= 0.
class SymmetricTailLaw : public Law {
 public:
  double cdf(double t) const override { return t < 0.0 ? half_tail(-t) : 1.0 - half_tail(t); }
  double sf(double t) const override { return t < 0.0 ? 1.0 - half_tail(-t) : half_tail(t); }
  Support support() const override { return {-kInf, kInf}; }
  bool has_density() const override { return true; }
  bool symmetric() const override { return true; }
  std::optional<double> quantile(double s) const override {
    if (s >= 0.5) return upper_quantile_log(std::log1p(-s));
    return -upper_quantile_log(std::log(s));
  }
  double upper_quantile_log(double log_q) const override {
    if (log_q > -kLog2) return -upper_quantile_log(std::log(-std::expm1(log_q)));
    return radius_for_log_tail(log_q + kLog2);
  }
  double lower_quantile_log(double log_p) const override { return -upper_quantile_log(log_p); }
  std::optional<double> mean() const override { return 0.0; }
  double sample(Rng& rng) const override {
    const double r = radius_for_log_tail(std::log(rng.uniform()));
    return rng.rademacher() * r;
  }

 protected:
  // P{|X| > x} and its inverse in log form.
  virtual double two_sided_tail(double x) const = 0;
  virtual double radius_for_log_tail(double log_tail) const = 0;

 private:
  double half_tail(double x) const { return 0.5 * two_sided_tail(x); }
};

class LaplaceLaw final : public SymmetricTailLaw {
 public:
  std::string id() const override { return "laplace"; }
  double density(double t) const override { return 0.5 * std::exp(-std::abs(t)); }
  double log_density(double t) const override { return -kLog2 - std::abs(t); }

 protected:
  double two_sided_tail(double x) const override { return std::exp(-x); }
  double radius_for_log_tail(double log_tail) const override { return -log_tail; }
};

class WeibullSymLaw final : public SymmetricTailLaw {
 public:
  WeibullSymLaw(double q, double scale) : q_(q), c_(scale) {
    if (!(q > 0.0) || !(scale > 0.0)) throw std::invalid_argument("weibull_sym: need q, scale > 0");
  }
  std::string id() const override {
    std::string s = with_param("weibull_sym", "q", q_);
    if (c_ != 1.0) s += ",scale=" + format_double(c_);
    return s;
  }
  double density(double t) const override { return std::exp(log_density(t)); }
  double log_density(double t) const override {
    const double u = c_ * std::abs(t);
    if (u == 0.0) {
      if (q_ < 1.0) return kInf;
      if (q_ > 1.0) return -kInf;
    }
    return -kLog2 + std::log(q_ * c_) + (q_ - 1.0) * std::log(u) - std::pow(u, q_);
  }

 protected:
  double two_sided_tail(double x) const override { return std::exp(-std::pow(c_ * x, q_)); }
  double radius_for_log_tail(double log_tail) const override {
    return std::pow(-log_tail, 1.0 / q_) / c_;
  }

 private:
  double q_, c_;
};

class PolyTailLaw final : public SymmetricTailLaw {
 public:
  PolyTailLaw(double q, double scale) : q_(q), c_(scale) {
    if (!(q > 0.0) || !(scale > 0.0)) throw std::invalid_argument("poly_tail: need q, scale > 0");
  }
  std::string id() const override {
    std::string s = with_param("poly_tail", "q", q_);
    if (c_ != 1.0) s += ",scale=" + format_double(c_);
    return s;
  }
  double density(double t) const override { return std::exp(log_density(t)); }
  double log_density(double t) const override {
    return -kLog2 + std::log(q_ * c_) - (q_ + 1.0) * std::log1p(c_ * std::abs(t));
  }
  std::optional<double> mean() const override {
    if (q_ > 1.0) return 0.0;
    return std::nullopt;
  }

 protected:
  double two_sided_tail(double x) const override { return std::pow(c_ * x + 1.0, -q_); }
  double radius_for_log_tail(double log_tail) const override {
    return std::expm1(-log_tail / q_) / c_;
  }

 private:
  double q_, c_;
};

class GeneralizedGaussianLaw final : public SymmetricTailLaw {
 public:
  explicit GeneralizedGaussianLaw(double q) : q_(q) {
    if (!(q > 0.0)) throw std::invalid_argument("generalized_gaussian: need q > 0");
    log_norm_ = -kLog2 - num::lgamma(1.0 + 1.0 / q);
  }
  std::string id() const override { return with_param("gen_gauss", "q", q_); }
  double density(double t) const override { return std::exp(log_density(t)); }
  double log_density(double t) const override { return log_norm_ - std::pow(std::abs(t), q_); }

 protected:
  double two_sided_tail(double x) const override {
    return num::gamma_q(1.0 / q_, std::pow(x, q_));
  }
  double radius_for_log_tail(double log_tail) const override {
    const double a = 1.0 / q_;
    if (log_tail > -700.0) return std::pow(num::gamma_q_inv(a, std::exp(log_tail)), a);
    // Leading asymptotics of Q(a, y) for large y.
    const double lga = num::lgamma(a);
    auto log_q = [&](double y) {
      double term = 1.0, series = 1.0;
      for (int k = 1; k < 12; ++k) {
        term *= (a - k) / y;
        series += term;
      }
      return (a - 1.0) * std::log(y) - y - lga + std::log(series);
    };
    const double y = num::bisect_root([&](double y) { return log_q(y) - log_tail; }, 500.0,
                                      -4.0 * log_tail + 1e3, 0.0);
    return std::pow(y, a);
  }

 private:
  double q_;
  double log_norm_;
};

class DiscreteLaw final : public Law {
 public:
  DiscreteLaw(std::vector<std::pair<double, double>> atoms, std::string name)
      : name_(std::move(name)) {
    std::map<double, double> merged;
    double total = 0.0;
    for (const auto& [x, w] : atoms) {
      if (!(w >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("discrete: bad atom");
      merged[x] += w;
      total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("discrete: zero total mass");
    double cum = 0.0;
    for (const auto& [x, w] : merged) {
      if (w == 0.0) continue;
      atoms_.emplace_back(x, w / total);
      cum += w / total;
      cum_.push_back(cum);
    }
    cum_.back() = 1.0;
  }
  std::string id() const override {
    if (!name_.empty()) return name_;
    std::string s = "discrete:";
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (i) s += ";";
      s += format_double(atoms_[i].first) + "@" + format_double(atoms_[i].second);
    }
    return s;
  }
  double cdf(double t) const override {
    const auto it = std::upper_bound(atoms_.begin(), atoms_.end(), t,
                                     [](double v, const auto& a) { return v < a.first; });
    if (it == atoms_.begin()) return 0.0;
    return cum_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
  }
  Support support() const override { return {atoms_.front().first, atoms_.back().first}; }
  std::optional<double> quantile(double s) const override {
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
    if (it == cum_.end()) return atoms_.back().first;
    return atoms_[static_cast<std::size_t>(it - cum_.begin())].first;
  }
  bool symmetric() const override {
    for (std::size_t i = 0, j = atoms_.size() - 1; i <= j && j < atoms_.size(); ++i, --j) {
      if (std::abs(atoms_[i].first + atoms_[j].first) > 1e-14 * (1.0 + std::abs(atoms_[i].first)))
        return false;
      if (std::abs(atoms_[i].second - atoms_[j].second) > 1e-14) return false;
      if (j == 0) break;
    }
    return true;
  }
  std::optional<double> mean() const override {
    double m = 0.0;
    for (const auto& [x, w] : atoms_) m += x * w;
    return m;
  }
  std::vector<std::pair<double, double>> atoms() const override { return atoms_; }
  double sample(Rng& rng) const override { return *quantile(rng.uniform()); }

 private:
  std::vector<std::pair<double, double>> atoms_;
  std::vector<double> cum_;
  std::string name_;
};

class TailSurrogateLaw final : public Law {
 public:
  TailSurrogateLaw(std::function<double(double)> env, std::string name)
      : env_(std::move(env)), name_(std::move(name)) {}
  std::string id() const override { return "surrogate:" + name_; }
  double cdf(double t) const override { return 1.0 - sf(t); }
  double sf(double t) const override {
    if (t < 0.0) return 1.0;
    return std::clamp(env_(t), 0.0, 1.0);
  }
  Support support() const override { return {0.0, kInf}; }

 private:
  std::function<double(double)> env_;
  std::string name_;
};

}  // namespace

double Law::log_density(double t) const {
  const double d = density(t);
  return d > 0.0 ? std::log(d) : -kInf;
}

double Law::generic_quantile(double s) const {
  return monotone_search([&](double t) { return cdf(t) > s; }, support());
}

double Law::lower_quantile_log(double log_p) const {
  const double s = std::exp(log_p);
  if (auto q = quantile(s)) return *q;
  return generic_quantile(s);
}

double Law::upper_quantile_log(double log_q) const {
  const double q = std::exp(log_q);
  const double s = 1.0 - q;
  if (s < 1.0 && q > 1e-12) {
    if (auto v = quantile(s)) return *v;
    return generic_quantile(s);
  }
  return monotone_search([&](double t) { return sf(t) < q; }, support());
}

double Law::sample(Rng& rng) const {
  const double u = rng.uniform();
  if (auto q = quantile(u)) return *q;
  return generic_quantile(u);
}

Distribution1D::Distribution1D(std::shared_ptr<const Law> law) : law_(std::move(law)) {
  if (!law_) throw std::invalid_argument("Distribution1D: null law");
}

std::optional<double> Distribution1D::density(double t) const {
  if (!law_->has_density()) return std::nullopt;
  return law_->density(t);
}

double Distribution1D::quantile(double s) const {
  if (!(s > 0.0 && s < 1.0)) throw PreconditionError("quantile: s must lie in (0,1)");
  if (auto q = law_->quantile(s)) return *q;
  return generalized_inverse(*this, s);
}

double Distribution1D::quantile_upper(double q) const {
  if (!(q > 0.0 && q < 1.0)) throw PreconditionError("quantile_upper: q must lie in (0,1)");
  return law_->upper_quantile_log(std::log(q));
}

double Distribution1D::quantile_lip(double s) const {
  if (!law_->has_density()) return kInf;
  const double d = law_->density(quantile(s));
  return d > 0.0 ? 1.0 / d : kInf;
}

double Distribution1D::transport(double z) const {
  if (std::isinf(z)) return z > 0 ? support().hi : support().lo;
  if (z >= 0.0) return law_->upper_quantile_log(num::log_normal_sf(z));
  return law_->lower_quantile_log(num::log_normal_sf(-z));
}

double Distribution1D::transport_lip(double z) const {
  if (!law_->has_density()) return kInf;
  const double ld = law_->log_density(transport(z));
  if (ld == -kInf) return kInf;
  return std::exp(num::log_normal_pdf(z) - ld);
}

Distribution1D normal() { return Distribution1D(std::make_shared<NormalLaw>()); }
Distribution1D uniform01() { return Distribution1D(std::make_shared<Uniform01Law>()); }
Distribution1D exponential() { return Distribution1D(std::make_shared<ExponentialLaw>()); }
Distribution1D laplace() { return Distribution1D(std::make_shared<LaplaceLaw>()); }
Distribution1D weibull_sym(double q, double scale) {
  return Distribution1D(std::make_shared<WeibullSymLaw>(q, scale));
}
Distribution1D poly_tail(double q, double scale) {
  return Distribution1D(std::make_shared<PolyTailLaw>(q, scale));
}
Distribution1D generalized_gaussian(double q) {
  return Distribution1D(std::make_shared<GeneralizedGaussianLaw>(q));
}
Distribution1D point_mass(double x) {
  return Distribution1D(
      std::make_shared<DiscreteLaw>(std::vector<std::pair<double, double>>{{x, 1.0}},
                                    "point:x=" + format_double(x)));
}
Distribution1D rademacher() {
  return Distribution1D(std::make_shared<DiscreteLaw>(
      std::vector<std::pair<double, double>>{{-1.0, 0.5}, {1.0, 0.5}}, "rademacher"));
}
Distribution1D discrete(std::vector<std::pair<double, double>> atoms) {
  return Distribution1D(std::make_shared<DiscreteLaw>(std::move(atoms), ""));
}
Distribution1D tail_surrogate(std::function<double(double)> envelope, std::string name) {
  return Distribution1D(std::make_shared<TailSurrogateLaw>(std::move(envelope), std::move(name)));
}

Distribution1D parse_law(const std::string& id) {
  const auto colon = id.find(':');
  const std::string head = id.substr(0, colon);
  std::map<std::string, double> kv;
  if (colon != std::string::npos) {
    std::stringstream ss(id.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("bad law parameter in '" + id + "'");
      kv[item.substr(0, eq)] = parse_double(item.substr(eq + 1));
    }
  }
  auto need = [&](const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw std::invalid_argument("law '" + id + "' needs parameter " + key);
    return it->second;
  };
  auto opt = [&](const std::string& key, double dflt) {
    const auto it = kv.find(key);
    return it == kv.end() ? dflt : it->second;
  };
  if (head == "normal") return normal();
  if (head == "uniform01") return uniform01();
  if (head == "exp") return exponential();
  if (head == "laplace") return laplace();
  if (head == "rademacher") return rademacher();
  if (head == "weibull_sym") return weibull_sym(need("q"), opt("scale", 1.0));
  if (head == "poly_tail") return poly_tail(need("q"), opt("scale", 1.0));
  if (head == "gen_gauss") return generalized_gaussian(need("q"));
  if (head == "point") return point_mass(need("x"));
  throw std::invalid_argument("unknown law identifier '" + id + "'");
}

double generalized_inverse(const Distribution1D& dist, double s) {
  if (!(s > 0.0 && s < 1.0)) throw PreconditionError("generalized_inverse: s must lie in (0,1)");
  return monotone_search([&](double t) { return dist.cdf(t) > s; }, dist.support());
}

double h_q(double q, double t) {
  if (t == 0.0) return 0.0;
  const Distribution1D gg = generalized_gaussian(q);
  const double v = gg.transport(std::abs(t));
  return t < 0.0 ? -v : v;
}

double h_q_prime(double q, double t) {
  const Distribution1D gg = generalized_gaussian(q);
  const double h = h_q(q, t);
  return std::exp(num::log_normal_pdf(t) - gg.law().log_density(h));
}

std::vector<double> transport_map(const std::vector<Distribution1D>& laws,
                                  const std::vector<double>& x) {
  if (laws.size() != x.size()) throw PreconditionError("transport_map: length mismatch");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = laws[i].transport(x[i]);
  return out;
}

SampleBatch sample(const std::vector<Distribution1D>& laws, std::size_t n, std::size_t m,
                   std::uint64_t seed) {
  if (n == 0 || m == 0) throw PreconditionError("sample: n and m must be >= 1");
  if (laws.size() != 1 && laws.size() != n)
    throw PreconditionError("sample: need one law or one law per coordinate");
  SampleBatch batch;
  batch.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < n; ++i) batch.laws.push_back(laws[laws.size() == 1 ? 0 : i].id());
  batch.seed = seed;
  batch.streams = "column";
  parallel_for(m, [&](std::size_t j) {
    Rng rng(seed, j);
    for (std::size_t i = 0; i < n; ++i)
      batch.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          laws[laws.size() == 1 ? 0 : i].sample(rng);
  });
  return batch;
}

void draw_ball_q(Rng& rng, double q, Eigen::Ref<Eigen::VectorXd> out) {
  const double a = 1.0 / q;
  double s = 0.0;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    // |Y_i|^q ~ Gamma(1/q, 1) for the density proportional to exp(-|y|^q).
    const double g = rng.gamma(a);
    s += g;
    out[i] = rng.rademacher() * std::pow(g, a);
  }
  const double w = rng.exponential();
  out /= std::pow(w + s, a);
}

SampleBatch sample_ball_q(std::size_t n, double q, std::size_t m, std::uint64_t seed) {
  if (n == 0 || m == 0) throw PreconditionError("sample_ball_q: n and m must be >= 1");
  if (!(q > 0.0)) throw PreconditionError("sample_ball_q: q must be positive");
  SampleBatch batch;
  batch.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  batch.laws.assign(n, "ball:q=" + format_double(q));
  batch.seed = seed;
  batch.streams = "column";
  parallel_for(m, [&](std::size_t j) {
    Rng rng(seed, j);
    draw_ball_q(rng, q, batch.values.col(static_cast<Eigen::Index>(j)));
  });
  return batch;
}

std::string to_csv(const SampleBatch& batch) {
  std::string out;
  for (std::size_t i = 0; i < batch.laws.size(); ++i) {
    if (i) out += ',';
    const std::string& id = batch.laws[i];
    out += id.find(',') == std::string::npos ? id : "\"" + id + "\"";
  }
  out += '\n';
  for (Eigen::Index j = 0; j < batch.values.cols(); ++j) {
    for (Eigen::Index i = 0; i < batch.values.rows(); ++i) {
      if (i) out += ',';
      out += format_double(batch.values(i, j));
    }
    out += '\n';
  }
  return out;
}

}  // namespace conclab::dist
