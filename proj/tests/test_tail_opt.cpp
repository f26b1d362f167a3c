#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "conclab/numerics.hpp"
#include "conclab/tail_opt.hpp"

namespace {

using namespace conclab;
using conclab::tail::regularity_constants;

// Independent hinge value for the standard normal: E(Y - u)_+ = pdf(u) - u sf(u).
double normal_hinge(double t, double a) {
  const double u = t - 1.0 / a;
  const double pdf = std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
  const double sf = 0.5 * std::erfc(u / std::sqrt(2.0));
  return a * (pdf - u * sf);
}

double golden_min_log_slope(double t) {
  double lo = std::log(1e-3), hi = std::log(1e3);
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  // Coarse scan, then golden section around the best grid point.
  double best = lo, best_v = 1e300;
  for (int i = 0; i <= 2000; ++i) {
    const double x = lo + (hi - lo) * i / 2000.0;
    const double v = normal_hinge(t, std::exp(x));
    if (v < best_v) best_v = v, best = x;
  }
  double a = best - (hi - lo) / 1000.0, b = best + (hi - lo) / 1000.0;
  for (int i = 0; i < 200; ++i) {
    const double c = b - phi * (b - a), d = a + phi * (b - a);
    if (normal_hinge(t, std::exp(c)) < normal_hinge(t, std::exp(d))) b = d;
    else a = c;
  }
  return std::exp(0.5 * (a + b));
}

TEST(OptimalMarkov, ExponentialClosedForm) {
  const auto w = tail::optimal_markov(dist::exponential(), 2.0);
  EXPECT_NEAR(w.slope, 1.0, 1e-9);
  EXPECT_NEAR(w.bound_value, std::exp(-1.0), 1e-9);
}

TEST(OptimalMarkov, NormalMatchesGridSearch) {
  const auto w = tail::optimal_markov(dist::normal(), 2.0);
  const double oracle = golden_min_log_slope(2.0);
  EXPECT_NEAR(w.slope / oracle, 1.0, 1e-4);
  EXPECT_NEAR(w.bound_value, normal_hinge(2.0, oracle), 1e-9);
}

TEST(OptimalMarkov, BoundEqualsHingeExpectationAndBeatsTrueTail) {
  const std::vector<dist::Distribution1D> laws = {dist::normal(), dist::exponential(),
                                                  dist::laplace(), dist::weibull_sym(1.5, 1.0),
                                                  dist::uniform01()};
  for (const auto& law : laws) {
    for (double t : {0.7, 1.5, 2.5}) {
      if (t >= law.support().hi || t <= *law.mean()) continue;
      const auto w = tail::optimal_markov(law, t);
      SCOPED_TRACE(law.id() + " t=" + std::to_string(t));
      EXPECT_NEAR(w.bound_value, tail::hinge_expectation(law, t, w.slope), 1e-9);
      EXPECT_GE(w.bound_value, law.sf(t) - 1e-12);
      EXPECT_LE(w.bound_value, 1.0 + 1e-12);
    }
  }
}

TEST(OptimalMarkov, NeverWorseThanFirstMomentOnNonnegativeLaws) {
  for (double t : {1.5, 2.0, 4.0, 8.0}) {
    const auto w = tail::optimal_markov(dist::exponential(), t);
    EXPECT_LE(w.bound_value, 1.0 / t + 1e-12);
  }
}

TEST(OptimalMarkov, DominatesOtherConvexWitnesses) {
  const std::vector<dist::Distribution1D> laws = {dist::normal(), dist::exponential(),
                                                  dist::laplace()};
  for (const auto& law : laws) {
    for (double t : {1.5, 2.0, 3.0}) {
      const auto w = tail::optimal_markov(law, t);
      const double pdf_cut = law.quantile(1e-16);
      const double hi = law.quantile_upper(1e-16);
      auto expect = [&](auto phi) {
        const std::function<double(double)> f = [&](double x) {
          return phi(x) * law.density(x).value_or(0.0);
        };
        return num::integrate_split(f, pdf_cut, hi, {0.0}, 1e-12).value;
      };
      for (double c : {-1.0, 0.0, 0.5 * t}) {
        auto sq = [c](double x) { return x > c ? (x - c) * (x - c) : 0.0; };
        EXPECT_GE(expect(sq) / sq(t), w.bound_value - 1e-9) << law.id();
      }
      auto ex = [](double x) { return std::exp(0.5 * x); };
      EXPECT_GE(expect(ex) / ex(t), w.bound_value - 1e-9) << law.id();
    }
  }
}

TEST(OptimalMarkov, Preconditions) {
  EXPECT_THROW(tail::optimal_markov(dist::normal(), 0.0), PreconditionError);
  EXPECT_THROW(tail::optimal_markov(dist::exponential(), 0.5), PreconditionError);
  const auto top = tail::optimal_markov(dist::uniform01(), 1.5);
  EXPECT_EQ(top.bound_value, 0.0);
}

// Closed forms of the profile integrals.
double poly_first(double p) { return p * p / ((p - 1.0) * (p - 2.0)); }
double poly_mass(double p) { return p / (p - 1.0); }
double expo_first(double b) { return 1.0 / ((1.0 + b) * (1.0 + 2.0 * b)); }
double expo_mass(double b) { return 1.0 / (1.0 + b); }
// int_{-c}^0 -x (1 - b x)^{1/b} dx via u = 1 - b x.
double expo_left_first(double b, double c) {
  const double r = 1.0 / b;
  auto prim = [&](double u) {
    return (std::pow(u, r + 1.0) / (r + 1.0) - std::pow(u, r + 2.0) / (r + 2.0)) / (b * b);
  };
  return prim(1.0) - prim(1.0 + b * c);
}
// int_{-c}^0 -x (1 + x/p)^{-p} dx via v = 1 + x/p.
double poly_left_first(double p, double c) {
  auto prim = [&](double v) {
    return p * p * (std::pow(v, 2.0 - p) / (2.0 - p) - std::pow(v, 1.0 - p) / (1.0 - p));
  };
  return -(prim(1.0) - prim(1.0 - c / p));
}
double expo_left_mass(double b, double c) {
  return (std::pow(1.0 + b * c, 1.0 / b + 1.0) - 1.0) / (1.0 + b);
}
double poly_left_mass(double p, double c) {
  return p / (p - 1.0) * (std::pow(1.0 - c / p, 1.0 - p) - 1.0);
}

TEST(RegularityConstants, DefiningEquationsHoldInClosedForm) {
  for (double p : {3.0, 5.0, 10.0, 50.0}) {
    for (double b : {-0.9 / p, -0.01, 0.01, 0.05, 0.5, 2.0}) {
      if (b < -1.0 / p) continue;
      const auto rc = regularity_constants(p, b);
      SCOPED_TRACE("p=" + std::to_string(p) + " b=" + std::to_string(b));
      const double c = 1.0 / rc.a_pb, chat = 1.0 / rc.a_hat_pb;
      EXPECT_NEAR(expo_left_first(b, c) / poly_first(p), 1.0, 1e-8);
      EXPECT_NEAR(poly_left_first(p, chat) / expo_first(b), 1.0, 1e-8);
      EXPECT_NEAR(rc.R_sharp, 1.0 + poly_left_mass(p, c) / expo_mass(b), 1e-8 * rc.R_sharp);
      EXPECT_NEAR(rc.R_flat, 1.0 + expo_left_mass(b, chat) / poly_mass(p), 1e-8 * rc.R_flat);
      EXPECT_LE(rc.a_pb, rc.a_hat_pb * (1.0 + 1e-10));
      EXPECT_LE(rc.R_flat, rc.R_sharp * (1.0 + 1e-10));
    }
  }
}

// At b = -1/p both profiles coincide; for p = 3 the intercept 3/2 solves
// int_{1/2}^1 9 (1 - v) v^{-3} dv = 9/2 by hand, and in general it is p/(p-1).
TEST(RegularityConstants, BoundaryCaseIntercept) {
  for (double p : {3.0, 4.0, 7.5}) {
    const auto rc = regularity_constants(p, -1.0 / p);
    EXPECT_NEAR(1.0 / rc.a_pb, p / (p - 1.0), 1e-6);
    EXPECT_NEAR(1.0 / rc.a_hat_pb, p / (p - 1.0), 1e-6);
    EXPECT_NEAR(rc.R_flat, rc.R_sharp, 1e-9);
  }
}

TEST(RegularityConstants, LimitIsEuler) {
  for (double b : {-0.01, 0.01}) {
    const auto rc = regularity_constants(50.0, b);
    EXPECT_NEAR(rc.R_flat, M_E, 0.15);
    EXPECT_NEAR(rc.R_sharp, M_E, 0.15);
  }
  const auto rc = regularity_constants(5.0, 0.05);
  EXPECT_LE(rc.R_flat, rc.R_sharp);
}

TEST(RegularityConstants, MonotoneInParameters) {
  const std::vector<double> ps = {3.0, 6.0, 12.0};
  const std::vector<double> bs = {-0.05, 0.1, 0.6};
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (std::size_t j = 0; j < bs.size(); ++j) {
      const auto rc = regularity_constants(ps[i], bs[j]);
      EXPECT_LE(rc.R_flat, rc.R_sharp);
      if (i + 1 < ps.size()) EXPECT_LT(rc.a_pb, regularity_constants(ps[i + 1], bs[j]).a_pb);
      if (j + 1 < bs.size()) EXPECT_GT(rc.a_pb, regularity_constants(ps[i], bs[j + 1]).a_pb);
    }
  }
}

TEST(RegularityConstants, Preconditions) {
  EXPECT_THROW(regularity_constants(2.0, 0.1), PreconditionError);
  EXPECT_THROW(regularity_constants(4.0, 0.0), PreconditionError);
  EXPECT_THROW(regularity_constants(4.0, -0.3), PreconditionError);
}

TEST(RegularitySandwich, NormalTail) {
  const auto rc = regularity_constants(10.0, 0.5);
  const auto law = dist::normal();
  for (double t : {2.0, 2.5, 3.0}) {
    const auto w = tail::optimal_markov(law, t);
    // Independent quadrature of the density for both the tail and the hinge.
    auto pdf = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); };
    const double tail_prob = num::integrate(pdf, t, num::kInf, 1e-13).value;
    const double u = t - 1.0 / w.slope;
    const double hinge =
        num::integrate([&](double x) { return (w.slope * (x - t) + 1.0) * pdf(x); }, u,
                       num::kInf, 1e-13)
            .value;
    SCOPED_TRACE("t=" + std::to_string(t));
    EXPECT_NEAR(hinge, w.bound_value, 1e-8);
    EXPECT_LE(rc.R_flat * tail_prob, hinge + 1e-8);
    EXPECT_LE(hinge, rc.R_sharp * tail_prob + 1e-8);
    // The optimal slope, rescaled by g'(t) = t, lies between the two constants.
    EXPECT_GE(w.slope, t * rc.a_pb);
    EXPECT_LE(w.slope, t * rc.a_hat_pb);
  }
}

TEST(GradientTail, ConstantXiClosedForm) {
  const double L = 1.3, A = 0.7, T0 = 4.0, t = 9.0, p = 10.0;
  const double c = 4.0 / (M_PI * M_PI * L * L);
  // Exact g''/g'^2 for constant xi is (c x^2 + 1)/(c x^2 - 1)^2, largest at T0.
  const double b = (c * T0 * T0 + 1.0) / std::pow(c * T0 * T0 - 1.0, 2);
  const auto r = tail::tail_from_gradient(A, tail::constant_xi(L), p, b, T0, t);
  ASSERT_TRUE(r.bound.has_value()) << (r.refusal ? r.refusal->message : "");
  EXPECT_NEAR(r.eta_t, 2.0 * t / (M_PI * L), 1e-10);
  const double expected =
      4.0 * (A + 0.5) * r.constants.R_sharp * std::exp(-2.0 * t * t / (M_PI * M_PI * L * L));
  EXPECT_NEAR(*r.bound / expected, 1.0, 1e-9);
}

TEST(GradientTail, RefusesWhenRatioExceedsB) {
  const double L = 1.3, A = 0.7, T0 = 4.0, t = 9.0, p = 10.0;
  const double c = 4.0 / (M_PI * M_PI * L * L);
  const double exact = (c * T0 * T0 + 1.0) / std::pow(c * T0 * T0 - 1.0, 2);
  const auto r = tail::tail_from_gradient(A, tail::constant_xi(L), p, exact - 0.05, T0, t);
  ASSERT_FALSE(r.bound.has_value());
  ASSERT_TRUE(r.refusal.has_value());
  EXPECT_NEAR(r.refusal->x, T0, 1e-9);
  EXPECT_GT(r.refusal->ratio, exact - 0.05);
  EXPECT_FALSE(r.refusal->message.empty());
}

TEST(GradientTail, PreconditionsOnThreshold) {
  const double L = 1.0, A = 0.5;
  const auto xi = tail::constant_xi(L);
  EXPECT_THROW(tail::tail_from_gradient(A, xi, 10.0, 2.0, 3.0, 2.5), PreconditionError);
  // Mass condition fails for a too small T0.
  EXPECT_THROW(tail::tail_from_gradient(A, xi, 10.0, 2.0, 0.1, 5.0), PreconditionError);
}

TEST(GradientTail, EnvelopeLogDensityMatchesQuadraticForConstantXi) {
  const double L = 0.8, A = 1.0;
  const auto xi = tail::constant_xi(L);
  const double k = 2.0 / (M_PI * M_PI * L * L);
  // g(x) = x^2 k - log x + const; compare second differences of the exact form.
  auto exact = [&](double x) { return k * x * x - std::log(x); };
  const double c0 = tail::envelope_log_density(A, xi, 3.0) - exact(3.0);
  for (double x : {1.0, 2.0, 5.0, 9.0})
    EXPECT_NEAR(tail::envelope_log_density(A, xi, x) - exact(x), c0, 1e-10);
}

TEST(GradientTail, SurrogateReproducesEnvelope) {
  for (double power : {0.5, 1.0, 2.0, 3.0}) {
    const auto w = tail::power_exponential_surrogate(power);
    for (double t : {0.1, 0.5, 1.0, 2.0, 3.0})
      EXPECT_EQ(w.sf(t), std::exp(-std::pow(t, power)));
    EXPECT_EQ(w.sf(-1.0), 1.0);
  }
}

}  // namespace
