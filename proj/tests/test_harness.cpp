#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "conclab/distributions.hpp"
#include "conclab/harness.hpp"
#include "conclab/numerics.hpp"
#include "conclab/parallel.hpp"
#include "conclab/stats.hpp"
#include "json.hpp"

using namespace conclab;
using namespace conclab::harness;

namespace {

ExperimentConfig lpn_config(int n, double p, long long trials, std::uint64_t seed) {
  ExperimentConfig c;
  c.name = "lpn";
  c.sampler.n = n;
  c.statistic.kind = "lp_sum";
  c.statistic.p = p;
  c.bound.theorem = "lpn_gauss";
  c.bound.params = {{"p", p}};
  c.bound.grid = "theorem_t";
  c.t_grid = {1.0, 2.0, 3.0};
  c.trials = trials;
  c.seed = seed;
  return c;
}

ExperimentConfig weibull_config(long long trials) {
  ExperimentConfig c;
  c.name = "weibull";
  c.sampler.law = "weibull_sym:q=0.5";
  c.sampler.n = 100;
  c.statistic.kind = "linear";
  c.bound.theorem = "weibull_linear";
  c.bound.params = {{"q", 0.5}};
  c.t_grid = {2, 4, 8, 12, 16};
  c.trials = trials;
  c.seed = 21;
  return c;
}

std::size_t count_substr(const std::string& s, const std::string& needle) {
  std::size_t count = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++count;
  return count;
}

}  // namespace

// --- configs ---------------------------------------------------------------------

TEST(HarnessConfig, ValidationRejectsBadConfigs) {
  ExperimentConfig ok = weibull_config(1000);
  EXPECT_NO_THROW(validate(ok));
  auto bad = ok;
  bad.trials = 999;
  EXPECT_THROW(validate(bad), PreconditionError);
  bad = ok;
  bad.t_grid.clear();
  EXPECT_THROW(validate(bad), PreconditionError);
  bad = ok;
  bad.t_grid = {1, 3, 2};
  EXPECT_THROW(validate(bad), PreconditionError);
  bad = ok;
  bad.bound.theorem = "no_such_theorem";
  EXPECT_THROW(validate(bad), PreconditionError);
  bad = ok;
  bad.sampler.law = "no_such_law";
  EXPECT_ANY_THROW(validate(bad));
  bad = ok;
  bad.bound.grid = "theorem_t";
  EXPECT_THROW(validate(bad), PreconditionError);
  bad = ok;
  bad.bound.params.clear();
  EXPECT_THROW(validate(bad), PreconditionError);
  bad = ok;
  bad.statistic.kind = "custom";
  bad.statistic.custom_id = "unregistered";
  EXPECT_THROW(validate(bad), PreconditionError);

  ExperimentConfig ball;
  ball.sampler.ball_q = 2.0;
  ball.sampler.n = 64;
  ball.statistic.kind = "lp_norm";
  ball.bound.theorem = "lp_on_lq_ball";
  ball.bound.params = {{"p", 1}, {"q", 2}};
  ball.t_grid = {1.0, 8.0};
  EXPECT_NO_THROW(validate(ball));
  ball.t_grid = {1.0, 8.5};  // n^{1/p - 1/q} = 8
  EXPECT_THROW(validate(ball), PreconditionError);
}

TEST(HarnessConfig, JsonRoundTrip) {
  ExperimentConfig c = lpn_config(64, 1.5, 2000, 9);
  c.calibrated = true;
  c.constants.set("lpn_gauss.C_prob", 1.5);
  const std::string text = config_to_json(c);
  const ExperimentConfig back = parse_config(text);
  EXPECT_EQ(config_to_json(back), text);
  EXPECT_TRUE(back.calibrated);
  EXPECT_EQ(back.constants.get("lpn_gauss.C_prob"), 1.5);
  EXPECT_THROW(parse_config("{not json"), PreconditionError);
  EXPECT_THROW(parse_config("{\"name\": \"x\"}"), PreconditionError);
}

// --- statistics and sampling ----------------------------------------------------------

TEST(HarnessStatistic, RegisteredStatistics) {
  Eigen::VectorXd x(4);
  x << 1.0, -2.0, 0.5, 0.0;
  StatisticSpec s;
  s.kind = "linear";
  EXPECT_NEAR(evaluate_statistic(s, x), -0.25, 1e-15);
  s.a = {1, 0, 2, 5};
  EXPECT_NEAR(evaluate_statistic(s, x), 2.0, 1e-15);
  s = {};
  s.kind = "lp_sum";
  s.p = 3.0;
  EXPECT_NEAR(evaluate_statistic(s, x), 1 + 8 + 0.125, 1e-14);
  s.kind = "lp_norm";
  EXPECT_NEAR(evaluate_statistic(s, x), std::cbrt(9.125), 1e-14);
  s.kind = "max_abs";
  EXPECT_EQ(evaluate_statistic(s, x), 2.0);
  s.kind = "custom";
  s.custom_id = "euclidean_norm";
  EXPECT_NEAR(evaluate_statistic(s, x), std::sqrt(5.25), 1e-15);
  s.custom_id = "soft_max";
  EXPECT_NEAR(evaluate_statistic(s, x), std::log(std::exp(1.0) + std::exp(-2.0) + std::exp(0.5) + 1.0), 1e-14);
  s.kind = "lp_of_transport";
  s.p = 2.0;
  s.law = "normal";
  EXPECT_NEAR(evaluate_statistic(s, x), std::sqrt(5.25), 1e-9);
  s.law = "exp";
  const auto law = dist::exponential();
  double expected = 0.0;
  for (double v : {1.0, -2.0, 0.5, 0.0}) expected += std::pow(law.transport(v), 2);
  EXPECT_NEAR(evaluate_statistic(s, x), std::sqrt(expected), 1e-12);
}

TEST(HarnessStatistic, SimulationIndependentOfWorkerCount) {
  ExperimentConfig c = weibull_config(1000);
  set_worker_count(1);
  const auto serial = simulate(c.sampler, c.statistic, 3000, 5);
  set_worker_count(4);
  const auto parallel = simulate(c.sampler, c.statistic, 3000, 5);
  set_worker_count(0);
  EXPECT_EQ(serial, parallel);
  EXPECT_NE(serial, simulate(c.sampler, c.statistic, 3000, 6));
}

// --- verification ----------------------------------------------------------------------

TEST(HarnessVerify, CalibratedRawLpnPasses) {
  ExperimentConfig c = lpn_config(1024, 1.0, 5000, 33);
  c.statistic.kind = "lp_norm";  // equal to the raw sum at p = 1
  c.calibrated = true;
  const auto report = verify_bound(c);
  EXPECT_TRUE(report.all_pass());
  EXPECT_TRUE(report.calibration.calibrated);
  EXPECT_EQ(report.calibration.key, "lpn_gauss.C");
  EXPECT_NE(report.calibration.fit_seed, report.calibration.verify_seed);
  EXPECT_NE(report.calibration.calib_id.find("lpn_gauss.C="), std::string::npos);
}

TEST(HarnessVerify, RowsComeFromVerificationSplit) {
  ExperimentConfig c = weibull_config(4000);
  c.calibrated = true;
  const auto report = verify_bound(c);
  auto values = simulate(c.sampler, c.statistic, c.trials, report.calibration.verify_seed);
  const double median = stats::median(values);
  EXPECT_EQ(report.median, median);
  CalibrationSet calib;
  calib.set(report.calibration.key, report.calibration.value);
  const auto curve = make_curve(c.bound, c.sampler.n, c.statistic, calib);
  for (const Row& row : report.rows) {
    std::size_t hits = 0;
    for (double v : values) hits += std::abs(v - median) > row.t;
    EXPECT_EQ(row.empirical, static_cast<double>(hits) / c.trials);
    EXPECT_EQ(row.bound, curve(row.t));
    const auto ci = stats::wilson(hits, c.trials);
    EXPECT_EQ(row.ci_lo, ci.lo);
    EXPECT_EQ(row.pass, row.bound >= ci.lo);
  }
  EXPECT_TRUE(report.all_pass());
  // The fitted constant clears the fitting split's upper limits.
  const auto fit_values = simulate(c.sampler, c.statistic, c.trials, report.calibration.fit_seed);
  const double fit_median = stats::median(fit_values);
  for (double t : c.t_grid) {
    std::size_t hits = 0;
    for (double v : fit_values) hits += std::abs(v - fit_median) > t;
    EXPECT_GE(curve(t), stats::wilson(hits, c.trials).hi);
  }
}

TEST(HarnessVerify, UnitConstantsCanFail) {
  // E X^2 = 24 for this law, so exp(-t^2) is far too small at moderate t.
  const auto report = verify_bound(weibull_config(4000));
  EXPECT_FALSE(report.all_pass());
  EXPECT_FALSE(report.calibration.calibrated);
  EXPECT_EQ(report.calibration.verify_seed, report.seed);
}

TEST(HarnessVerify, DefaultConstantsSufficeForGaussianSums) {
  for (double p : {1.0, 3.0}) {
    const auto report = verify_bound(lpn_config(4096, p, 2000, 44));
    EXPECT_TRUE(report.all_pass()) << p;
  }
}

TEST(HarnessVerify, Deterministic) {
  ExperimentConfig c = weibull_config(2000);
  c.calibrated = true;
  const auto a = verify_bound(c);
  const auto b = verify_bound(c);
  EXPECT_EQ(report_json(a), report_json(b));
  EXPECT_EQ(report_csv(a), report_csv(b));
  c.seed += 1;
  EXPECT_NE(report_csv(verify_bound(c)), report_csv(a));
}

// --- reports -----------------------------------------------------------------------------

TEST(HarnessReport, CsvRoundTripAndSvgShape) {
  ExperimentConfig c = weibull_config(2000);
  c.calibrated = true;
  const auto report = verify_bound(c);
  const std::string csv = report_csv(report);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,empirical,ci_lo,ci_hi,bound,pass");
  EXPECT_EQ(rows_to_csv(parse_rows_csv(csv)), csv);
  const std::string svg = report_svg(report);
  EXPECT_EQ(count_substr(svg, "<polyline"), 2u);
  EXPECT_EQ(count_substr(svg, "class=\"bound\""), 1u);
  const auto parsed = nlohmann::json::parse(report_json(report));
  EXPECT_EQ(parsed["rows"].size(), c.t_grid.size());
  EXPECT_EQ(parsed["all_pass"].get<bool>(), report.all_pass());
  EXPECT_FALSE(parsed.contains("runtime_seconds"));
  EXPECT_THROW(parse_rows_csv("t,wrong\n"), std::invalid_argument);
}

TEST(HarnessReport, EmitWritesFilesAndReportsUnwritablePaths) {
  const auto report = verify_bound(lpn_config(256, 1.0, 1000, 3));
  const auto dir = std::filesystem::path(::testing::TempDir());
  const std::string path = (dir / "conclab_report.csv").string();
  emit_report(report, ReportFormat::csv, path);
  std::ifstream in(path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(text, report_csv(report));
  EXPECT_THROW(emit_report(report, ReportFormat::json, "/nonexistent-dir/x/report.json"), std::runtime_error);
}

// --- Gaussian convex order --------------------------------------------------------------------

TEST(Pisier, LinearSquareExactValues) {
  const auto r = pisier_check("linear", "square", 10, 200000, 8);
  EXPECT_NEAR(r.lhs, 2.0, 3.0 * r.lhs_se);
  EXPECT_NEAR(r.rhs, num::kPi * num::kPi / 4.0, 3.0 * r.rhs_se);
  EXPECT_NEAR(r.ratio, 8.0 / (num::kPi * num::kPi), 3.0 * r.ratio_se);
  EXPECT_TRUE(r.pass);
}

TEST(Pisier, ConstantFunction) {
  const auto r = pisier_check("constant", "cosh", 5, 1000, 1);
  EXPECT_EQ(r.lhs, 1.0);
  EXPECT_EQ(r.rhs, 1.0);
  EXPECT_TRUE(r.pass);
}

TEST(Pisier, NonlinearFunctions) {
  EXPECT_TRUE(pisier_check("euclidean_norm", "quartic", 50, 100000, 2).pass);
  EXPECT_TRUE(pisier_check("soft_max", "square", 20, 100000, 3).pass);
  EXPECT_TRUE(pisier_check("euclidean_norm", "abs", 5, 100000, 4).pass);
  EXPECT_THROW(pisier_check("unregistered", "square", 5, 10, 1), PreconditionError);
  EXPECT_THROW(pisier_check("linear", "concave", 5, 10, 1), PreconditionError);
  const auto parsed = nlohmann::json::parse(to_json(pisier_check("linear", "abs", 3, 100, 1)));
  EXPECT_TRUE(parsed.contains("ratio_se"));
}

// --- rotations -----------------------------------------------------------------------------

TEST(Rotation, HaarIsSpecialOrthogonal) {
  Rng rng(12);
  for (int n : {1, 2, 7, 40}) {
    const Eigen::MatrixXd u = haar_rotation(n, rng);
    EXPECT_LT((u.transpose() * u - Eigen::MatrixXd::Identity(n, n)).norm(), 1e-10);
    EXPECT_NEAR(u.determinant(), 1.0, 1e-10);
  }
}

TEST(Rotation, HaarEntryMoments) {
  const int n = 5, draws = 4000;
  std::vector<double> first, square;
  for (int d = 0; d < draws; ++d) {
    Rng rng(77, d);
    const Eigen::MatrixXd u = haar_rotation(n, rng);
    first.push_back(u(0, 0));
    square.push_back(u(2, 3) * u(2, 3));
  }
  const auto m1 = stats::mean_se(first), m2 = stats::mean_se(square);
  EXPECT_NEAR(m1.mean, 0.0, 3.0 * m1.se);
  EXPECT_NEAR(m2.mean, 1.0 / n, 3.0 * m2.se);
}

TEST(Rotation, IdentityShowsOneDimensionalTail) {
  const double q = 6.0;
  const auto r = experiment_random_rotation(50, q, "first_coordinate", 100000, 5, true, {std::sqrt(2 * std::log(100.0))});
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_NEAR(r.rows[0].probability, 0.01, 1e-12);
  const double own = dist::poly_tail(q, r.scale).quantile(0.995);
  EXPECT_GE(r.rows[0].quantile, 0.9 * own);
}

TEST(Rotation, RandomRotationScale) {
  const auto r = experiment_random_rotation(500, 6.0, "first_coordinate", 20000, 6);
  EXPECT_NEAR(r.p, 0.5 * (1.5 + 3.0), 1e-15);
  const auto it = std::find_if(r.rows.begin(), r.rows.end(), [](const RotationRow& row) { return row.lambda == 2.0; });
  ASSERT_NE(it, r.rows.end());
  EXPECT_GT(it->ratio, 0.2);
  EXPECT_LT(it->ratio, 5.0);
  for (const auto& row : r.rows) {
    const double cap = std::min(std::pow(500.0, 0.5 - 0.5 / r.p - 1.0 / 6.0) / row.lambda,
                                std::pow(500.0, 0.5 / r.p - 1.0 / 6.0));
    EXPECT_EQ(row.in_range, std::exp(row.lambda * row.lambda / 12.0) <= cap);
  }
  EXPECT_THROW(experiment_random_rotation(10, 4.0, "first_coordinate", 100, 1), PreconditionError);
  EXPECT_THROW(experiment_random_rotation(10, 6.0, "unregistered", 100, 1), PreconditionError);
  EXPECT_FALSE(nlohmann::json::parse(to_json(r))["rows"].empty());
}
