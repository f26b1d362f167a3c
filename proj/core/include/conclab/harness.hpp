// Monte Carlo verification of (sampler, statistic, bound) triples, the
// Gaussian convex-order check, the random-rotation experiment and report
// emission.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "conclab/bounds.hpp"
#include "conclab/calibration.hpp"
#include "conclab/rng.hpp"

namespace conclab::harness {

// i.i.d. coordinates from a law identifier, or the uniform law on the l_q ball.
struct SamplerSpec {
  std::string law = "normal";
  std::optional<double> ball_q;
  int n = 1;
  std::string id() const;
};

// kind is one of linear, lp_norm, lp_sum, lp_of_transport, max_abs, custom.
// linear without coefficients means the flat unit vector n^{-1/2}(1, ..., 1);
// lp_of_transport maps normal coordinates to `law` before taking the norm;
// custom names a registered smooth function (euclidean_norm, soft_max).
struct StatisticSpec {
  std::string kind = "linear";
  double p = 1.0;
  std::string law;
  std::vector<double> a;
  std::string custom_id;
  std::string id() const;
};

// grid "deviation": t is the deviation from the median.
// grid "theorem_t": t is the bound's own parameter, the deviation is its
// threshold and the probability is the scale times exp(-t^2/2).
struct BoundSpec {
  std::string theorem;
  std::map<std::string, double> params;
  std::string grid = "deviation";
};

struct ExperimentConfig {
  std::string name = "experiment";
  SamplerSpec sampler;
  StatisticSpec statistic;
  BoundSpec bound;
  std::vector<double> t_grid;
  long long trials = 10000;
  std::uint64_t seed = 1;
  bool calibrated = false;
  CalibrationSet constants;  // used as given in default mode, as a base in calibrated mode
};

inline constexpr long long kMinTrials = 1000;

ExperimentConfig parse_config(const std::string& json_text);
std::string config_to_json(const ExperimentConfig& config);
// Throws PreconditionError for unresolvable ids, bad grids or too few trials.
void validate(const ExperimentConfig& config);

void draw_sample(const SamplerSpec& sampler, Rng& rng, Eigen::VectorXd& x);
double evaluate_statistic(const StatisticSpec& statistic, const Eigen::VectorXd& x);
// One statistic value per trial, trial i drawn from Rng(seed, i).
std::vector<double> simulate(const SamplerSpec& sampler, const StatisticSpec& statistic, long long trials,
                             std::uint64_t seed);

// The constant adjusted in calibrated mode; the bound grows with it when
// larger_is_conservative holds.
struct FitTarget {
  std::string key;
  bool larger_is_conservative = true;
};
FitTarget fit_target(const std::string& theorem);

// Deviation and probability bound at each grid value.
struct BoundPoint {
  double deviation = 0.0;
  double bound = 0.0;
};
std::vector<BoundPoint> evaluate_bound(const ExperimentConfig& config, const CalibrationSet& calib);
// Curve in the deviation, for the deviation-grid theorems.
bounds::TailBoundCurve make_curve(const BoundSpec& bound, int n, const StatisticSpec& statistic,
                                  const CalibrationSet& calib);

struct Row {
  double t = 0.0;
  double deviation = 0.0;
  double empirical = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct CalibrationRecord {
  bool calibrated = false;
  std::string key;
  double value = 1.0;
  std::uint64_t fit_seed = 0;
  std::uint64_t verify_seed = 0;
  std::string calib_id = "default";
};

struct VerificationReport {
  std::string name;
  std::string sampler;
  std::string statistic;
  std::string bound;
  std::uint64_t seed = 0;
  long long trials = 0;
  double median = 0.0;
  std::vector<Row> rows;
  CalibrationRecord calibration;
  double runtime_seconds = 0.0;  // not exported, so reports stay byte-stable
  bool all_pass() const;
};

VerificationReport verify_bound(const ExperimentConfig& config);

// --- Gaussian convex order ---------------------------------------------------

struct PisierReport {
  std::string f;
  std::string phi;
  int n = 0;
  long long trials = 0;
  std::uint64_t seed = 0;
  double lhs = 0.0;
  double lhs_se = 0.0;
  double rhs = 0.0;
  double rhs_se = 0.0;
  double ratio = 0.0;
  double ratio_se = 0.0;
  bool pass = false;  // lhs <= rhs + 3 SE
};

// f in {linear, euclidean_norm, constant, soft_max}; phi in {square, quartic, abs, cosh}.
PisierReport pisier_check(const std::string& f, const std::string& phi, int n, long long trials,
                          std::uint64_t seed);
std::string to_json(const PisierReport& report);

// --- random rotations -----------------------------------------------------------

// Haar rotation in SO(n): QR of a Gaussian matrix with R's diagonal made
// positive, then one column flipped if the determinant is negative.
Eigen::MatrixXd haar_rotation(int n, Rng& rng);

struct RotationRow {
  double lambda = 0.0;
  double probability = 0.0;  // exp(-lambda^2/2)
  double quantile = 0.0;     // deviation exceeded with that probability
  double ratio = 0.0;        // quantile / lambda
  bool in_range = false;     // lambda admissible for the theorem
};

struct RotationReport {
  int n = 0;
  double q = 0.0;
  double p = 0.0;
  double scale = 0.0;  // coordinate law poly_tail(q, scale)
  std::string g;
  long long trials = 0;
  std::uint64_t seed = 0;
  bool identity = false;
  std::vector<RotationRow> rows;
};

// Coordinates follow poly_tail(q, 2^{-1/q}/q), the scale at which the quantile
// Lipschitz condition holds with equality. g in {first_coordinate,
// euclidean_norm, mean_coordinate}; p defaults to the middle of (q/(q-2), q/2).
RotationReport experiment_random_rotation(int n, double q, const std::string& g, long long trials,
                                          std::uint64_t seed, bool identity = false,
                                          std::vector<double> lambdas = {1.0, 1.5, 2.0, 2.5, 3.0},
                                          std::optional<double> p = std::nullopt);
std::string to_json(const RotationReport& report);

// --- reports ---------------------------------------------------------------------

// Columns t, empirical, ci_lo, ci_hi, bound, pass.
std::string rows_to_csv(const std::vector<Row>& rows);
std::vector<Row> parse_rows_csv(const std::string& csv);
std::string report_csv(const VerificationReport& report);
std::string report_json(const VerificationReport& report);
// Log-probability against t, one polyline for the empirical tail and one for the bound.
std::string report_svg(const VerificationReport& report);

enum class ReportFormat { csv, json, svg };
// Writes the report; throws std::runtime_error when the path is not writable.
void emit_report(const VerificationReport& report, ReportFormat format, const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace conclab::harness
