// conclab: command-line front end for bound evaluation, sampling, Monte Carlo
// verification and the experiments. Exit code 0 iff every pass flag holds,
// 1 when some check fails, 2 on invalid input.
#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "conclab/bounds.hpp"
#include "conclab/calibration.hpp"
#include "conclab/embed.hpp"
#include "conclab/format.hpp"
#include "conclab/harness.hpp"
#include "conclab/numerics.hpp"
#include "conclab/order_stats.hpp"
#include "conclab/parallel.hpp"
#include "json.hpp"

namespace {

using namespace conclab;
using Json = nlohmann::ordered_json;

constexpr int kExitFail = 1;
constexpr int kExitInput = 2;

std::map<std::string, double> parse_pairs(const std::vector<std::string>& items, const std::string& flag) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw PreconditionError(flag + " expects key=value, got " + item);
    out[item.substr(0, eq)] = parse_double(item.substr(eq + 1));
  }
  return out;
}

CalibrationSet calibration_from(const std::vector<std::string>& items) {
  CalibrationSet calib;
  for (const auto& [key, value] : parse_pairs(items, "--calib")) calib.set(key, value, "cli");
  return calib;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    harness::write_text(out, text);
  }
}

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<long long> trials;
  std::string out;
};

void add_common(CLI::App* app, Common& common) {
  app->add_option("--seed", common.seed, "Master seed");
  app->add_option("--trials", common.trials, "Monte Carlo trials");
  app->add_option("--out", common.out, "Output file (stdout when omitted)");
}

template <class T>
T or_default(const std::optional<T>& v, T fallback) {
  return v ? *v : fallback;
}

// --- bound eval -------------------------------------------------------------------

struct BoundEvalArgs {
  Common common;
  std::string config;
  std::string theorem;
  std::vector<std::string> params;
  std::vector<std::string> calib;
  std::vector<double> grid;
  std::string grid_mode = "deviation";
  int n = 1;
};

int run_bound_eval(const BoundEvalArgs& a) {
  harness::ExperimentConfig c;
  if (!a.config.empty()) {
    c = harness::parse_config(read_file(a.config));
  } else {
    c.name = "bound_eval";
    c.sampler.n = a.n;
    c.bound.theorem = a.theorem;
    c.bound.params = parse_pairs(a.params, "--param");
    c.bound.grid = a.grid_mode;
    c.t_grid = a.grid;
  }
  if (!a.grid.empty()) c.t_grid = a.grid;
  CalibrationSet calib = c.constants;
  for (const auto& [key, entry] : calibration_from(a.calib).entries()) calib.set(key, entry.value, "cli");
  harness::validate(c);
  const auto points = harness::evaluate_bound(c, calib);
  std::ostringstream csv;
  csv << "t,deviation,bound\n";
  for (std::size_t i = 0; i < points.size(); ++i)
    csv << format_double(c.t_grid[i]) << ',' << format_double(points[i].deviation) << ','
        << format_double(points[i].bound) << '\n';
  emit(csv.str(), a.common.out);
  return 0;
}

// --- sample -------------------------------------------------------------------------

struct SampleArgs {
  Common common;
  std::string config;
  std::string law = "normal";
  std::optional<double> ball_q;
  int n = 1;
  std::string statistic = "linear";
  double p = 1.0;
  std::string statistic_law;
  std::string custom;
};

int run_sample(const SampleArgs& a) {
  harness::SamplerSpec sampler;
  harness::StatisticSpec statistic;
  long long trials = 1000;
  std::uint64_t seed = 1;
  if (!a.config.empty()) {
    const auto c = harness::parse_config(read_file(a.config));
    sampler = c.sampler;
    statistic = c.statistic;
    trials = c.trials;
    seed = c.seed;
  } else {
    sampler.law = a.law;
    sampler.ball_q = a.ball_q;
    sampler.n = a.n;
    statistic.kind = a.statistic;
    statistic.p = a.p;
    statistic.law = a.statistic_law;
    statistic.custom_id = a.custom;
  }
  trials = or_default(a.common.trials, trials);
  seed = or_default(a.common.seed, seed);
  if (trials < 1) throw PreconditionError("--trials must be positive");
  const auto values = harness::simulate(sampler, statistic, trials, seed);
  std::ostringstream csv;
  csv << "trial,value\n";
  for (std::size_t i = 0; i < values.size(); ++i) csv << i << ',' << format_double(values[i]) << '\n';
  emit(csv.str(), a.common.out);
  return 0;
}

// --- verify -------------------------------------------------------------------------

struct VerifyArgs {
  Common common;
  std::string config;
  std::string format = "json";
  bool calibrated = false;
};

int run_verify(const VerifyArgs& a) {
  auto c = harness::parse_config(read_file(a.config));
  if (a.common.seed) c.seed = *a.common.seed;
  if (a.common.trials) c.trials = *a.common.trials;
  if (a.calibrated) c.calibrated = true;
  const auto report = harness::verify_bound(c);
  const std::map<std::string, harness::ReportFormat> formats = {
      {"csv", harness::ReportFormat::csv}, {"json", harness::ReportFormat::json}, {"svg", harness::ReportFormat::svg}};
  const auto format = formats.at(a.format);
  if (a.common.out.empty() || a.common.out == "-") {
    emit(format == harness::ReportFormat::csv    ? harness::report_csv(report)
         : format == harness::ReportFormat::json ? harness::report_json(report)
                                                 : harness::report_svg(report),
         "");
  } else {
    harness::emit_report(report, format, a.common.out);
  }
  return report.all_pass() ? 0 : kExitFail;
}

// --- orderstats -------------------------------------------------------------------------

struct OrderArgs {
  Common common;
  int n = 200;
  double t = 2.0;
  bool no_renyi = false;
  std::vector<std::string> calib;
};

int run_orderstats(const OrderArgs& a) {
  const auto calib = calibration_from(a.calib);
  const auto env = order::uniform_order_envelope(a.n, a.t, calib, !a.no_renyi);
  const long long trials = or_default(a.common.trials, 10000LL);
  const std::uint64_t seed = or_default<std::uint64_t>(a.common.seed, 1);
  const long long covered = order::envelope_coverage(env.upper, trials, seed);
  const double floor = 1.0 - num::kPi * num::kPi / 3.0 * std::exp(-a.t * a.t / 2.0);
  const double se = std::sqrt(std::max(floor * (1.0 - floor), 0.0) / trials);
  const double coverage = static_cast<double>(covered) / trials;
  const bool pass = coverage >= floor - 3.0 * se;
  Json j;
  j["n"] = a.n;
  j["t"] = a.t;
  j["trials"] = trials;
  j["seed"] = seed;
  j["calib_id"] = calib.id();
  j["coverage"] = coverage;
  j["floor"] = floor;
  j["floor_se"] = se;
  j["pass"] = pass;
  Json rows = Json::array();
  for (int k = 1; k <= a.n; ++k)
    rows.push_back({{"k", k}, {"upper", env.upper[k - 1]}, {"source", order::to_string(env.source[k - 1])}});
  j["envelope"] = rows;
  emit(j.dump(2), a.common.out);
  return pass ? 0 : kExitFail;
}

// --- embed ------------------------------------------------------------------------------

struct EmbedArgs {
  Common common;
  std::string mode = "dvoretzky";
  int n = 200;
  int k = 3;
  double eps = 0.25;
  double p = 2.0;
  std::vector<int> dims = {100, 400, 1600};
  std::vector<std::string> calib;
  bool ratios_csv = false;
};

int run_embed(const EmbedArgs& a) {
  const auto calib = calibration_from(a.calib);
  if (a.mode == "dvoretzky") {
    const auto body = embed::NormBody::lp(a.n, a.p);
    const int trials = static_cast<int>(or_default(a.common.trials, 500LL));
    const auto report =
        embed::gaussian_dvoretzky(a.n, a.k, a.eps, body, trials, or_default<std::uint64_t>(a.common.seed, 1), calib);
    emit(a.ratios_csv ? embed::ratios_to_csv(report) : embed::to_json(report), a.common.out);
    return report.success_rate >= report.success_floor ? 0 : kExitFail;
  }
  if (a.mode != "dimension") throw PreconditionError("--mode must be dvoretzky or dimension");
  Json rows = Json::array();
  std::vector<double> log_n, log_k;
  for (int n : a.dims) {
    const auto r = embed::exponential_dimension(n, a.p, a.eps, calib);
    rows.push_back({{"n", r.n}, {"p", r.p}, {"b", r.b}, {"T", r.T}, {"epsilon", r.epsilon}, {"k_max", r.k_max}});
    if (r.k_max > 0) {
      log_n.push_back(std::log(r.n));
      log_k.push_back(std::log(r.k_max));
    }
  }
  Json j;
  j["target_epsilon"] = a.eps;
  j["calib_id"] = calib.id();
  j["recipes"] = rows;
  if (log_n.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < log_n.size(); ++i) mx += log_n[i], my += log_k[i];
    mx /= log_n.size();
    my /= log_n.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < log_n.size(); ++i)
      sxy += (log_n[i] - mx) * (log_k[i] - my), sxx += (log_n[i] - mx) * (log_n[i] - mx);
    j["log_log_slope"] = sxy / sxx;
  } else {
    j["log_log_slope"] = nullptr;
  }
  emit(j.dump(2), a.common.out);
  return 0;
}

// --- pisier / rotate ---------------------------------------------------------------------

struct PisierArgs {
  Common common;
  std::string f = "linear";
  std::string phi = "square";
  int n = 10;
};

int run_pisier(const PisierArgs& a) {
  const auto r = harness::pisier_check(a.f, a.phi, a.n, or_default(a.common.trials, 100000LL),
                                       or_default<std::uint64_t>(a.common.seed, 1));
  emit(harness::to_json(r), a.common.out);
  return r.pass ? 0 : kExitFail;
}

struct RotateArgs {
  Common common;
  int n = 500;
  double q = 6.0;
  std::string g = "first_coordinate";
  bool identity = false;
  std::vector<double> lambdas = {1.0, 1.5, 2.0, 2.5, 3.0};
  std::optional<double> p;
};

int run_rotate(const RotateArgs& a) {
  const auto r = harness::experiment_random_rotation(a.n, a.q, a.g, or_default(a.common.trials, 20000LL),
                                                     or_default<std::uint64_t>(a.common.seed, 1), a.identity,
                                                     a.lambdas, a.p);
  emit(harness::to_json(r), a.common.out);
  return 0;  // qualitative experiment without pass flags
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concentration-inequality verification lab"};
  app.require_subcommand(1);
  unsigned workers = 0;
  app.add_option("--workers", workers, "Worker threads (0: CONCLAB_WORKERS or hardware concurrency)");

  BoundEvalArgs bound_args;
  auto* bound = app.add_subcommand("bound", "Tail bound curves");
  bound->require_subcommand(1);
  auto* eval = bound->add_subcommand("eval", "Evaluate a bound on a grid, CSV t,deviation,bound");
  add_common(eval, bound_args.common);
  eval->add_option("--config", bound_args.config, "Experiment config whose bound is evaluated");
  eval->add_option("--theorem", bound_args.theorem, "weibull_linear | lpn_gauss | lp_on_lq_ball | poly_nonlinear");
  eval->add_option("--param", bound_args.params, "Bound parameter key=value")->delimiter(',');
  eval->add_option("--calib", bound_args.calib, "Constant override key=value")->delimiter(',');
  eval->add_option("--grid", bound_args.grid, "Comma-separated t values")->delimiter(',');
  eval->add_option("--grid-mode", bound_args.grid_mode, "deviation | theorem_t")
      ->check(CLI::IsMember({"deviation", "theorem_t"}));
  eval->add_option("--n", bound_args.n, "Dimension");
  eval->callback([&] {
    if (bound_args.config.empty() && bound_args.theorem.empty())
      throw CLI::ValidationError("bound eval", "--config or --theorem is required");
  });

  SampleArgs sample_args;
  auto* sample = app.add_subcommand("sample", "Statistic values per trial, CSV trial,value");
  add_common(sample, sample_args.common);
  sample->add_option("--config", sample_args.config, "Experiment config supplying sampler and statistic");
  sample->add_option("--law", sample_args.law, "Coordinate law id");
  sample->add_option("--ball-q", sample_args.ball_q, "Sample uniformly from the l_q ball instead");
  sample->add_option("--n", sample_args.n, "Dimension");
  sample->add_option("--statistic", sample_args.statistic, "linear | lp_norm | lp_sum | lp_of_transport | max_abs | custom");
  sample->add_option("--p", sample_args.p, "Exponent of the lp statistics");
  sample->add_option("--statistic-law", sample_args.statistic_law, "Target law of lp_of_transport");
  sample->add_option("--custom", sample_args.custom, "Registered smooth function id");

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "Monte Carlo verification of a config");
  add_common(verify, verify_args.common);
  verify->add_option("config", verify_args.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  verify->add_option("--format", verify_args.format, "csv | json | svg")->check(CLI::IsMember({"csv", "json", "svg"}));
  verify->add_flag("--calibrated", verify_args.calibrated, "Fit the free constant on a separate seed split");

  OrderArgs order_args;
  auto* orderstats = app.add_subcommand("orderstats", "Uniform order-statistic envelope and its coverage");
  add_common(orderstats, order_args.common);
  orderstats->add_option("--n", order_args.n, "Sample size");
  orderstats->add_option("--t", order_args.t, "Deviation parameter");
  orderstats->add_flag("--no-renyi", order_args.no_renyi, "Drop the exponential-representation formula");
  orderstats->add_option("--calib", order_args.calib, "Constant override key=value")->delimiter(',');

  EmbedArgs embed_args;
  auto* embed_cmd = app.add_subcommand("embed", "Random embeddings into l_p");
  add_common(embed_cmd, embed_args.common);
  embed_cmd->add_option("--mode", embed_args.mode, "dvoretzky | dimension")
      ->check(CLI::IsMember({"dvoretzky", "dimension"}));
  embed_cmd->add_option("--n", embed_args.n, "Target dimension (dvoretzky)");
  embed_cmd->add_option("--k", embed_args.k, "Embedded dimension (dvoretzky)");
  embed_cmd->add_option("--eps", embed_args.eps, "Distortion tolerance");
  embed_cmd->add_option("--p", embed_args.p, "Exponent of the l_p body");
  embed_cmd->add_option("--dims", embed_args.dims, "Dimensions for the recipe (dimension)")->delimiter(',');
  embed_cmd->add_option("--calib", embed_args.calib, "Constant override key=value")->delimiter(',');
  embed_cmd->add_flag("--ratios-csv", embed_args.ratios_csv, "Emit per-net-point ratios as CSV");

  PisierArgs pisier_args;
  auto* pisier = app.add_subcommand("pisier", "Gaussian convex-order check");
  add_common(pisier, pisier_args.common);
  pisier->add_option("--f", pisier_args.f, "linear | euclidean_norm | constant | soft_max");
  pisier->add_option("--phi", pisier_args.phi, "square | quartic | abs | cosh");
  pisier->add_option("--n", pisier_args.n, "Dimension");

  RotateArgs rotate_args;
  auto* rotate = app.add_subcommand("rotate", "Random rotation of polynomial-tail vectors");
  add_common(rotate, rotate_args.common);
  rotate->add_option("--n", rotate_args.n, "Dimension");
  rotate->add_option("--q", rotate_args.q, "Tail exponent, q > 4");
  rotate->add_option("--g", rotate_args.g, "first_coordinate | mean_coordinate | euclidean_norm");
  rotate->add_flag("--identity", rotate_args.identity, "Skip the rotation");
  rotate->add_option("--lambda", rotate_args.lambdas, "Comma-separated lambda values")->delimiter(',');
  rotate->add_option("--p", rotate_args.p, "Intermediate exponent in (q/(q-2), q/2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitInput;
  }
  set_worker_count(workers);

  try {
    if (eval->parsed()) return run_bound_eval(bound_args);
    if (sample->parsed()) return run_sample(sample_args);
    if (verify->parsed()) return run_verify(verify_args);
    if (orderstats->parsed()) return run_orderstats(order_args);
    if (embed_cmd->parsed()) return run_embed(embed_args);
    if (pisier->parsed()) return run_pisier(pisier_args);
    if (rotate->parsed()) return run_rotate(rotate_args);
  } catch (const std::exception& e) {
    std::cerr << "conclab: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
