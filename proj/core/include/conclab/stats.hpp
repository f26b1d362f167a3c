// Small statistics toolkit for Monte Carlo verification.
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace conclab::stats {

inline constexpr double kZ99 = 2.5758293035489004;  // two-sided 99% normal quantile

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Wilson score interval for a binomial proportion.
Interval wilson(std::size_t successes, std::size_t trials, double z = kZ99);

struct MeanEstimate {
  double mean = 0.0;
  double se = 0.0;
};
MeanEstimate mean_se(const std::vector<double>& xs);

// Lower median of an unsorted sample (copies).
double median(std::vector<double> xs);
// Linear-interpolated empirical quantile of a sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double p);

// sup_t |empirical CDF - cdf| for a sample (copied and sorted).
double ks_distance(std::vector<double> xs, const std::function<double(double)>& cdf);
double ks_two_sample(std::vector<double> a, std::vector<double> b);
// Asymptotic Kolmogorov tail P{sqrt(n_eff) D > lambda}.
double ks_pvalue(double d, double n_eff);

// Fraction of entries exceeding the threshold.
double exceed_fraction(const std::vector<double>& xs, double threshold);
std::size_t exceed_count(const std::vector<double>& xs, double threshold);

}  // namespace conclab::stats
