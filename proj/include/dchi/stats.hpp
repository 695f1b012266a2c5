#ifndef DCHI_STATS_HPP
#define DCHI_STATS_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

// Statistical helpers shared by the calibration, verifier and test code.
// Distribution CDFs/quantiles are delegated to Boost.Math; everything here is
// the thin test-statistic layer on top.

namespace dchi::stats {

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);  // unbiased (n-1)

double pearson(std::span<const double> xs, std::span<const double> ys);

// Spearman rank correlation, average ranks on ties.
double spearman(std::span<const double> xs, std::span<const double> ys);

// One-sample Kolmogorov-Smirnov statistic sup |F_n - F|. Sorts a copy.
double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& cdf);

// Two-sample KS statistic. Sorts copies.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Asymptotic critical values for the KS statistic at significance alpha.
double ks_critical(double alpha, std::size_t n);
double ks_two_sample_critical(double alpha, std::size_t n, std::size_t m);

// Regularized lower incomplete gamma: CDF of Gamma(shape, scale) at x.
double gamma_cdf(double x, double shape, double scale);

double chi_squared_quantile(double p, double dof);

double normal_cdf(double x);

// Percentile p in (0, 100) of an ascending-sorted sample, linear
// interpolation between closest ranks (h = (n-1) * p / 100).
double percentile_sorted(std::span<const double> sorted, double p);

struct Histogram {
  std::vector<double> edges;        // size bins + 1
  std::vector<std::uint64_t> counts;  // size bins

  std::uint64_t total() const;
};

// Fixed-width bins over [lo, hi]; values outside are clamped into the
// boundary bins so counts always partition the input.
Histogram fixed_width_histogram(std::span<const double> values, double lo,
                                double hi, std::size_t bins);

// Total variation distance 0.5 * sum |p_i - q_i| between two distributions
// given as aligned probability vectors.
double total_variation(std::span<const double> p, std::span<const double> q);

}  // namespace dchi::stats

#endif  // DCHI_STATS_HPP
