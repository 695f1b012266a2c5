#include "dchi/stats.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

namespace stats = dchi::stats;

TEST_CASE("mean and unbiased variance") {
  const std::vector<double> xs{1, 2, 3, 4};
  CHECK(stats::mean(xs) == doctest::Approx(2.5));
  CHECK(stats::variance(xs) == doctest::Approx(5.0 / 3.0));
  CHECK_THROWS_AS(stats::mean(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(stats::variance(std::vector<double>{1.0}),
                  std::invalid_argument);
}

TEST_CASE("pearson on exact linear relations") {
  const std::vector<double> xs{1, 2, 3, 4, 5};
  const std::vector<double> up{2, 4, 6, 8, 10};
  const std::vector<double> down{5, 4, 3, 2, 1};
  CHECK(stats::pearson(xs, up) == doctest::Approx(1.0));
  CHECK(stats::pearson(xs, down) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(stats::pearson(xs, std::vector<double>{1, 2}),
                  std::invalid_argument);
  CHECK_THROWS_AS(stats::pearson(std::vector<double>{1, 1, 1},
                                 std::vector<double>{1, 2, 3}),
                  std::invalid_argument);
}

TEST_CASE("spearman hand values, with and without ties") {
  // Ranks of {1,2,3} vs {3,1,2} correlate at -0.5.
  CHECK(stats::spearman(std::vector<double>{1, 2, 3},
                        std::vector<double>{3, 1, 2}) == doctest::Approx(-0.5));
  // Tied xs get averaged ranks; ys mirror them exactly.
  CHECK(stats::spearman(std::vector<double>{1, 2, 2, 3},
                        std::vector<double>{10, 20, 20, 40}) ==
        doctest::Approx(1.0));
  CHECK(stats::spearman(std::vector<double>{1, 2, 3, 4},
                        std::vector<double>{8, 7, 6, 5}) ==
        doctest::Approx(-1.0));
}

TEST_CASE("one-sample KS statistic hand values") {
  const auto uniform_cdf = [](double x) { return x; };
  CHECK(stats::ks_statistic({0.5}, uniform_cdf) == doctest::Approx(0.5));
  CHECK(stats::ks_statistic({0.25, 0.75}, uniform_cdf) ==
        doctest::Approx(0.25));
  CHECK_THROWS_AS(stats::ks_statistic({}, uniform_cdf),
                  std::invalid_argument);
}

TEST_CASE("two-sample KS statistic hand values") {
  CHECK(stats::ks_two_sample({1, 2, 3}, {4, 5, 6}) == doctest::Approx(1.0));
  CHECK(stats::ks_two_sample({1, 3}, {2, 4}) == doctest::Approx(0.5));
  CHECK(stats::ks_two_sample({1, 2}, {1, 2}) == doctest::Approx(0.0));
}

TEST_CASE("KS critical values follow the asymptotic formula") {
  // sqrt(-ln(alpha/2) / 2) = 1.9494745... at alpha = 0.001.
  CHECK(stats::ks_critical(0.001, 100) ==
        doctest::Approx(0.19494745).epsilon(1e-6));
  CHECK(stats::ks_critical(0.05, 400) ==
        doctest::Approx(1.3581015 / 20.0).epsilon(1e-6));
  CHECK(stats::ks_two_sample_critical(0.001, 100, 100) ==
        doctest::Approx(1.9494745 * std::sqrt(0.02)).epsilon(1e-6));
  CHECK_THROWS_AS(stats::ks_critical(0.0, 10), std::invalid_argument);
}

TEST_CASE("gamma CDF spot values") {
  CHECK(stats::gamma_cdf(1.0, 1.0, 1.0) ==
        doctest::Approx(1.0 - std::exp(-1.0)));
  // Gamma(2, 1) at 2: 1 - 3 e^{-2}.
  CHECK(stats::gamma_cdf(2.0, 2.0, 1.0) ==
        doctest::Approx(1.0 - 3.0 * std::exp(-2.0)));
  // Scale folds in: Gamma(2, 3) at 6 equals Gamma(2, 1) at 2.
  CHECK(stats::gamma_cdf(6.0, 2.0, 3.0) ==
        doctest::Approx(stats::gamma_cdf(2.0, 2.0, 1.0)));
  CHECK(stats::gamma_cdf(0.0, 2.0, 1.0) == 0.0);
  CHECK(stats::gamma_cdf(-1.0, 2.0, 1.0) == 0.0);
}

TEST_CASE("chi-squared quantile sanity") {
  // df = 35 at p = 0.999, the isotropy test's critical value.
  CHECK(stats::chi_squared_quantile(0.999, 35) ==
        doctest::Approx(66.619).epsilon(1e-3));
  CHECK(stats::chi_squared_quantile(0.5, 2) ==
        doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("normal CDF spot values") {
  CHECK(stats::normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(stats::normal_cdf(1.959964) == doctest::Approx(0.975).epsilon(1e-4));
  CHECK(stats::normal_cdf(-1.959964) == doctest::Approx(0.025).epsilon(1e-3));
}

TEST_CASE("percentile with linear interpolation") {
  const std::vector<double> xs{1, 2, 3, 4};
  CHECK(stats::percentile_sorted(xs, 50) == doctest::Approx(2.5));
  CHECK(stats::percentile_sorted(xs, 25) == doctest::Approx(1.75));
  CHECK(stats::percentile_sorted(xs, 95) == doctest::Approx(3.85));
  CHECK(stats::percentile_sorted(std::vector<double>{5.0}, 50) ==
        doctest::Approx(5.0));
  CHECK_THROWS_AS(stats::percentile_sorted(xs, 0), std::invalid_argument);
  CHECK_THROWS_AS(stats::percentile_sorted(xs, 100), std::invalid_argument);
}

TEST_CASE("fixed-width histogram partitions the input") {
  const std::vector<double> xs{0.0, 0.5, 1.0, 1.5, 2.0};
  const auto h = stats::fixed_width_histogram(xs, 0.0, 2.0, 2);
  REQUIRE(h.edges.size() == 3);
  CHECK(h.edges[0] == 0.0);
  CHECK(h.edges[1] == 1.0);
  CHECK(h.edges[2] == 2.0);
  REQUIRE(h.counts.size() == 2);
  CHECK(h.counts[0] == 2);  // 0, 0.5
  CHECK(h.counts[1] == 3);  // 1, 1.5, and 2 clamped into the top bin
  CHECK(h.total() == xs.size());

  // Out-of-range values clamp into the boundary bins.
  const auto c = stats::fixed_width_histogram(
      std::vector<double>{-5.0, 5.0}, 0.0, 2.0, 2);
  CHECK(c.counts[0] == 1);
  CHECK(c.counts[1] == 1);
  CHECK_THROWS_AS(stats::fixed_width_histogram(xs, 1.0, 1.0, 2),
                  std::invalid_argument);
}

TEST_CASE("total variation distance") {
  CHECK(stats::total_variation(std::vector<double>{1, 0},
                               std::vector<double>{0, 1}) ==
        doctest::Approx(1.0));
  CHECK(stats::total_variation(std::vector<double>{0.5, 0.5},
                               std::vector<double>{0.5, 0.5}) ==
        doctest::Approx(0));
  CHECK(stats::total_variation(std::vector<double>{0.5, 0.5},
                               std::vector<double>{0.25, 0.75}) ==
        doctest::Approx(0.25));
  CHECK_THROWS_AS(stats::total_variation(std::vector<double>{1},
                                         std::vector<double>{0.5, 0.5}),
                  std::invalid_argument);
}
