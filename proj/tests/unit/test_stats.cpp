#include <doctest.h>

#include <cmath>
#include <limits>

#include "hftp/error.hpp"
#include "hftp/stats.hpp"
#include "oracles.hpp"

using namespace hftp;

TEST_SUITE("stats") {
  TEST_CASE("type-7 quantile") {
    const std::vector<double> x{1, 2, 3, 4};
    CHECK(stats::quantile_sorted(x, 0.0) == 1.0);
    CHECK(stats::quantile_sorted(x, 1.0) == 4.0);
    CHECK(stats::quantile_sorted(x, 0.5) == 2.5);
    CHECK(stats::quantile_sorted(x, 0.025) == doctest::Approx(1.075));
  }

  TEST_CASE("average ranks") {
    CHECK(stats::average_ranks(std::vector<double>{10, 20, 20, 5}) == std::vector<double>{2, 3.5, 3.5, 1});
  }

  TEST_CASE("Pearson and Spearman against brute force") {
    for (unsigned seed = 1; seed <= 20; ++seed) {
      auto x = oracle::gaussian(15, seed), y = oracle::gaussian(15, seed + 100);
      for (std::size_t i = 0; i < 15; i += 3) y[i] = x[i];  // some structure
      x[4] = x[5];                                         // a tie
      CHECK(stats::pearson(x, y).r == doctest::Approx(oracle::pearson(x, y)).epsilon(1e-12));
      CHECK(stats::spearman(x, y).rho == doctest::Approx(oracle::spearman(x, y)).epsilon(1e-12));
    }
  }

  TEST_CASE("degenerate correlations") {
    const std::vector<double> c{1, 1, 1}, v{1, 2, 3};
    const auto r = stats::pearson(c, v);
    CHECK(r.degenerate);
    CHECK(std::isnan(r.p));
    const auto s = stats::spearman(c, v);
    CHECK(s.degenerate);
    CHECK(s.rho == 0.0);
  }

  TEST_CASE("Pearson p-value") {
    // r = 0.8 with n = 10: t = 0.8 * sqrt(8) / 0.6.
    const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<double> y = x;
    y[0] = 9;
    const auto r = stats::pearson(x, y);
    const double t = r.r * std::sqrt(8.0) / std::sqrt(1 - r.r * r.r);
    CHECK(r.p == doctest::Approx(2.0 * stats::student_t_sf(t, 8)).epsilon(1e-12));
  }

  TEST_CASE("chi-square 2x2 fixture") {
    const auto c = stats::chi_square_2x2({{{30, 20}, {10, 40}}});
    // Expected counts 20/30/20/30: 5 + 3.333 + 5 + 3.333.
    CHECK(c.statistic == doctest::Approx(50.0 / 3.0).epsilon(1e-9));
    CHECK(c.p == doctest::Approx(4.45e-5).epsilon(0.01));
    CHECK(c.expected[0][0] == doctest::Approx(20.0));
  }

  TEST_CASE("chi-square independence and empty margins") {
    CHECK(stats::chi_square_2x2({{{10, 20}, {20, 40}}}).statistic == doctest::Approx(0.0));
    CHECK_THROWS_AS(stats::chi_square_2x2({{{10, 0}, {20, 0}}}), UndefinedTestError);
  }

  TEST_CASE("one-way ANOVA") {
    std::vector<std::vector<double>> same{{1, 2, 3}, {1, 2, 3}};
    auto a = stats::one_way_anova(same);
    CHECK(a.f == 0.0);
    CHECK(a.eta_squared == 0.0);

    std::vector<std::vector<double>> split{{0, 0}, {1, 1}};
    a = stats::one_way_anova(split);
    CHECK(a.f == std::numeric_limits<double>::max());
    CHECK(a.p == 0.0);
    CHECK(a.eta_squared == 1.0);

    // Brute-force sums of squares.
    std::vector<std::vector<double>> g{oracle::gaussian(5, 1), oracle::gaussian(7, 2), oracle::gaussian(4, 3)};
    for (auto& v : g[1]) v += 1.0;
    double grand = 0, n = 0;
    for (auto& v : g)
      for (double x : v) grand += x, ++n;
    grand /= n;
    double ssb = 0, ssw = 0;
    for (auto& v : g) {
      const double m = oracle::mean(v);
      ssb += static_cast<double>(v.size()) * (m - grand) * (m - grand);
      for (double x : v) ssw += (x - m) * (x - m);
    }
    a = stats::one_way_anova(g);
    CHECK(a.ss_between == doctest::Approx(ssb).epsilon(1e-10));
    CHECK(a.ss_within == doctest::Approx(ssw).epsilon(1e-10));
    CHECK(a.f == doctest::Approx((ssb / 2) / (ssw / 13)).epsilon(1e-10));
    CHECK(a.p == doctest::Approx(stats::fisher_f_sf(a.f, 2, 13)).epsilon(1e-12));
  }

  TEST_CASE("one-sample t") {
    const std::vector<double> x{1, 2, 3};
    const auto t = stats::one_sample_t_greater(x);
    CHECK(t.t == doctest::Approx(2.0 / (1.0 / std::sqrt(3.0))));
    CHECK(t.dof == 2);
    CHECK(stats::one_sample_t_greater(std::vector<double>{0, 0, 0}).p == 0.5);
  }
}
