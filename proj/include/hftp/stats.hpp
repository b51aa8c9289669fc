#pragma once

// Descriptive and inferential statistics shared by the probes and the
// alignment metrics. Reference distributions come from Boost.Math.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace hftp::stats {

double mean(std::span<const double> x);
/// Standard deviation with `ddof` degrees-of-freedom correction (0 = population).
double stddev(std::span<const double> x, int ddof = 0);

/// Linear-interpolated empirical quantile of sorted data (Hyndman-Fan type 7).
double quantile_sorted(std::span<const double> sorted, double p);

/// 1-based ranks with ties given their average rank.
std::vector<double> average_ranks(std::span<const double> x);

struct Correlation {
  double r = 0.0;
  double p = 0.0;  // two-sided, Student t with n-2 dof; NaN when degenerate
  bool degenerate = false;
};

/// Pearson product-moment correlation. Zero variance in either input gives
/// degenerate = true, r = NaN, p = NaN.
Correlation pearson(std::span<const double> x, std::span<const double> y);

struct RankCorrelation {
  double rho = 0.0;
  bool degenerate = false;  // a rank vector had zero variance; rho reported as 0
};

/// Spearman rank correlation (Pearson on average ranks).
RankCorrelation spearman(std::span<const double> x, std::span<const double> y);

struct TTest {
  double t = 0.0;
  double p = 0.5;
  std::size_t dof = 0;
};

/// One-sample t test of mean > 0. A zero mean gives t = 0, p = 0.5; a
/// non-zero mean with zero spread gives t = +-inf and p = 0 or 1.
TTest one_sample_t_greater(std::span<const double> x);

struct ChiSquare {
  double statistic = 0.0;
  double p = 1.0;
  std::array<std::array<double, 2>, 2> expected{};
};

/// Pearson chi-square on a 2x2 table, 1 dof, no continuity correction.
/// Throws UndefinedTestError if any row or column total is zero.
ChiSquare chi_square_2x2(const std::array<std::array<double, 2>, 2>& table);

struct Anova {
  double f = 0.0;
  double p = 1.0;
  double eta_squared = 0.0;
  double ss_between = 0.0;
  double ss_within = 0.0;
  std::size_t df_between = 0;
  std::size_t df_within = 0;
};

/// One-way ANOVA. With zero within-group variance and non-zero between-group
/// variance, F is reported as the largest finite double and p = 0.
Anova one_way_anova(std::span<const std::vector<double>> groups);

double student_t_sf(double t, double dof);
double chi_squared_sf(double x, double dof);
double fisher_f_sf(double f, double df1, double df2);

}  // namespace hftp::stats
