#include "hftp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "hftp/error.hpp"

namespace hftp::stats {

double mean(std::span<const double> x) {
  if (x.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(std::span<const double> x, int ddof) {
  if (x.size() <= static_cast<std::size_t>(ddof)) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - static_cast<std::size_t>(ddof)));
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw DegenerateError("quantile of empty sample");
  double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  auto lo = static_cast<std::size_t>(std::floor(h));
  auto hi = std::min(lo + 1, sorted.size() - 1);
  double frac = h - static_cast<double>(lo);
  if (frac == 0.0 || sorted[lo] == sorted[hi]) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double student_t_sf(double t, double dof) {
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (t == std::numeric_limits<double>::infinity()) return 0.0;
  if (t == -std::numeric_limits<double>::infinity()) return 1.0;
  boost::math::students_t dist(dof);
  return boost::math::cdf(boost::math::complement(dist, t));
}

double chi_squared_sf(double x, double dof) {
  if (x <= 0.0) return 1.0;
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, x));
}

double fisher_f_sf(double f, double df1, double df2) {
  if (f <= 0.0) return 1.0;
  if (!std::isfinite(f) || f >= std::numeric_limits<double>::max()) return 0.0;
  boost::math::fisher_f dist(df1, df2);
  return boost::math::cdf(boost::math::complement(dist, f));
}

Correlation pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("pearson: length mismatch");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (x.size() < 2) return {nan, nan, true};
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return {nan, nan, true};
  double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double dof = static_cast<double>(x.size()) - 2.0;
  double p = nan;
  if (dof > 0) {
    if (std::abs(r) == 1.0) {
      p = 0.0;
    } else {
      double t = r * std::sqrt(dof / (1.0 - r * r));
      p = std::min(1.0, 2.0 * student_t_sf(std::abs(t), dof));
    }
  }
  return {r, p, false};
}

RankCorrelation spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("spearman: length mismatch");
  auto rx = average_ranks(x);
  auto ry = average_ranks(y);
  auto c = pearson(rx, ry);
  if (c.degenerate) return {0.0, true};
  return {c.r, false};
}

TTest one_sample_t_greater(std::span<const double> x) {
  if (x.size() < 2) throw DegenerateError("t test needs at least 2 observations");
  TTest out;
  out.dof = x.size() - 1;
  const double m = mean(x);
  const double sd = stddev(x, 1);
  if (m == 0.0) {
    out.t = 0.0;
    out.p = 0.5;
    return out;
  }
  if (sd == 0.0) {
    out.t = m > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    out.p = m > 0 ? 0.0 : 1.0;
    return out;
  }
  out.t = m / (sd / std::sqrt(static_cast<double>(x.size())));
  out.p = student_t_sf(out.t, static_cast<double>(out.dof));
  return out;
}

ChiSquare chi_square_2x2(const std::array<std::array<double, 2>, 2>& table) {
  std::array<double, 2> rows{table[0][0] + table[0][1], table[1][0] + table[1][1]};
  std::array<double, 2> cols{table[0][0] + table[1][0], table[0][1] + table[1][1]};
  const double n = rows[0] + rows[1];
  if (rows[0] == 0 || rows[1] == 0 || cols[0] == 0 || cols[1] == 0) {
    throw UndefinedTestError(
        "chi-square undefined: a row or column total of the 2x2 table is zero "
        "(every channel falls in the same selection or significance category)");
  }
  ChiSquare out;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      double e = rows[i] * cols[j] / n;
      out.expected[i][j] = e;
      out.statistic += (table[i][j] - e) * (table[i][j] - e) / e;
    }
  }
  out.p = chi_squared_sf(out.statistic, 1.0);
  return out;
}

Anova one_way_anova(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) throw DegenerateError("ANOVA needs at least 2 groups");
  std::size_t n = 0;
  double grand = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw DegenerateError("ANOVA groups need at least 2 values each");
    n += g.size();
    for (double v : g) grand += v;
  }
  grand /= static_cast<double>(n);
  Anova out;
  for (const auto& g : groups) {
    double gm = mean(g);
    out.ss_between += static_cast<double>(g.size()) * (gm - grand) * (gm - grand);
    for (double v : g) out.ss_within += (v - gm) * (v - gm);
  }
  out.df_between = groups.size() - 1;
  out.df_within = n - groups.size();
  const double ss_total = out.ss_between + out.ss_within;
  out.eta_squared = ss_total > 0.0 ? out.ss_between / ss_total : 0.0;
  if (out.ss_between == 0.0) {
    out.f = 0.0;
    out.p = 1.0;
  } else if (out.ss_within == 0.0) {
    out.f = std::numeric_limits<double>::max();
    out.p = 0.0;
  } else {
    out.f = (out.ss_between / static_cast<double>(out.df_between)) /
            (out.ss_within / static_cast<double>(out.df_within));
    out.p = fisher_f_sf(out.f, static_cast<double>(out.df_between), static_cast<double>(out.df_within));
  }
  return out;
}

}  // namespace hftp::stats
