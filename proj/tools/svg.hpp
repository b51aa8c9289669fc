#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hftp::svg {

struct Curve {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> band;  // +-band around y; empty for none
};

/// Line plot with optional shaded error bands.
std::string line_plot(std::string_view title, std::string_view x_label, std::string_view y_label,
                      const std::vector<Curve>& curves);

struct BarSeries {
  std::string label;
  std::vector<double> values;  // one per category
};

/// Grouped bar chart.
std::string bar_chart(std::string_view title, std::string_view y_label, const std::vector<std::string>& categories,
                      const std::vector<BarSeries>& series);

std::string escape(std::string_view s);

}  // namespace hftp::svg
