#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace hftp::svg {

namespace {

constexpr double kW = 640, kH = 400, kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kW - kLeft - kRight); }
  double py(double y) const { return kH - kBottom - (y - y0) / (y1 - y0) * (kH - kTop - kBottom); }
};

void fix_range(double& lo, double& hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) lo = 0, hi = 1;
  if (hi <= lo) hi = lo + 1.0;
}

std::string header(std::string_view title) {
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kW) + "\" height=\"" + num(kH) +
       "\" viewBox=\"0 0 " + num(kW) + " " + num(kH) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kW / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
       escape(title) + "</text>\n";
  return s;
}

std::string axes(const Frame& f, std::string_view x_label, std::string_view y_label, bool x_ticks) {
  std::string s;
  s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kH - kBottom) + "\" x2=\"" + num(kW - kRight) + "\" y2=\"" +
       num(kH - kBottom) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(kH - kBottom) +
       "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    s += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(f.py(yv) + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + label(yv) + "</text>\n";
    if (x_ticks) {
      const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
      s += "<text x=\"" + num(f.px(xv)) + "\" y=\"" + num(kH - kBottom + 16) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + label(xv) + "</text>\n";
    }
  }
  s += "<text x=\"" + num((kLeft + kW - kRight) / 2) + "\" y=\"" + num(kH - 14) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + escape(x_label) + "</text>\n";
  s += "<text x=\"16\" y=\"" + num((kTop + kH - kBottom) / 2) + "\" transform=\"rotate(-90 16 " +
       num((kTop + kH - kBottom) / 2) + ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
       escape(y_label) + "</text>\n";
  return s;
}

std::string legend(const std::vector<std::string>& labels) {
  std::string s;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = kTop + 6 + 16.0 * static_cast<double>(i);
    s += "<rect x=\"" + num(kW - kRight - 130) + "\" y=\"" + num(y) + "\" width=\"10\" height=\"10\" fill=\"" +
         kPalette[i % 6] + "\"/>\n";
    s += "<text x=\"" + num(kW - kRight - 115) + "\" y=\"" + num(y + 9) +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(labels[i]) + "</text>\n";
  }
  return s;
}

}  // namespace

std::string escape(std::string_view in) {
  std::string s;
  for (char c : in) {
    switch (c) {
      case '&': s += "&amp;"; break;
      case '<': s += "&lt;"; break;
      case '>': s += "&gt;"; break;
      case '"': s += "&quot;"; break;
      case '\'': s += "&apos;"; break;
      default: s += c;
    }
  }
  return s;
}

std::string line_plot(std::string_view title, std::string_view x_label, std::string_view y_label,
                      const std::vector<Curve>& curves) {
  Frame f{INFINITY, -INFINITY, INFINITY, -INFINITY};
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      const double b = c.band.empty() ? 0.0 : c.band[i];
      f.x0 = std::min(f.x0, c.x[i]);
      f.x1 = std::max(f.x1, c.x[i]);
      f.y0 = std::min(f.y0, c.y[i] - b);
      f.y1 = std::max(f.y1, c.y[i] + b);
    }
  }
  fix_range(f.x0, f.x1);
  fix_range(f.y0, f.y1);
  std::string s = header(title) + axes(f, x_label, y_label, true);
  std::vector<std::string> labels;
  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const auto& c = curves[ci];
    const char* color = kPalette[ci % 6];
    labels.push_back(c.label);
    if (!c.band.empty() && !c.x.empty()) {
      std::string pts;
      for (std::size_t i = 0; i < c.x.size(); ++i) pts += num(f.px(c.x[i])) + "," + num(f.py(c.y[i] + c.band[i])) + " ";
      for (std::size_t i = c.x.size(); i-- > 0;) pts += num(f.px(c.x[i])) + "," + num(f.py(c.y[i] - c.band[i])) + " ";
      s += "<polygon points=\"" + pts + "\" fill=\"" + color + "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    }
    std::string pts;
    for (std::size_t i = 0; i < c.x.size(); ++i) pts += num(f.px(c.x[i])) + "," + num(f.py(c.y[i])) + " ";
    s += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
  }
  s += legend(labels);
  s += "</svg>\n";
  return s;
}

std::string bar_chart(std::string_view title, std::string_view y_label, const std::vector<std::string>& categories,
                      const std::vector<BarSeries>& series) {
  Frame f{0.0, static_cast<double>(std::max<std::size_t>(categories.size(), 1)), 0.0, -INFINITY};
  for (const auto& s : series) {
    for (double v : s.values) {
      if (std::isfinite(v)) {
        f.y0 = std::min(f.y0, v);
        f.y1 = std::max(f.y1, v);
      }
    }
  }
  fix_range(f.y0, f.y1);
  std::string s = header(title) + axes(f, "", y_label, false);
  const double slot = (kW - kLeft - kRight) / f.x1;
  const double bw = slot * 0.8 / static_cast<double>(std::max<std::size_t>(series.size(), 1));
  std::vector<std::string> labels;
  for (std::size_t si = 0; si < series.size(); ++si) {
    labels.push_back(series[si].label);
    for (std::size_t c = 0; c < categories.size() && c < series[si].values.size(); ++c) {
      const double v = series[si].values[c];
      if (!std::isfinite(v)) continue;
      const double x = kLeft + slot * static_cast<double>(c) + slot * 0.1 + bw * static_cast<double>(si);
      const double top = f.py(std::max(v, 0.0)), base = f.py(std::min(v, 0.0));
      s += "<rect x=\"" + num(x) + "\" y=\"" + num(top) + "\" width=\"" + num(bw) + "\" height=\"" +
           num(std::max(base - top, 0.0)) + "\" fill=\"" + kPalette[si % 6] + "\"/>\n";
    }
  }
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const double x = kLeft + slot * (static_cast<double>(c) + 0.5);
    s += "<text x=\"" + num(x) + "\" y=\"" + num(kH - kBottom + 14) + "\" transform=\"rotate(45 " + num(x) + " " +
         num(kH - kBottom + 14) + ")\" font-family=\"sans-serif\" font-size=\"10\">" + escape(categories[c]) +
         "</text>\n";
  }
  s += legend(labels);
  s += "</svg>\n";
  return s;
}

}  // namespace hftp::svg
