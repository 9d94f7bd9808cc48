#include "subnewton/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace subnewton::svg {

namespace {

constexpr double kWidth = 720, kHeight = 480;
constexpr double kLeft = 80, kRight = 170, kTop = 40, kBottom = 60;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string line_chart(const std::vector<Series>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label, bool log_y,
                       double y_floor) {
  auto ty = [&](double y) {
    if (!std::isfinite(y)) return std::numeric_limits<double>::quiet_NaN();
    return log_y ? std::log10(std::max(y, y_floor)) : y;
  };

  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      const double y = ty(s.y[i]);
      if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (!std::isfinite(x_min)) x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  if (x_max == x_min) x_min -= 0.5, x_max += 0.5;
  if (y_max == y_min) y_min -= 0.5, y_max += 0.5;
  if (log_y) y_min = std::floor(y_min), y_max = std::ceil(y_max);

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) { return kTop + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h; };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" fill=\"white\"/>\n"
    << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
    << escape(title) << "</text>\n"
    << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\""
    << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int k = 0; k <= 5; ++k) {
    const double xv = x_min + (x_max - x_min) * k / 5.0;
    o << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << kTop + plot_h + 18
      << "\" text-anchor=\"middle\" font-size=\"11\">" << tick_label(xv) << "</text>\n";
  }
  const int y_ticks = log_y ? static_cast<int>(std::min(y_max - y_min, 16.0)) : 5;
  for (int k = 0; k <= y_ticks; ++k) {
    const double yv = y_min + (y_max - y_min) * k / std::max(y_ticks, 1);
    const std::string label = log_y ? "1e" + tick_label(std::round(yv)) : tick_label(yv);
    o << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + plot_w << "\" y1=\"" << fmt(py(yv))
      << "\" y2=\"" << fmt(py(yv)) << "\" stroke=\"#dddddd\"/>\n"
      << "<text x=\"" << kLeft - 6 << "\" y=\"" << fmt(py(yv) + 4)
      << "\" text-anchor=\"end\" font-size=\"11\">" << label << "</text>\n";
  }
  o << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 16
    << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(x_label) << "</text>\n"
    << "<text x=\"18\" y=\"" << kTop + plot_h / 2 << "\" text-anchor=\"middle\" font-size=\"13\" "
    << "transform=\"rotate(-90 18 " << kTop + plot_h / 2 << ")\">" << escape(y_label)
    << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % (sizeof kPalette / sizeof *kPalette)];
    std::string points;
    std::size_t count = 0;
    double last_x = 0, last_y = 0;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      const double y = ty(s.y[i]);
      if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
      last_x = px(s.x[i]);
      last_y = py(y);
      points += fmt(last_x) + "," + fmt(last_y) + " ";
      ++count;
    }
    if (count == 1) {
      o << "<circle cx=\"" << fmt(last_x) << "\" cy=\"" << fmt(last_y) << "\" r=\"4\" fill=\""
        << color << "\"/>\n";
    } else if (count > 1) {
      points.pop_back();
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\""
        << points << "\"/>\n";
    }
    const double ly = kTop + 16 + 20.0 * static_cast<double>(si);
    o << "<line x1=\"" << kLeft + plot_w + 12 << "\" x2=\"" << kLeft + plot_w + 36 << "\" y1=\""
      << ly << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
      << "<text x=\"" << kLeft + plot_w + 42 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">"
      << escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace subnewton::svg
