#pragma once

#include <string>
#include <vector>

namespace subnewton::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Standalone SVG line chart, one polyline per series (a marker when a series
/// has a single point). With log_y, y values are clipped below at y_floor.
std::string line_chart(const std::vector<Series>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label, bool log_y,
                       double y_floor = 1e-16);

std::string escape(const std::string& text);

}  // namespace subnewton::svg
