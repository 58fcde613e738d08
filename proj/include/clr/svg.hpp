#pragma once

#include <string>
#include <vector>

namespace clr {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

/// Self-contained SVG line chart. Every finite (x, y) pair becomes one
/// <circle class="marker"> element; non-finite values are skipped. Output is
/// a pure function of the input. Throws std::invalid_argument when there is
/// nothing to draw.
std::string render_svg(const PlotSpec& plot);

/// Number of data markers in an SVG produced by render_svg.
std::size_t count_markers(const std::string& svg);

}  // namespace clr
