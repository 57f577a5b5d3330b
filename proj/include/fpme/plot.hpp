#pragma once

/// @file plot.hpp
/// @brief Static SVG plots for run artifacts (line plots and 2D heat maps).

#include <string>
#include <vector>

#include "fpme/grid.hpp"

namespace fpme {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<PlotSeries> series;
};

/// Points that are non-finite, or non-positive on a log axis, are dropped.
/// A plot with no drawable point renders an empty frame with a note.
std::string render_svg(const PlotSpec& spec);

/// 2D field as a grey-scale cell map (row-major, axis 0 horizontal).
/// DimensionError unless dim = 2.
std::string render_heatmap_svg(const Field& f, const std::string& title);

}  // namespace fpme
