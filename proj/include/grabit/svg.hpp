#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace grabit {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  // Optional shaded band; both empty or both the size of x.
  std::vector<double> lower;
  std::vector<double> upper;
  bool dashed = false;
};

struct SvgMarker {
  double x;
  double y;
};

struct SvgPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<SvgSeries> series;
  std::vector<SvgMarker> markers;  // drawn as dots with dashed guides to the axes
  bool diagonal = false;           // dotted y = x reference line
  std::optional<std::pair<double, double>> x_range;
  std::optional<std::pair<double, double>> y_range;
};

inline constexpr int kSvgWidth = 640;
inline constexpr int kSvgHeight = 480;

/// Self-contained SVG document on a fixed canvas. Series colors follow a
/// fixed palette by series index.
std::string render_svg(const SvgPlot& plot);

/// Horizontal bar chart, one bar per (label, value), drawn in the given order.
std::string render_bar_svg(const std::string& title, const std::vector<std::pair<std::string, double>>& bars);

}  // namespace grabit
