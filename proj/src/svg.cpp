#include "grabit/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fmt/format.h>

#include "grabit/error.hpp"

namespace grabit {
namespace {

constexpr std::array<const char*, 6> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out.push_back(ch);
    }
  }
  return out;
}

std::pair<double, double> padded(double lo, double hi) {
  if (!(hi > lo)) {
    const double pad = std::max(1.0, std::abs(lo)) * 0.5;
    return {lo - pad, hi + pad};
  }
  return {lo, hi};
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kSvgWidth - kLeft - kRight); }
  double py(double y) const { return kSvgHeight - kBottom - (y - y0) / (y1 - y0) * (kSvgHeight - kTop - kBottom); }
};

std::string header(const std::string& title) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{3}</text>\n",
      kSvgWidth, kSvgHeight, kSvgWidth / 2, escape(title));
}

}  // namespace

std::string render_svg(const SvgPlot& plot) {
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const auto& s : plot.series) {
    require(s.x.size() == s.y.size(), "series x and y differ in length");
    require(s.lower.size() == s.upper.size() && (s.lower.empty() || s.lower.size() == s.x.size()),
            "series band does not match its points");
    for (double v : s.x) xlo = std::min(xlo, v), xhi = std::max(xhi, v);
    for (const auto* ys : {&s.y, &s.lower, &s.upper}) {
      for (double v : *ys) {
        if (std::isfinite(v)) ylo = std::min(ylo, v), yhi = std::max(yhi, v);
      }
    }
  }
  for (const auto& m : plot.markers) {
    xlo = std::min(xlo, m.x), xhi = std::max(xhi, m.x);
    ylo = std::min(ylo, m.y), yhi = std::max(yhi, m.y);
  }
  if (!std::isfinite(xlo)) xlo = 0, xhi = 1;
  if (!std::isfinite(ylo)) ylo = 0, yhi = 1;
  auto [fx0, fx1] = plot.x_range.value_or(padded(xlo, xhi));
  auto [fy0, fy1] = plot.y_range.value_or(padded(ylo, yhi));
  const Frame f{fx0, fx1, fy0, fy1};

  std::string out = header(plot.title);
  const double left = kLeft, right = kSvgWidth - kRight, top = kTop, bottom = kSvgHeight - kBottom;
  out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" stroke=\"black\"/>\n",
                     left, top, right - left, bottom - top);
  for (int k = 0; k <= 4; ++k) {
    const double tx = f.x0 + (f.x1 - f.x0) * k / 4.0;
    const double ty = f.y0 + (f.y1 - f.y0) * k / 4.0;
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{:.3g}</text>\n", f.px(tx), bottom + 16, tx);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:.3g}</text>\n", left - 6, f.py(ty) + 4, ty);
  }
  out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", (left + right) / 2,
                     bottom + 40, escape(plot.x_label));
  out += fmt::format("<text x=\"16\" y=\"{:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2f})\">{}</text>\n",
                     (top + bottom) / 2, (top + bottom) / 2, escape(plot.y_label));
  out += fmt::format("<clipPath id=\"plot\"><rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\"/></clipPath>\n",
                     left, top, right - left, bottom - top);
  out += "<g clip-path=\"url(#plot)\">\n";
  if (plot.diagonal) {
    out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"gray\" stroke-dasharray=\"2,3\"/>\n",
                       f.px(f.x0), f.py(f.x0), f.px(f.x1), f.py(f.x1));
  }
  for (std::size_t i = 0; i < plot.series.size(); ++i) {
    const auto& s = plot.series[i];
    const char* color = kPalette[i % kPalette.size()];
    if (!s.lower.empty()) {
      std::string pts;
      for (std::size_t k = 0; k < s.x.size(); ++k) pts += fmt::format("{:.2f},{:.2f} ", f.px(s.x[k]), f.py(s.upper[k]));
      for (std::size_t k = s.x.size(); k-- > 0;) pts += fmt::format("{:.2f},{:.2f} ", f.px(s.x[k]), f.py(s.lower[k]));
      out += fmt::format("<polygon points=\"{}\" fill=\"{}\" fill-opacity=\"0.2\" stroke=\"none\"/>\n", pts, color);
    }
    std::string pts;
    for (std::size_t k = 0; k < s.x.size(); ++k) pts += fmt::format("{:.2f},{:.2f} ", f.px(s.x[k]), f.py(s.y[k]));
    out += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{}/>\n", pts, color,
                       s.dashed ? " stroke-dasharray=\"5,4\"" : "");
  }
  for (const auto& m : plot.markers) {
    out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"red\" stroke-dasharray=\"4,3\"/>\n",
                       f.px(m.x), f.py(m.y), bottom);
    out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"red\" stroke-dasharray=\"4,3\"/>\n",
                       left, f.py(m.y), f.px(m.x));
    out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"red\"/>\n", f.px(m.x), f.py(m.y));
  }
  out += "</g>\n";
  for (std::size_t i = 0; i < plot.series.size(); ++i) {
    const double y = top + 16 + 18.0 * static_cast<double>(i);
    out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                       right - 250, y - 4, right - 230, y - 4, kPalette[i % kPalette.size()]);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n", right - 224, y, escape(plot.series[i].label));
  }
  out += "</svg>\n";
  return out;
}

std::string render_bar_svg(const std::string& title, const std::vector<std::pair<std::string, double>>& bars) {
  std::string out = header(title);
  double vmax = 0.0;
  for (const auto& b : bars) vmax = std::max(vmax, b.second);
  if (!(vmax > 0.0)) vmax = 1.0;
  const double left = 140, right = kSvgWidth - kRight, top = kTop, bottom = kSvgHeight - 20.0;
  const double h = bars.empty() ? 0.0 : (bottom - top) / static_cast<double>(bars.size());
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double y = top + h * static_cast<double>(i);
    const double w = std::max(0.0, bars[i].second) / vmax * (right - left - 60);
    out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n", left,
                       y + 0.1 * h, w, 0.8 * h, kPalette[0]);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", left - 6, y + 0.5 * h + 4,
                       escape(bars[i].first));
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">{:.4g}</text>\n", left + w + 4, y + 0.5 * h + 4, bars[i].second);
  }
  out += "</svg>\n";
  return out;
}

}  // namespace grabit
