#pragma once

// Minimal static SVG charts: axes plus bars or polylines, no timestamps.

#include <algorithm>
#include <string>
#include <vector>

#include "lforge/core/table.hpp"

namespace lforge::pipeline {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct ChartFrame {
  double width = 480, height = 320;
  double left = 56, right = 16, top = 36, bottom = 44;
  double plot_w() const { return width - left - right; }
  double plot_h() const { return height - top - bottom; }
};

namespace detail {

inline std::string fx(double v) { return format_fixed(v, 2); }

inline std::string svg_open(const ChartFrame& f, const std::string& title, const std::string& xlabel,
                            const std::string& ylabel) {
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fx(f.width) + "\" height=\"" + fx(f.height) +
       "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + fx(f.width / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" + xml_escape(title) + "</text>\n";
  const double x0 = f.left, y0 = f.top + f.plot_h();
  s += "<line x1=\"" + fx(x0) + "\" y1=\"" + fx(y0) + "\" x2=\"" + fx(x0 + f.plot_w()) + "\" y2=\"" + fx(y0) +
       "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + fx(x0) + "\" y1=\"" + fx(f.top) + "\" x2=\"" + fx(x0) + "\" y2=\"" + fx(y0) + "\" stroke=\"black\"/>\n";
  s += "<text x=\"" + fx(x0 + f.plot_w() / 2) + "\" y=\"" + fx(f.height - 8) + "\" text-anchor=\"middle\">" +
       xml_escape(xlabel) + "</text>\n";
  s += "<text x=\"14\" y=\"" + fx(f.top + f.plot_h() / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
       fx(f.top + f.plot_h() / 2) + ")\">" + xml_escape(ylabel) + "</text>\n";
  return s;
}

inline std::string tick(const ChartFrame& f, double x, double y, const std::string& label, bool on_x) {
  if (on_x)
    return "<text x=\"" + fx(x) + "\" y=\"" + fx(f.top + f.plot_h() + 14) + "\" text-anchor=\"middle\">" +
           xml_escape(label) + "</text>\n";
  return "<text x=\"" + fx(f.left - 4) + "\" y=\"" + fx(y + 4) + "\" text-anchor=\"end\">" + xml_escape(label) + "</text>\n";
}

}  // namespace detail

// Bars over consecutive bins [edges[i], edges[i+1]).
inline std::string bar_chart_svg(const std::string& title, const std::string& xlabel, const std::vector<double>& edges,
                                 const std::vector<int>& counts) {
  ChartFrame f;
  std::string s = detail::svg_open(f, title, xlabel, "count");
  const int top = std::max(1, counts.empty() ? 1 : *std::max_element(counts.begin(), counts.end()));
  const double bw = counts.empty() ? 0.0 : f.plot_w() / static_cast<double>(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double h = f.plot_h() * counts[i] / top;
    const double x = f.left + bw * static_cast<double>(i);
    s += "<rect x=\"" + detail::fx(x + 1) + "\" y=\"" + detail::fx(f.top + f.plot_h() - h) + "\" width=\"" +
         detail::fx(std::max(0.0, bw - 2)) + "\" height=\"" + detail::fx(h) + "\" fill=\"steelblue\"/>\n";
  }
  for (std::size_t i = 0; i < edges.size(); i += std::max<std::size_t>(1, edges.size() / 5))
    s += detail::tick(f, f.left + bw * static_cast<double>(i), 0, format_fixed(edges[i], 2), true);
  s += detail::tick(f, 0, f.top, std::to_string(top), false);
  s += detail::tick(f, 0, f.top + f.plot_h(), "0", false);
  return s + "</svg>\n";
}

// One polyline per series over shared x values.
inline std::string line_chart_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                                  const std::vector<double>& x, const std::vector<std::vector<double>>& series) {
  ChartFrame f;
  std::string s = detail::svg_open(f, title, xlabel, ylabel);
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (!x.empty()) {
    xmin = *std::min_element(x.begin(), x.end());
    xmax = *std::max_element(x.begin(), x.end());
    bool first = true;
    for (const auto& ys : series)
      for (double y : ys) {
        ymin = first ? y : std::min(ymin, y);
        ymax = first ? y : std::max(ymax, y);
        first = false;
      }
  }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  static const char* kColors[] = {"steelblue", "darkorange", "seagreen", "firebrick"};
  for (std::size_t k = 0; k < series.size(); ++k) {
    std::string pts;
    for (std::size_t i = 0; i < x.size() && i < series[k].size(); ++i) {
      const double px = f.left + f.plot_w() * (x[i] - xmin) / (xmax - xmin);
      const double py = f.top + f.plot_h() * (1.0 - (series[k][i] - ymin) / (ymax - ymin));
      pts += (pts.empty() ? "" : " ") + detail::fx(px) + "," + detail::fx(py);
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(kColors[k % 4]) + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
  }
  s += detail::tick(f, f.left, 0, format_fixed(xmin, 0), true);
  s += detail::tick(f, f.left + f.plot_w(), 0, format_fixed(xmax, 0), true);
  s += detail::tick(f, 0, f.top, format_fixed(ymax, 3), false);
  s += detail::tick(f, 0, f.top + f.plot_h(), format_fixed(ymin, 3), false);
  return s + "</svg>\n";
}

}  // namespace lforge::pipeline
