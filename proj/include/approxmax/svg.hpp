#pragma once

// Hand-rolled SVG line charts. No rendering dependency, and nothing
// nondeterministic: fixed palette, fixed margins, nice-number ticks, and
// every coordinate printed with two fixed decimals, so a chart is a pure
// function of its input and can be compared byte for byte.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "approxmax/errors.hpp"

namespace approxmax {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
  bool markers = false;  // circles on each point (sample nodes)
  bool line = true;      // false: markers only
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 800;
  int height = 520;
  std::vector<PlotSeries> series;
};

namespace detail {

inline std::string svg_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string svg_label_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline std::string svg_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

// Largest of 1/2/5 times a power of ten that yields near the target count.
inline double nice_step(double span, int target) {
  const double raw = span / double(target);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  double step = 10.0;
  if (norm <= 1.5) {
    step = 1.0;
  } else if (norm <= 3.0) {
    step = 2.0;
  } else if (norm <= 7.0) {
    step = 5.0;
  }
  return step * mag;
}

inline std::vector<double> nice_ticks(double lo, double hi, int target) {
  const double step = nice_step(hi - lo, target);
  std::vector<double> ticks;
  double t = std::ceil(lo / step) * step;
  for (; t <= hi + step * 1e-9; t += step) {
    // Snap values that should be exact zero.
    ticks.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  }
  return ticks;
}

}  // namespace detail

inline std::string render_svg_chart(const PlotSpec& spec) {
  if (spec.series.empty()) throw config_error("chart needs at least one series");
  for (const PlotSeries& s : spec.series) {
    if (s.points.empty()) {
      throw config_error("series '" + s.label + "' has no points");
    }
  }

  double xmin = spec.series[0].points[0].first, xmax = xmin;
  double ymin = spec.series[0].points[0].second, ymax = ymin;
  for (const PlotSeries& s : spec.series) {
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmin == xmax) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  if (ymin == ymax) {
    const double pad = ymin == 0.0 ? 1.0 : std::abs(ymin) * 0.1;
    ymin -= pad;
    ymax += pad;
  }
  // Breathing room so curves do not sit on the frame.
  const double ypad = (ymax - ymin) * 0.05;
  ymin -= ypad;
  ymax += ypad;

  const double ml = 78.0, mr = 24.0, mt = 44.0, mb = 58.0;
  const double pw = spec.width - ml - mr;
  const double ph = spec.height - mt - mb;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + (ymax - y) / (ymax - ymin) * ph; };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                  "#9467bd", "#ff7f0e", "#8c564b"};
  const std::size_t ncolors = sizeof(palette) / sizeof(palette[0]);

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(spec.width) + "\" height=\"" +
         std::to_string(spec.height) + "\" viewBox=\"0 0 " +
         std::to_string(spec.width) + " " + std::to_string(spec.height) +
         "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  out += "<text x=\"" + detail::svg_num(spec.width / 2.0) +
         "\" y=\"24\" font-family=\"monospace\" font-size=\"15\" "
         "text-anchor=\"middle\">" +
         detail::svg_escape(spec.title) + "</text>\n";

  // Gridlines and ticks.
  for (double t : detail::nice_ticks(xmin, xmax, 8)) {
    const std::string x = detail::svg_num(px(t));
    out += "<line x1=\"" + x + "\" y1=\"" + detail::svg_num(mt) + "\" x2=\"" +
           x + "\" y2=\"" + detail::svg_num(mt + ph) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + x + "\" y=\"" + detail::svg_num(mt + ph + 18.0) +
           "\" font-family=\"monospace\" font-size=\"11\" "
           "text-anchor=\"middle\">" +
           detail::svg_label_num(t) + "</text>\n";
  }
  for (double t : detail::nice_ticks(ymin, ymax, 6)) {
    const std::string y = detail::svg_num(py(t));
    out += "<line x1=\"" + detail::svg_num(ml) + "\" y1=\"" + y + "\" x2=\"" +
           detail::svg_num(ml + pw) + "\" y2=\"" + y +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + detail::svg_num(ml - 6.0) + "\" y=\"" +
           detail::svg_num(py(t) + 4.0) +
           "\" font-family=\"monospace\" font-size=\"11\" "
           "text-anchor=\"end\">" +
           detail::svg_label_num(t) + "</text>\n";
  }

  // Frame.
  out += "<rect x=\"" + detail::svg_num(ml) + "\" y=\"" + detail::svg_num(mt) +
         "\" width=\"" + detail::svg_num(pw) + "\" height=\"" +
         detail::svg_num(ph) +
         "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>\n";

  // Axis labels.
  out += "<text x=\"" + detail::svg_num(ml + pw / 2.0) + "\" y=\"" +
         detail::svg_num(double(spec.height) - 14.0) +
         "\" font-family=\"monospace\" font-size=\"12\" "
         "text-anchor=\"middle\">" +
         detail::svg_escape(spec.x_label) + "</text>\n";
  out += "<text x=\"20\" y=\"" + detail::svg_num(mt + ph / 2.0) +
         "\" font-family=\"monospace\" font-size=\"12\" "
         "text-anchor=\"middle\" transform=\"rotate(-90 20 " +
         detail::svg_num(mt + ph / 2.0) + ")\">" +
         detail::svg_escape(spec.y_label) + "</text>\n";

  // Series.
  for (std::size_t si = 0; si < spec.series.size(); ++si) {
    const PlotSeries& s = spec.series[si];
    const char* color = palette[si % ncolors];
    if (s.line) {
      std::string pts;
      for (const auto& [x, y] : s.points) {
        pts += detail::svg_num(px(x)) + "," + detail::svg_num(py(y)) + " ";
      }
      pts.pop_back();
      out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
             "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    }
    if (s.markers) {
      for (const auto& [x, y] : s.points) {
        out += "<circle cx=\"" + detail::svg_num(px(x)) + "\" cy=\"" +
               detail::svg_num(py(y)) + "\" r=\"3\" fill=\"" + color +
               "\"/>\n";
      }
    }
  }

  // Legend, top-right inside the frame.
  for (std::size_t si = 0; si < spec.series.size(); ++si) {
    const PlotSeries& s = spec.series[si];
    const char* color = palette[si % ncolors];
    const double ly = mt + 16.0 + 16.0 * double(si);
    const double lx = ml + pw - 180.0;
    if (s.line) {
      out += "<line x1=\"" + detail::svg_num(lx) + "\" y1=\"" +
             detail::svg_num(ly - 4.0) + "\" x2=\"" +
             detail::svg_num(lx + 22.0) + "\" y2=\"" +
             detail::svg_num(ly - 4.0) + "\" stroke=\"" + color +
             "\" stroke-width=\"2\"/>\n";
    } else {
      out += "<circle cx=\"" + detail::svg_num(lx + 11.0) + "\" cy=\"" +
             detail::svg_num(ly - 4.0) + "\" r=\"3\" fill=\"" + color +
             "\"/>\n";
    }
    out += "<text x=\"" + detail::svg_num(lx + 28.0) + "\" y=\"" +
           detail::svg_num(ly) +
           "\" font-family=\"monospace\" font-size=\"11\">" +
           detail::svg_escape(s.label) + "</text>\n";
  }

  out += "</svg>\n";
  return out;
}

}  // namespace approxmax
