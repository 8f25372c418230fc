/*
 * Copyright 2026 The driftsel Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "driftsel/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace driftsel {

namespace {

constexpr int kWidth = 880;
constexpr int kHeight = 560;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 170;
constexpr int kMarginTop = 50;
constexpr int kMarginBottom = 60;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.6g", value);
  return buffer;
}

std::string escape_xml(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

double nice_step(double range, int target_ticks) {
  if (range <= 0.0) return 1.0;
  const double raw = range / target_ticks;
  const double magnitude = std::pow(10.0, std::floor(std::log10(raw)));
  const double normalized = raw / magnitude;
  double step = 10.0;
  if (normalized <= 1.0) {
    step = 1.0;
  } else if (normalized <= 2.0) {
    step = 2.0;
  } else if (normalized <= 5.0) {
    step = 5.0;
  }
  return step * magnitude;
}

}  // namespace

void write_line_plot_svg(const std::string& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::vector<PlotSeries>& series) {
  if (series.empty()) throw std::invalid_argument("svg plot: no series");
  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  double y_min = x_min;
  double y_max = -x_min;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("svg plot: x/y length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (std::isnan(s.x[i]) || std::isnan(s.y[i])) continue;
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.y[i]);
      y_max = std::max(y_max, s.y[i]);
    }
  }
  if (!(x_min <= x_max)) throw std::invalid_argument("svg plot: no finite points");
  if (x_min == x_max) {
    x_min -= 0.5;
    x_max += 0.5;
  }
  if (y_min == y_max) {
    y_min -= 0.5;
    y_max += 0.5;
  }
  const double y_pad = 0.06 * (y_max - y_min);
  y_min -= y_pad;
  y_max += y_pad;

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  const auto sx = [&](double x) {
    return kMarginLeft + (x - x_min) / (x_max - x_min) * plot_w;
  };
  const auto sy = [&](double y) {
    return kMarginTop + plot_h - (y - y_min) / (y_max - y_min) * plot_h;
  };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("svg plot: cannot open " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"28\" font-family=\"sans-serif\" font-size=\"18\" "
      << "text-anchor=\"middle\">" << escape_xml(title) << "</text>\n";

  // Gridlines and ticks.
  const double y_step = nice_step(y_max - y_min, 6);
  for (double ty = std::ceil(y_min / y_step) * y_step; ty <= y_max + 1e-12; ty += y_step) {
    const double py = sy(ty);
    out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << fmt(py) << "\" x2=\""
        << kMarginLeft + plot_w << "\" y2=\"" << fmt(py)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << fmt(py + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" << fmt(ty)
        << "</text>\n";
  }
  const double x_step = nice_step(x_max - x_min, 8);
  for (double tx = std::ceil(x_min / x_step) * x_step; tx <= x_max + 1e-12; tx += x_step) {
    const double px = sx(tx);
    out << "<line x1=\"" << fmt(px) << "\" y1=\"" << kMarginTop + plot_h << "\" x2=\"" << fmt(px)
        << "\" y2=\"" << kMarginTop + plot_h + 5 << "\" stroke=\"#333333\"/>\n";
    out << "<text x=\"" << fmt(px) << "\" y=\"" << kMarginTop + plot_h + 20
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" << fmt(tx)
        << "</text>\n";
  }

  // Axes.
  out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\"" << kMarginLeft
      << "\" y2=\"" << kMarginTop + plot_h << "\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n";
  out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop + plot_h << "\" x2=\""
      << kMarginLeft + plot_w << "\" y2=\"" << kMarginTop + plot_h
      << "\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n";
  out << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"" << kHeight - 16
      << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">"
      << escape_xml(x_label) << "</text>\n";
  out << "<text x=\"20\" y=\"" << kMarginTop + plot_h / 2
      << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" "
      << "transform=\"rotate(-90 20 " << kMarginTop + plot_h / 2 << ")\">" << escape_xml(y_label)
      << "</text>\n";

  // Series: polyline segments split at missing points, plus point markers.
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    std::string points;
    const auto flush = [&]() {
      if (!points.empty()) {
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.8\" points=\"" << points << "\"/>\n";
        points.clear();
      }
    };
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      if (std::isnan(series[s].x[i]) || std::isnan(series[s].y[i])) {
        flush();
        continue;
      }
      points += fmt(sx(series[s].x[i])) + "," + fmt(sy(series[s].y[i])) + " ";
      out << "<circle cx=\"" << fmt(sx(series[s].x[i])) << "\" cy=\"" << fmt(sy(series[s].y[i]))
          << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    }
    flush();
  }

  // Legend.
  const double legend_x = kMarginLeft + plot_w + 14;
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    const double ly = kMarginTop + 12 + 20.0 * static_cast<double>(s);
    out << "<rect x=\"" << fmt(legend_x) << "\" y=\"" << fmt(ly - 9)
        << "\" width=\"12\" height=\"12\" fill=\"" << color << "\"/>\n";
    out << "<text x=\"" << fmt(legend_x + 18) << "\" y=\"" << fmt(ly + 2)
        << "\" font-family=\"sans-serif\" font-size=\"13\">" << escape_xml(series[s].label)
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace driftsel
