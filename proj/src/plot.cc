// Copyright 2026 The GHCBC Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ghcbc/plot.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "ghcbc/errors.h"

namespace ghcbc {
namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 400;
constexpr double kLeft = 70;
constexpr double kRight = 20;
constexpr double kTop = 40;
constexpr double kBottom = 50;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf"};

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string LineChartSvg(const std::string& title, const std::string& x_label,
                         const std::string& y_label,
                         std::span<const Series> series) {
  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -x0;
  double y0 = x0;
  double y1 = -x0;
  for (const Series& s : series) {
    if (s.x.size() != s.y.size()) {
      throw DimensionError("series '" + s.label + "' has unequal x and y");
    }
    for (double v : s.x) {
      x0 = std::min(x0, v);
      x1 = std::max(x1, v);
    }
    for (double v : s.y) {
      if (!std::isfinite(v)) continue;
      y0 = std::min(y0, v);
      y1 = std::max(y1, v);
    }
  }
  if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0;
  if (!std::isfinite(y0)) y0 = 0.0, y1 = 1.0;
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) y1 = y0 + 1.0;
  y0 = std::min(y0, 0.0);

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + Fmt(kWidth) +
         "\" height=\"" + Fmt(kHeight) + "\" font-family=\"sans-serif\" "
         "font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + Fmt(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" "
         "font-size=\"15\">" + Escape(title) + "</text>\n";
  svg += "<rect x=\"" + Fmt(kLeft) + "\" y=\"" + Fmt(kTop) + "\" width=\"" +
         Fmt(pw) + "\" height=\"" + Fmt(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double xv = x0 + (x1 - x0) * i / kTicks;
    const double yv = y0 + (y1 - y0) * i / kTicks;
    svg += "<text x=\"" + Fmt(px(xv)) + "\" y=\"" + Fmt(kTop + ph + 18) +
           "\" text-anchor=\"middle\">" + Fmt(xv) + "</text>\n";
    svg += "<text x=\"" + Fmt(kLeft - 6) + "\" y=\"" + Fmt(py(yv) + 4) +
           "\" text-anchor=\"end\">" + Fmt(yv) + "</text>\n";
    svg += "<line x1=\"" + Fmt(kLeft) + "\" x2=\"" + Fmt(kLeft + pw) +
           "\" y1=\"" + Fmt(py(yv)) + "\" y2=\"" + Fmt(py(yv)) +
           "\" stroke=\"#dddddd\"/>\n";
  }
  svg += "<text x=\"" + Fmt(kLeft + pw / 2) + "\" y=\"" + Fmt(kHeight - 10) +
         "\" text-anchor=\"middle\">" + Escape(x_label) + "</text>\n";
  svg += "<text transform=\"translate(16," + Fmt(kTop + ph / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + Escape(y_label) +
         "</text>\n";
  for (size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const char* color = kColors[k % std::size(kColors)];
    std::string points;
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      points += Fmt(px(s.x[i])) + "," + Fmt(py(s.y[i])) + " ";
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
    const double ly = kTop + 16 + 16 * static_cast<double>(k);
    svg += "<line x1=\"" + Fmt(kLeft + pw - 150) + "\" x2=\"" +
           Fmt(kLeft + pw - 130) + "\" y1=\"" + Fmt(ly - 4) + "\" y2=\"" +
           Fmt(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + Fmt(kLeft + pw - 125) + "\" y=\"" + Fmt(ly) + "\">" +
           Escape(s.label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::vector<std::filesystem::path> PlotMetrics(
    std::span<const MetricsRow> rows, const std::filesystem::path& out_dir) {
  if (rows.empty()) throw DatasetError("metrics log is empty");
  std::filesystem::create_directories(out_dir);
  struct Metric {
    const char* name;
    const char* label;
    double MetricsRow::*field;
  };
  const Metric metrics[] = {{"success", "success rate", &MetricsRow::success},
                            {"l_reconst", "reconstruction loss",
                             &MetricsRow::l_reconst},
                            {"l_kl", "KL loss", &MetricsRow::l_kl}};
  std::vector<std::filesystem::path> written;
  for (const Metric& m : metrics) {
    Series s;
    s.label = m.name;
    for (const MetricsRow& r : rows) {
      s.x.push_back(r.step);
      s.y.push_back(r.*(m.field));
    }
    const auto path = out_dir / (std::string(m.name) + ".svg");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    const Series one[] = {s};
    out << LineChartSvg(m.label, "step", m.label, one);
    written.push_back(path);
  }
  return written;
}

}  // namespace ghcbc
