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

#ifndef GHCBC_PLOT_H_
#define GHCBC_PLOT_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ghcbc/trainer.h"

namespace ghcbc {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Static line chart with axes, ticks and a legend.
std::string LineChartSvg(const std::string& title, const std::string& x_label,
                         const std::string& y_label,
                         std::span<const Series> series);

// One SVG per metric (success, l_reconst, l_kl) named <metric>.svg in
// `out_dir`. Returns the written paths.
std::vector<std::filesystem::path> PlotMetrics(
    std::span<const MetricsRow> rows, const std::filesystem::path& out_dir);

}  // namespace ghcbc

#endif  // GHCBC_PLOT_H_
