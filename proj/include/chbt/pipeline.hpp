// Copyright 2026 The chbt Authors
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

#pragma once

// Simulate, analyse and fit chained together, with the calibrated presets
// for the delay-scan and tau-scan figures.

#include <string>
#include <string_view>

#include "chbt/config.hpp"
#include "chbt/fit.hpp"
#include "chbt/g2.hpp"
#include "chbt/tdc.hpp"

namespace chbt {

enum class Figure { fig2, fig3 };

std::string_view to_string(Figure figure);
Figure parse_figure(std::string_view text);

/// fig2: 20 delay settings over 1.5 fringe periods with
/// (epsilon, phi0, delta_f21) = (0.59, -0.16, 210.1 GHz).
/// fig3: one acquisition scanned in tau with
/// (epsilon, gamma, phi1, delta_f3) = (0.576, 0.118 MHz, -0.434, 1.32 MHz).
RunConfig figure_preset(Figure figure);

/// Delay model: one point per stream segment. Tau model: the configured tau
/// grid.
G2Curve analyze_stream(const RunConfig& config, const TdcStream& stream);

/// Fits the model named by the config to a curve.
FitResult fit_curve(const RunConfig& config, const G2Curve& curve);

struct Reproduction {
  SimulationStats stats;
  std::size_t clicks = 0;
  G2Curve curve;
  FitResult fit;
};

Reproduction run_pipeline(const RunConfig& config);

/// x, g2, sigma, model
std::string plot_csv(const G2Curve& curve, const FitResult& fit);

}  // namespace chbt
