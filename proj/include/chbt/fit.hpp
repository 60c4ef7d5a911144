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

// Weighted Levenberg-Marquardt fits of g2 curves to the delay-scan and
// tau-scan fringe models.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chbt/g2.hpp"
#include "chbt/protocol.hpp"

namespace chbt {

/// Parameter order: delay (epsilon, phi, delta_f); tau (epsilon, gamma, phi,
/// delta_f).
std::vector<std::string_view> parameter_names(G2ModelKind kind);
std::vector<double> parameter_vector(const G2Model& model);
G2Model model_from_parameters(G2ModelKind kind, std::span<const double> p);

double model_value(const G2Model& model, double x);
/// Analytic partial derivatives in parameter order.
std::vector<double> model_gradient(const G2Model& model, double x);

/// epsilon >= 0, delta_f >= 0, gamma >= 0, phi in (-pi, pi].
G2Model canonicalize(const G2Model& model);

struct FitParameter {
  std::string name;
  double value = 0.0;
  /// Absent when the curvature matrix is singular.
  std::optional<double> std_error;
  /// |value| < 2 std_error.
  bool weak = false;
};

struct FitResult {
  G2ModelKind kind = G2ModelKind::delay;
  std::vector<FitParameter> params;
  double chi2 = 0.0;
  int dof = 0;
  bool converged = false;
  int iterations = 0;
  bool degenerate = false;
  bool weighted = true;
  /// chi2 after every accepted step of the winning start.
  std::vector<double> chi2_history;

  const FitParameter& param(std::string_view name) const;
  G2Model model() const;
};

struct FitOptions {
  bool weighted = true;
  int max_iterations = 200;
  /// Frequency band searched by the multi-start, relative to the coarse
  /// periodogram peak.
  double band_low = 0.5;
  double band_high = 1.5;
  int starts = 11;
};

/// epsilon from the curve's range, delta_f from a periodogram peak, phi
/// from the periodogram argument, gamma from the second moment of the
/// fringe power. Never throws for curves with at least one point.
G2Model initial_guess(const G2Curve& curve, G2ModelKind kind);

/// Needs >= 4 points; path_length x is converted back to t_delay.
FitResult fit_delay_model(const G2Curve& curve,
                          std::optional<G2Model> guess = std::nullopt,
                          const FitOptions& options = {});
/// Needs >= 5 points with x = tau.
FitResult fit_tau_model(const G2Curve& curve,
                        std::optional<G2Model> guess = std::nullopt,
                        const FitOptions& options = {});

std::string fit_to_json(const FitResult& result, int indent = 2);
/// Human-readable summary with values in display units (GHz, MHz).
std::string format_fit_table(const FitResult& result);

}  // namespace chbt
