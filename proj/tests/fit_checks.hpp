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

// Fitter checks shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "chbt/fit.hpp"
#include "chbt/optics.hpp"

namespace checks {

/// Random parameters in the regime of each model, in physical units.
inline chbt::G2Model random_model(std::mt19937_64& rng, chbt::G2ModelKind kind) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  chbt::G2Model m;
  m.kind = kind;
  m.epsilon = 0.05 + 0.9 * u(rng);
  m.phi = chbt::kPi * (2.0 * u(rng) - 1.0);
  if (kind == chbt::G2ModelKind::delay) {
    m.delta_f = 50e9 + 400e9 * u(rng);
  } else {
    m.delta_f = 0.5e6 + 2e6 * u(rng);
    m.gamma = 0.05e6 + 0.2e6 * u(rng);
  }
  return m;
}

inline double random_x(std::mt19937_64& rng, chbt::G2ModelKind kind) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return kind == chbt::G2ModelKind::delay ? 10e-12 * (1.0 + u(rng)) : 40e-6 * u(rng);
}

/// Largest |analytic - central difference| / max(|analytic|, floor) over
/// `points` random (model, x) pairs. Frequencies and rates are perturbed
/// relative to their size; the floor is 1e-3 of the largest component in
/// units where every parameter is O(1).
inline double jacobian_error(std::mt19937_64& rng, chbt::G2ModelKind kind, int points) {
  double worst = 0.0;
  for (int n = 0; n < points; ++n) {
    const auto m = random_model(rng, kind);
    const double x = random_x(rng, kind);
    const auto analytic = chbt::model_gradient(m, x);
    const auto p = chbt::parameter_vector(m);
    const auto names = chbt::parameter_names(kind);
    std::vector<double> scale(p.size(), 1.0);
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (names[k] == "delta_f" || names[k] == "gamma") scale[k] = std::abs(p[k]);
    }
    double largest = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      largest = std::max(largest, std::abs(analytic[k]) * scale[k]);
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
      // Fourth-order central difference.
      const double h = 1e-4 * scale[k];
      auto at = [&](double offset) {
        auto q = p;
        q[k] += offset;
        return chbt::model_value(chbt::model_from_parameters(kind, q), x);
      };
      const double fd =
          (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
      const double a = analytic[k] * scale[k];
      const double diff = std::abs(a - fd * scale[k]);
      // g2 is O(1): central differences cannot resolve scaled slopes far
      // below 1e-4, which happens deep in the tau envelope tail.
      worst = std::max(worst, diff / std::max({std::abs(a), 1e-3 * largest, 1e-4}));
    }
  }
  return worst;
}

/// Evenly spaced noiseless curve; sigma is used as the weight.
inline chbt::G2Curve synthetic_curve(const chbt::G2Model& m, double x0, double x1,
                                     int n, double sigma = 0.01) {
  chbt::G2Curve c;
  c.kind = m.kind == chbt::G2ModelKind::delay ? chbt::XKind::t_delay : chbt::XKind::tau;
  for (int i = 0; i < n; ++i) {
    const double x = x0 + (x1 - x0) * i / (n - 1);
    c.points.push_back({x, chbt::model_value(m, x), sigma});
  }
  return c;
}

/// Largest relative parameter error, |fit - truth| / max(|truth|, floor).
inline double recovery_error(const chbt::FitResult& r, const chbt::G2Model& truth,
                             double floor = 0.0) {
  const auto t = chbt::parameter_vector(chbt::canonicalize(truth));
  double worst = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double d = std::abs(r.params[k].value - t[k]);
    worst = std::max(worst, d / std::max(std::abs(t[k]), floor));
  }
  return worst;
}

inline chbt::FitResult fit(const chbt::G2Curve& c, const chbt::FitOptions& o = {}) {
  return c.kind == chbt::XKind::tau ? chbt::fit_tau_model(c, std::nullopt, o)
                                    : chbt::fit_delay_model(c, std::nullopt, o);
}

}  // namespace checks
