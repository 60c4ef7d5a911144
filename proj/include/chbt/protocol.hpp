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

// The assembled colour-erasure detector, the two-detector chromatic HBT
// experiment built from it, and the analytic g2 models fitted to data.

#include <array>
#include <string>
#include <string_view>

#include "chbt/fock.hpp"
#include "chbt/optics.hpp"

namespace chbt {

/// 1064.4 nm, 1063.6 nm and 630.8 nm lines.
ModeFrequencies default_mode_frequencies();

struct ErasureDetectorConfig {
  ConversionSettings settings = ConversionSettings::ideal();
  std::string label = "A";
  /// When set, validate() insists on the ideal tuning.
  bool ideal = false;

  /// theta_31 = pi/2 mod 2pi, theta_32 = 0 mod 2pi, phi_31 = phi_32 = 0.
  bool is_ideally_tuned(double tolerance = 1e-9) const;
  void validate() const;
};

/// Every intermediate state of one pass through a detector.
struct ErasureTrace {
  StateVector input;
  StateVector after_first_splitter;
  StateVector after_conversion;
  StateVector after_second_splitter;
  StateVector filtered;
  double discarded = 0.0;
  Complex amplitude;  // on a_gamma3^dag |0>

  double detection_probability() const { return std::norm(amplitude); }
};

/// Beamsplitter, both waveguides, beamsplitter: the linear part of a
/// detector on `port`.
ModeUnitary erasure_unitary(const ModeRegistry& registry,
                            const ConversionSettings& settings,
                            std::string_view port = {});

/// Runs (alpha a1^dag + beta a2^dag)|0> through one detector.
ErasureTrace run_erasure_detector(
    Complex alpha, Complex beta, const ErasureDetectorConfig& config,
    const ModeFrequencies& frequencies = default_mode_frequencies());

/// Amplitude of the post-selected gamma3 photon; (alpha + beta)/2 when tuned.
Complex erase_and_detect(Complex alpha, Complex beta,
                         const ErasureDetectorConfig& config);

struct HbtScenario {
  Complex alpha{1.0 / 1.4142135623730951, 0.0};
  Complex beta{1.0 / 1.4142135623730951, 0.0};
  ErasureDetectorConfig detector_a{ConversionSettings::ideal(), "A", false};
  ErasureDetectorConfig detector_b{ConversionSettings::ideal(), "B", false};
  /// Extra delay on the path from the first beamsplitter to detector A.
  double t_delay = 0.0;
  bool erasure_enabled = true;
  ModeFrequencies frequencies = default_mode_frequencies();

  void validate() const;
};

struct HbtCoincidence {
  bool interfering = true;
  /// Coefficient of a_gamma3^dag b_gamma3^dag |0> (erasure enabled).
  Complex amplitude;
  /// Coefficients of a1^dag b2^dag |0> and a2^dag b1^dag |0> (erasure
  /// disabled); these are orthogonal and never interfere.
  std::array<Complex, 2> which_path{};
  double probability = 0.0;
};

/// Two-photon simulation of alpha a1^dag b2^dag + beta a2^dag b1^dag.
HbtCoincidence hbt_coincidence_amplitude(const HbtScenario& scenario);

/// g2(tau = 0) predicted by the two-photon simulation for a fringe of
/// visibility `epsilon`: the simulation supplies the interference term, the
/// visibility comes from count rates. Exactly 1 without erasure.
double predicted_g2_zero(const HbtScenario& scenario, double epsilon);

enum class G2ModelKind { delay, tau };

std::string_view to_string(G2ModelKind kind);
G2ModelKind parse_model_kind(std::string_view text);

struct G2Model {
  G2ModelKind kind = G2ModelKind::delay;
  double epsilon = 0.0;
  double phi = 0.0;      // phi0 (delay) or phi1 (tau), rad
  double delta_f = 0.0;  // Hz
  double gamma = 0.0;    // 1/s, tau model only

  void validate() const;
};

/// 1 + (eps/2) cos(phi0 + 2 pi df t_delay)
double g2_zero_model(const G2Model& model, double t_delay);
/// 1 + (eps/2) exp(-gamma^2 tau^2) cos(phi1 + 2 pi df tau)
double g2_tau_model(const G2Model& model, double tau);

/// Fringe visibility from per-source and stray counts at each detector.
double visibility_from_counts(double n1a, double n2a, double n1b, double n2b,
                              double nda, double ndb);

}  // namespace chbt
