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

// Optical elements of one colour-erasure detector: 50-50 beamsplitters,
// sum-frequency conversion, spectral filtering and path delays. Every element
// except the filter is a passive linear map, represented by its single-photon
// mode unitary and lifted to the Fock space by evolve().

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "chbt/fock.hpp"

namespace chbt {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;

namespace mode_label {
inline constexpr std::string_view gamma1 = "gamma1";
inline constexpr std::string_view gamma2 = "gamma2";
inline constexpr std::string_view gamma3 = "gamma3";
inline constexpr std::string_view gamma1p = "gamma1p";  // f1 + (f3 - f2)
inline constexpr std::string_view gamma2p = "gamma2p";  // f2 + (f3 - f1)
}  // namespace mode_label

/// Source and target line frequencies of the erasure scheme, f1 < f2 < f3.
struct ModeFrequencies {
  double f1 = 0.0;
  double f2 = 0.0;
  double f3 = 0.0;

  double f1p() const { return f1 + (f3 - f2); }
  double f2p() const { return f2 + (f3 - f1); }
  double delta_f21() const { return f2 - f1; }

  static ModeFrequencies from_wavelengths(double lambda1, double lambda2,
                                          double lambda3);
  void validate() const;
};

/// Registers gamma1, gamma2, gamma3, gamma1p, gamma2p on both branches of
/// `port`, branch a first.
void register_detector_modes(ModeRegistry& registry,
                             const ModeFrequencies& frequencies,
                             std::string port = {});

/// Indices of the ten modes of one detector.
struct DetectorModes {
  ModeIndex a1, a2, a3, a1p, a2p;
  ModeIndex b1, b2, b3, b1p, b2p;

  /// Throws DomainError listing every absent mode.
  static DetectorModes resolve(const ModeRegistry& registry,
                               std::string_view port = {});
};

/// Conversion strengths (rad/s), phases (rad) and interaction time (s) of
/// the two pumped waveguides. Branch a converts gamma1 -> gamma3 and
/// gamma2 -> gamma2p; branch b converts gamma2 -> gamma3 and gamma1 -> gamma1p.
struct ConversionSettings {
  double xi_31 = 0.0;
  double xi_32 = 0.0;
  double xi_2p2 = 0.0;
  double xi_1p1 = 0.0;
  double phi_31 = 0.0;
  double phi_32 = 0.0;
  double phi_2p2 = 0.0;
  double phi_1p1 = 0.0;
  double time = 1e-9;

  double theta_31() const { return time * xi_31; }
  double theta_32() const { return time * xi_32; }
  double theta_2p2() const { return time * xi_2p2; }
  double theta_1p1() const { return time * xi_1p1; }

  /// Builds settings from conversion angles theta = time * xi.
  static ConversionSettings from_angles(double theta_31, double theta_32,
                                        double theta_2p2, double theta_1p1,
                                        double time = 1e-9);
  /// phi = 0, theta_31 = pi/2, theta_32 = 2 pi, spectator pairs at pi/2.
  static ConversionSettings ideal(double time = 1e-9);

  void validate() const;
};

/// One two-mode mixer inside a waveguide: after the interaction
///   a_low^dag  -> cos(angle) a_low^dag + e^{i phase} sin(angle) a_high^dag
///   a_high^dag -> cos(angle) a_high^dag - e^{-i phase} sin(angle) a_low^dag
struct SfgCoupling {
  ModeIndex low = 0;
  ModeIndex high = 0;
  double angle = 0.0;
  double phase = 0.0;
};

/// The four mixers of a detector. The branch-b signal pair (gamma2, gamma3)
/// is parametrised by its complement, angle = pi/2 - theta_32, so that its
/// gamma3 output amplitude is e^{i phi_32} cos(theta_32).
std::vector<SfgCoupling> sfg_couplings(const DetectorModes& modes,
                                       const ConversionSettings& settings);

/// Single-photon-sector unitary. Column k is the image of a_k^dag.
class ModeUnitary {
 public:
  /// Throws DomainError unless the matrix is square and unitary to 1e-12.
  explicit ModeUnitary(Eigen::MatrixXcd matrix);

  static ModeUnitary identity(std::size_t dimension);

  const Eigen::MatrixXcd& matrix() const noexcept { return matrix_; }
  std::size_t dimension() const noexcept {
    return static_cast<std::size_t>(matrix_.rows());
  }
  Complex operator()(ModeIndex row, ModeIndex col) const {
    return matrix_(static_cast<Eigen::Index>(row),
                   static_cast<Eigen::Index>(col));
  }

  /// `later * earlier` applies `earlier` first.
  friend ModeUnitary operator*(const ModeUnitary& later,
                               const ModeUnitary& earlier);

 private:
  struct Unchecked {};
  ModeUnitary(Eigen::MatrixXcd matrix, Unchecked) : matrix_(std::move(matrix)) {}

  Eigen::MatrixXcd matrix_;
};

using ModePair = std::pair<ModeIndex, ModeIndex>;

/// a^dag -> (a^dag + b^dag)/sqrt2, b^dag -> (a^dag - b^dag)/sqrt2 for every
/// (branch-a mode, branch-b mode) pair.
ModeUnitary beamsplitter_unitary(const ModeRegistry& registry,
                                 std::span<const ModePair> pairs);
StateVector beamsplitter(const StateVector& state,
                         std::span<const ModePair> pairs);
/// Pairs every branch-a mode of `port` with its branch-b twin.
std::vector<ModePair> beamsplitter_pairs(const ModeRegistry& registry,
                                         std::string_view port = {});

/// e^{-iHT} of the two waveguides of `port` in the single-photon sector.
ModeUnitary sfg_unitary(const ModeRegistry& registry,
                        const ConversionSettings& settings,
                        std::string_view port = {});

/// Second-quantised action of a mode unitary on every photon of the state.
StateVector evolve(const StateVector& state, const ModeUnitary& unitary);

struct FilterResult {
  StateVector state;
  double discarded = 0.0;  // probability mass removed
};

/// Drops every component with a photon in a mode of `branch` (same port as
/// `keep`) other than `keep`. The surviving state is not renormalised.
FilterResult spectral_filter(const StateVector& state, ModeIndex keep,
                             Branch branch);

struct ModeSelector {
  std::optional<Branch> branch;
  std::optional<std::string> port;

  bool matches(const ModeId& mode) const;
};

/// Each selected photon of frequency f picks up e^{-2 pi i f t_delay}.
ModeUnitary phase_delay_unitary(const ModeRegistry& registry,
                                const ModeSelector& selector, double t_delay);
StateVector phase_delay(const StateVector& state, const ModeSelector& selector,
                        double t_delay);

}  // namespace chbt
