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

#include "chbt/optics.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "chbt/error.hpp"

namespace chbt {

namespace {

constexpr double kUnitarityTolerance = 1e-12;

void check_dimension(const StateVector& state, const ModeUnitary& unitary) {
  if (unitary.dimension() != state.registry().size()) {
    throw DomainError(fmt::format(
        "unitary of dimension {} applied to a registry of {} modes",
        unitary.dimension(), state.registry().size()));
  }
}

}  // namespace

ModeFrequencies ModeFrequencies::from_wavelengths(double lambda1,
                                                  double lambda2,
                                                  double lambda3) {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0) || !(lambda3 > 0.0)) {
    throw DomainError("wavelengths must be positive");
  }
  ModeFrequencies out{kSpeedOfLight / lambda1, kSpeedOfLight / lambda2,
                      kSpeedOfLight / lambda3};
  out.validate();
  return out;
}

void ModeFrequencies::validate() const {
  if (!(f1 > 0.0 && f1 < f2 && f2 < f3)) {
    throw DomainError(fmt::format(
        "mode frequencies must satisfy 0 < f1 < f2 < f3 (got {}, {}, {})", f1,
        f2, f3));
  }
}

void register_detector_modes(ModeRegistry& registry,
                             const ModeFrequencies& frequencies,
                             std::string port) {
  frequencies.validate();
  for (Branch branch : {Branch::a, Branch::b}) {
    registry.register_mode(std::string(mode_label::gamma1), frequencies.f1,
                           branch, port);
    registry.register_mode(std::string(mode_label::gamma2), frequencies.f2,
                           branch, port);
    registry.register_mode(std::string(mode_label::gamma3), frequencies.f3,
                           branch, port);
    registry.register_mode(std::string(mode_label::gamma1p), frequencies.f1p(),
                           branch, port);
    registry.register_mode(std::string(mode_label::gamma2p), frequencies.f2p(),
                           branch, port);
  }
}

DetectorModes DetectorModes::resolve(const ModeRegistry& registry,
                                     std::string_view port) {
  std::vector<std::string> missing;
  auto get = [&](std::string_view label, Branch branch) -> ModeIndex {
    if (auto index = registry.find(label, branch, port)) return *index;
    missing.push_back(fmt::format("{}:{}{}", to_string(branch), label,
                                  port.empty() ? std::string{}
                                               : fmt::format("@{}", port)));
    return 0;
  };
  DetectorModes modes{};
  modes.a1 = get(mode_label::gamma1, Branch::a);
  modes.a2 = get(mode_label::gamma2, Branch::a);
  modes.a3 = get(mode_label::gamma3, Branch::a);
  modes.a1p = get(mode_label::gamma1p, Branch::a);
  modes.a2p = get(mode_label::gamma2p, Branch::a);
  modes.b1 = get(mode_label::gamma1, Branch::b);
  modes.b2 = get(mode_label::gamma2, Branch::b);
  modes.b3 = get(mode_label::gamma3, Branch::b);
  modes.b1p = get(mode_label::gamma1p, Branch::b);
  modes.b2p = get(mode_label::gamma2p, Branch::b);
  if (!missing.empty()) {
    throw DomainError(
        fmt::format("missing detector modes: {}", fmt::join(missing, ", ")));
  }
  return modes;
}

ConversionSettings ConversionSettings::from_angles(double theta_31,
                                                   double theta_32,
                                                   double theta_2p2,
                                                   double theta_1p1,
                                                   double time) {
  if (!(time > 0.0)) throw DomainError("interaction time must be positive");
  ConversionSettings s;
  s.time = time;
  s.xi_31 = theta_31 / time;
  s.xi_32 = theta_32 / time;
  s.xi_2p2 = theta_2p2 / time;
  s.xi_1p1 = theta_1p1 / time;
  s.validate();
  return s;
}

ConversionSettings ConversionSettings::ideal(double time) {
  return from_angles(kPi / 2, 2 * kPi, kPi / 2, kPi / 2, time);
}

void ConversionSettings::validate() const {
  const double xis[] = {xi_31, xi_32, xi_2p2, xi_1p1};
  for (double xi : xis) {
    if (!(xi >= 0.0) || !std::isfinite(xi)) {
      throw DomainError(
          fmt::format("conversion strength must be finite and >= 0, got {}",
                      xi));
    }
  }
  const double phis[] = {phi_31, phi_32, phi_2p2, phi_1p1};
  for (double phi : phis) {
    if (!std::isfinite(phi)) throw DomainError("conversion phase not finite");
  }
  if (!(time > 0.0) || !std::isfinite(time)) {
    throw DomainError("interaction time must be positive");
  }
  const double thetas[] = {theta_31(), theta_32(), theta_2p2(), theta_1p1()};
  for (double theta : thetas) {
    if (!std::isfinite(theta)) throw DomainError("conversion angle overflow");
  }
}

std::vector<SfgCoupling> sfg_couplings(const DetectorModes& modes,
                                       const ConversionSettings& s) {
  s.validate();
  return {
      {modes.a1, modes.a3, s.theta_31(), s.phi_31},
      {modes.a2, modes.a2p, s.theta_2p2(), s.phi_2p2},
      {modes.b2, modes.b3, kPi / 2 - s.theta_32(), s.phi_32},
      {modes.b1, modes.b1p, s.theta_1p1(), s.phi_1p1},
  };
}

ModeUnitary::ModeUnitary(Eigen::MatrixXcd matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) {
    throw DomainError("mode unitary must be square");
  }
  const auto n = matrix_.rows();
  const Eigen::MatrixXcd gram = matrix_.adjoint() * matrix_;
  const double error =
      (gram - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (n > 0 && !(error <= kUnitarityTolerance)) {
    throw DomainError(
        fmt::format("matrix is not unitary (max |U^dag U - I| = {:.3e})",
                    error));
  }
}

ModeUnitary ModeUnitary::identity(std::size_t dimension) {
  const auto n = static_cast<Eigen::Index>(dimension);
  return ModeUnitary(Eigen::MatrixXcd::Identity(n, n), Unchecked{});
}

ModeUnitary operator*(const ModeUnitary& later, const ModeUnitary& earlier) {
  if (later.dimension() != earlier.dimension()) {
    throw DomainError("cannot compose unitaries of different dimension");
  }
  return ModeUnitary(later.matrix_ * earlier.matrix_, ModeUnitary::Unchecked{});
}

ModeUnitary beamsplitter_unitary(const ModeRegistry& registry,
                                 std::span<const ModePair> pairs) {
  const auto n = static_cast<Eigen::Index>(registry.size());
  Eigen::MatrixXcd matrix = Eigen::MatrixXcd::Identity(n, n);
  std::vector<bool> used(registry.size(), false);
  const double r = 1.0 / std::sqrt(2.0);
  for (const auto& [a, b] : pairs) {
    if (a >= registry.size() || b >= registry.size()) {
      throw DomainError("beamsplitter pair references an unknown mode");
    }
    if (a == b) throw DomainError("beamsplitter pair needs two distinct modes");
    if (used[a] || used[b]) {
      throw DomainError(fmt::format(
          "overlapping beamsplitter pairs on mode {}",
          used[a] ? registry[a].label : registry[b].label));
    }
    const auto& ma = registry[a];
    const auto& mb = registry[b];
    if (ma.branch != Branch::a || mb.branch != Branch::b) {
      throw DomainError(fmt::format(
          "beamsplitter pair ({}, {}) must be (branch a, branch b)", ma.label,
          mb.label));
    }
    if (std::abs(ma.frequency - mb.frequency) >
        1e-12 * std::max(ma.frequency, mb.frequency)) {
      throw DomainError(fmt::format(
          "beamsplitter pair ({}, {}) joins different frequencies", ma.label,
          mb.label));
    }
    used[a] = used[b] = true;
    const auto ia = static_cast<Eigen::Index>(a);
    const auto ib = static_cast<Eigen::Index>(b);
    matrix(ia, ia) = r;
    matrix(ib, ia) = r;
    matrix(ia, ib) = r;
    matrix(ib, ib) = -r;
  }
  return ModeUnitary(std::move(matrix));
}

StateVector beamsplitter(const StateVector& state,
                         std::span<const ModePair> pairs) {
  return evolve(state, beamsplitter_unitary(state.registry(), pairs));
}

std::vector<ModePair> beamsplitter_pairs(const ModeRegistry& registry,
                                         std::string_view port) {
  std::vector<ModePair> pairs;
  for (const auto& mode : registry.modes()) {
    if (mode.branch != Branch::a || mode.port != port) continue;
    if (auto twin = registry.find(mode.label, Branch::b, port)) {
      pairs.emplace_back(mode.index, *twin);
    }
  }
  return pairs;
}

ModeUnitary sfg_unitary(const ModeRegistry& registry,
                        const ConversionSettings& settings,
                        std::string_view port) {
  const auto modes = DetectorModes::resolve(registry, port);
  const auto n = static_cast<Eigen::Index>(registry.size());
  Eigen::MatrixXcd matrix = Eigen::MatrixXcd::Identity(n, n);
  for (const auto& c : sfg_couplings(modes, settings)) {
    const auto lo = static_cast<Eigen::Index>(c.low);
    const auto hi = static_cast<Eigen::Index>(c.high);
    const double cs = std::cos(c.angle);
    const double sn = std::sin(c.angle);
    const Complex e = std::polar(1.0, c.phase);
    matrix(lo, lo) = cs;
    matrix(hi, lo) = e * sn;
    matrix(lo, hi) = -std::conj(e) * sn;
    matrix(hi, hi) = cs;
  }
  return ModeUnitary(std::move(matrix));
}

StateVector evolve(const StateVector& state, const ModeUnitary& unitary) {
  check_dimension(state, unitary);
  const std::size_t n = unitary.dimension();

  // Non-zero entries of each column: the image of a_k^dag.
  std::vector<std::vector<std::pair<ModeIndex, Complex>>> columns(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      const Complex u = unitary(j, k);
      if (u != Complex{}) columns[k].emplace_back(j, u);
    }
  }

  std::vector<double> factorial(kMaxSupportedPhotons + 1, 1.0);
  for (int i = 1; i <= kMaxSupportedPhotons; ++i) factorial[i] = factorial[i - 1] * i;

  StateVector::Amplitudes out;
  std::vector<ModeIndex> photons;
  FockBasisState target = vacuum_occupation(n);
  for (const auto& [basis, value] : state.amplitudes()) {
    photons.clear();
    double norm = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      for (int p = 0; p < basis.occupation[k]; ++p) photons.push_back(k);
      norm *= factorial[basis.occupation[k]];
    }
    const Complex prefactor = value / std::sqrt(norm);

    // Expand prod_i (sum_j U_{j,p_i} a_j^dag) |0> term by term.
    auto expand = [&](auto&& self, std::size_t i, Complex coefficient) -> void {
      if (i == photons.size()) {
        double weight = 1.0;
        for (auto m : target.occupation) weight *= factorial[m];
        out[target] += prefactor * coefficient * std::sqrt(weight);
        return;
      }
      for (const auto& [j, u] : columns[photons[i]]) {
        ++target.occupation[j];
        self(self, i + 1, coefficient * u);
        --target.occupation[j];
      }
    };
    expand(expand, 0, Complex{1.0, 0.0});
  }
  return StateVector(state.registry_ptr(), state.max_photons(),
                     std::move(out));
}

FilterResult spectral_filter(const StateVector& state, ModeIndex keep,
                             Branch branch) {
  const auto& registry = state.registry();
  if (keep >= registry.size()) {
    throw DomainError(fmt::format("filter mode index {} out of range", keep));
  }
  const auto& port = registry[keep].port;
  std::vector<bool> blocked(registry.size(), false);
  for (const auto& mode : registry.modes()) {
    blocked[mode.index] =
        mode.index != keep && mode.branch == branch && mode.port == port;
  }
  StateVector::Amplitudes kept;
  double discarded = 0.0;
  for (const auto& [basis, value] : state.amplitudes()) {
    bool pass = true;
    for (std::size_t k = 0; k < basis.occupation.size() && pass; ++k) {
      pass = !(blocked[k] && basis.occupation[k] > 0);
    }
    if (pass) {
      kept.emplace(basis, value);
    } else {
      discarded += std::norm(value);
    }
  }
  return {StateVector(state.registry_ptr(), state.max_photons(),
                      std::move(kept)),
          discarded};
}

bool ModeSelector::matches(const ModeId& mode) const {
  return (!branch || mode.branch == *branch) && (!port || mode.port == *port);
}

ModeUnitary phase_delay_unitary(const ModeRegistry& registry,
                                const ModeSelector& selector, double t_delay) {
  if (!std::isfinite(t_delay)) throw DomainError("delay must be finite");
  const auto n = static_cast<Eigen::Index>(registry.size());
  Eigen::MatrixXcd matrix = Eigen::MatrixXcd::Identity(n, n);
  for (const auto& mode : registry.modes()) {
    if (!selector.matches(mode)) continue;
    const auto i = static_cast<Eigen::Index>(mode.index);
    matrix(i, i) = std::polar(1.0, -2.0 * kPi * mode.frequency * t_delay);
  }
  return ModeUnitary(std::move(matrix));
}

StateVector phase_delay(const StateVector& state, const ModeSelector& selector,
                        double t_delay) {
  return evolve(state, phase_delay_unitary(state.registry(), selector, t_delay));
}

}  // namespace chbt
