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

#include "chbt/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <fmt/format.h>

#include "chbt/error.hpp"

namespace chbt {

namespace {

double angle_offset(double angle, double target) {
  // Distance of `angle` from target + 2 pi k.
  const double r = std::remainder(angle - target, 2.0 * kPi);
  return std::abs(r);
}

std::shared_ptr<ModeRegistry> hbt_registry(const ModeFrequencies& frequencies) {
  auto registry = std::make_shared<ModeRegistry>();
  register_detector_modes(*registry, frequencies, "A");
  register_detector_modes(*registry, frequencies, "B");
  return registry;
}

struct HbtRun {
  StateVector state;  // after all linear optics, before filtering
  RegistryPtr registry;
};

HbtRun run_hbt_optics(Complex alpha, Complex beta, const HbtScenario& s) {
  auto registry = hbt_registry(s.frequencies);
  const auto& reg = *registry;
  const auto a = DetectorModes::resolve(reg, "A");
  const auto b = DetectorModes::resolve(reg, "B");
  const auto n = reg.size();

  StateVector::Amplitudes amplitudes;
  amplitudes[occupation_of(n, {a.a1, b.a2})] += alpha;
  amplitudes[occupation_of(n, {a.a2, b.a1})] += beta;
  StateVector state(registry, kDefaultMaxPhotons, std::move(amplitudes));

  ModeUnitary optics = phase_delay_unitary(reg, ModeSelector{{}, "A"}, s.t_delay);
  if (s.erasure_enabled) {
    optics = erasure_unitary(reg, s.detector_b.settings, "B") *
             erasure_unitary(reg, s.detector_a.settings, "A") * optics;
  }
  return {evolve(state, optics), registry};
}

HbtCoincidence coincidence(Complex alpha, Complex beta, const HbtScenario& s) {
  auto [state, registry] = run_hbt_optics(alpha, beta, s);
  const auto& reg = *registry;
  const auto a = DetectorModes::resolve(reg, "A");
  const auto b = DetectorModes::resolve(reg, "B");
  const auto n = reg.size();

  HbtCoincidence out;
  if (s.erasure_enabled) {
    auto filtered = spectral_filter(state, a.a3, Branch::a).state;
    filtered = spectral_filter(filtered, b.a3, Branch::a).state;
    out.interfering = true;
    out.amplitude = filtered.amplitude(occupation_of(n, {a.a3, b.a3}));
    out.probability = std::norm(out.amplitude);
  } else {
    out.interfering = false;
    out.which_path = {state.amplitude(occupation_of(n, {a.a1, b.a2})),
                      state.amplitude(occupation_of(n, {a.a2, b.a1}))};
    out.probability =
        std::norm(out.which_path[0]) + std::norm(out.which_path[1]);
  }
  return out;
}

}  // namespace

ModeFrequencies default_mode_frequencies() {
  return ModeFrequencies::from_wavelengths(1064.4e-9, 1063.6e-9, 630.8e-9);
}

bool ErasureDetectorConfig::is_ideally_tuned(double tolerance) const {
  return angle_offset(settings.theta_31(), kPi / 2) <= tolerance &&
         angle_offset(settings.theta_32(), 0.0) <= tolerance &&
         angle_offset(settings.phi_31, 0.0) <= tolerance &&
         angle_offset(settings.phi_32, 0.0) <= tolerance;
}

void ErasureDetectorConfig::validate() const {
  settings.validate();
  if (ideal && !is_ideally_tuned()) {
    throw DomainError(fmt::format(
        "detector {} is flagged ideal but theta_31 = {}, theta_32 = {}, "
        "phi_31 = {}, phi_32 = {}",
        label, settings.theta_31(), settings.theta_32(), settings.phi_31,
        settings.phi_32));
  }
}

ModeUnitary erasure_unitary(const ModeRegistry& registry,
                            const ConversionSettings& settings,
                            std::string_view port) {
  const auto pairs = beamsplitter_pairs(registry, port);
  const auto splitter = beamsplitter_unitary(registry, pairs);
  return splitter * sfg_unitary(registry, settings, port) * splitter;
}

ErasureTrace run_erasure_detector(Complex alpha, Complex beta,
                                  const ErasureDetectorConfig& config,
                                  const ModeFrequencies& frequencies) {
  config.validate();
  if (std::norm(alpha) + std::norm(beta) > 1.0 + 1e-12) {
    throw DomainError("|alpha|^2 + |beta|^2 must not exceed 1");
  }
  auto registry = std::make_shared<ModeRegistry>();
  register_detector_modes(*registry, frequencies, config.label);
  const auto modes = DetectorModes::resolve(*registry, config.label);
  const auto pairs = beamsplitter_pairs(*registry, config.label);

  const auto vacuum = StateVector::vacuum(registry);
  auto input = alpha * apply_creation(vacuum, modes.a1) +
               beta * apply_creation(vacuum, modes.a2);
  auto split = beamsplitter(input, pairs);
  auto converted =
      evolve(split, sfg_unitary(*registry, config.settings, config.label));
  auto recombined = beamsplitter(converted, pairs);
  auto [filtered, discarded] = spectral_filter(recombined, modes.a3, Branch::a);
  const Complex amplitude = project_single_photon(filtered, modes.a3);
  return ErasureTrace{std::move(input),      std::move(split),
                      std::move(converted),  std::move(recombined),
                      std::move(filtered),   discarded,
                      amplitude};
}

Complex erase_and_detect(Complex alpha, Complex beta,
                         const ErasureDetectorConfig& config) {
  return run_erasure_detector(alpha, beta, config).amplitude;
}

void HbtScenario::validate() const {
  const double norm = std::norm(alpha) + std::norm(beta);
  if (std::abs(norm - 1.0) > 1e-12) {
    throw DomainError(
        fmt::format("|alpha|^2 + |beta|^2 = {} (must be 1)", norm));
  }
  if (!std::isfinite(t_delay)) throw DomainError("delay must be finite");
  detector_a.validate();
  detector_b.validate();
  frequencies.validate();
}

HbtCoincidence hbt_coincidence_amplitude(const HbtScenario& scenario) {
  scenario.validate();
  return coincidence(scenario.alpha, scenario.beta, scenario);
}

double predicted_g2_zero(const HbtScenario& scenario, double epsilon) {
  scenario.validate();
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw DomainError("visibility must lie in [0, 1]");
  }
  const double both = coincidence(scenario.alpha, scenario.beta, scenario).probability;
  const double only_alpha = coincidence(scenario.alpha, 0.0, scenario).probability;
  const double only_beta = coincidence(0.0, scenario.beta, scenario).probability;
  const double scale = 2.0 * std::sqrt(only_alpha * only_beta);
  if (scale <= 0.0) return 1.0;
  const double fringe = (both - only_alpha - only_beta) / scale;
  return 1.0 + 0.5 * epsilon * fringe;
}

std::string_view to_string(G2ModelKind kind) {
  return kind == G2ModelKind::delay ? "delay" : "tau";
}

G2ModelKind parse_model_kind(std::string_view text) {
  if (text == "delay") return G2ModelKind::delay;
  if (text == "tau") return G2ModelKind::tau;
  throw DomainError(
      fmt::format("unknown model kind '{}' (expected delay or tau)", text));
}

void G2Model::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw DomainError(fmt::format("visibility {} outside [0, 1]", epsilon));
  }
  if (!std::isfinite(phi)) throw DomainError("model phase not finite");
  if (!(delta_f >= 0.0) || !std::isfinite(delta_f)) {
    throw DomainError("model frequency must be finite and >= 0");
  }
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw DomainError("linewidth must be finite and >= 0");
  }
}

double g2_zero_model(const G2Model& model, double t_delay) {
  return 1.0 + 0.5 * model.epsilon *
                   std::cos(model.phi + 2.0 * kPi * model.delta_f * t_delay);
}

double g2_tau_model(const G2Model& model, double tau) {
  const double envelope = std::exp(-model.gamma * model.gamma * tau * tau);
  return 1.0 + 0.5 * model.epsilon * envelope *
                   std::cos(model.phi + 2.0 * kPi * model.delta_f * tau);
}

double visibility_from_counts(double n1a, double n2a, double n1b, double n2b,
                              double nda, double ndb) {
  for (double n : {n1a, n2a, n1b, n2b, nda, ndb}) {
    if (!(n >= 0.0) || !std::isfinite(n)) {
      throw DomainError("counts must be finite and non-negative");
    }
  }
  const double den_a = n1a + n2a + nda;
  const double den_b = n1b + n2b + ndb;
  if (den_a <= 0.0 || den_b <= 0.0) {
    throw DomainError("visibility undefined: a detector has zero total counts");
  }
  // Split the square root to keep the product of four large counts finite.
  // Bounded by 1 (AM-GM); the min only absorbs rounding.
  return std::min(
      1.0, 4.0 * std::sqrt(n1a * n2a) * std::sqrt(n1b * n2b) / (den_a * den_b));
}

}  // namespace chbt
