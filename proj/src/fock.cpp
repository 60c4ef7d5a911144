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

#include "chbt/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "chbt/error.hpp"

namespace chbt {

namespace {

void prune(StateVector::Amplitudes& amplitudes) {
  std::erase_if(amplitudes, [](const auto& entry) {
    return std::abs(entry.second) < kPruneThreshold;
  });
}

std::string describe(const FockBasisState& basis) {
  return fmt::format("|{}>", fmt::join(basis.occupation, ","));
}

}  // namespace

std::string_view to_string(Branch branch) {
  return branch == Branch::a ? "a" : "b";
}

Branch parse_branch(std::string_view text) {
  if (text == "a") return Branch::a;
  if (text == "b") return Branch::b;
  throw DomainError(fmt::format("unknown branch '{}' (expected a or b)", text));
}

const ModeId& ModeRegistry::register_mode(std::string label, double frequency,
                                          Branch branch, std::string port) {
  if (label.empty()) throw DomainError("mode label must not be empty");
  if (!(frequency > 0.0) || !std::isfinite(frequency)) {
    throw DomainError(
        fmt::format("mode '{}' needs a positive frequency, got {}", label,
                    frequency));
  }
  if (find(label, branch, port)) {
    throw DomainError(fmt::format(
        "mode '{}' already registered on branch {}{}", label, to_string(branch),
        port.empty() ? std::string{} : fmt::format(" of port {}", port)));
  }
  modes_.push_back(ModeId{modes_.size(), std::move(label), frequency, branch,
                          std::move(port)});
  return modes_.back();
}

std::optional<ModeIndex> ModeRegistry::find(std::string_view label,
                                            Branch branch,
                                            std::string_view port) const {
  for (const auto& mode : modes_) {
    if (mode.label == label && mode.branch == branch && mode.port == port) {
      return mode.index;
    }
  }
  return std::nullopt;
}

ModeIndex ModeRegistry::at(std::string_view label, Branch branch,
                           std::string_view port) const {
  if (auto index = find(label, branch, port)) return *index;
  throw DomainError(fmt::format("mode '{}' on branch {}{} is not registered",
                                label, to_string(branch),
                                port.empty() ? std::string{}
                                             : fmt::format(" of port {}", port)));
}

int FockBasisState::total() const noexcept {
  return std::accumulate(occupation.begin(), occupation.end(), 0);
}

FockBasisState vacuum_occupation(std::size_t modes) {
  return FockBasisState{std::vector<std::uint8_t>(modes, 0)};
}

FockBasisState occupation_of(std::size_t modes,
                             std::initializer_list<ModeIndex> photons) {
  auto basis = vacuum_occupation(modes);
  for (ModeIndex mode : photons) {
    if (mode >= modes) {
      throw DomainError(fmt::format("mode index {} out of range", mode));
    }
    ++basis.occupation[mode];
  }
  return basis;
}

std::vector<FockBasisState> enumerate_basis(std::size_t modes,
                                            int max_photons) {
  std::vector<FockBasisState> basis;
  std::vector<std::uint8_t> current(modes, 0);
  for (int total = 0; total <= max_photons; ++total) {
    // Depth-first fill: put as many photons as possible in the lowest mode
    // first, which yields lexicographically descending occupations.
    auto fill = [&](auto&& self, std::size_t mode, int remaining) -> void {
      if (mode == modes) {
        if (remaining == 0) basis.push_back(FockBasisState{current});
        return;
      }
      for (int n = remaining; n >= 0; --n) {
        current[mode] = static_cast<std::uint8_t>(n);
        self(self, mode + 1, remaining - n);
      }
      current[mode] = 0;
    };
    if (modes == 0) {
      if (total == 0) basis.push_back(FockBasisState{});
      continue;
    }
    fill(fill, 0, total);
  }
  return basis;
}

StateVector::StateVector(RegistryPtr registry, int max_photons,
                         Amplitudes amplitudes)
    : registry_(std::move(registry)),
      max_photons_(max_photons),
      amplitudes_(std::move(amplitudes)) {
  if (!registry_) throw DomainError("state vector needs a mode registry");
  if (max_photons_ < 0 || max_photons_ > kMaxSupportedPhotons) {
    throw DomainError(fmt::format("photon truncation {} outside [0, {}]",
                                  max_photons_, kMaxSupportedPhotons));
  }
  for (const auto& [basis, value] : amplitudes_) {
    if (basis.occupation.size() != registry_->size()) {
      throw DomainError(fmt::format("basis state {} does not match {} modes",
                                    describe(basis), registry_->size()));
    }
    if (basis.total() > max_photons_) {
      throw DomainError(fmt::format("basis state {} exceeds truncation {}",
                                    describe(basis), max_photons_));
    }
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
      throw DomainError(
          fmt::format("non-finite amplitude on {}", describe(basis)));
    }
  }
  prune(amplitudes_);
}

StateVector StateVector::vacuum(RegistryPtr registry, int max_photons) {
  const auto modes = registry ? registry->size() : 0;
  return StateVector(std::move(registry), max_photons,
                     {{vacuum_occupation(modes), Complex{1.0, 0.0}}});
}

StateVector StateVector::zero(RegistryPtr registry, int max_photons) {
  return StateVector(std::move(registry), max_photons, {});
}

Complex StateVector::amplitude(const FockBasisState& basis) const {
  auto it = amplitudes_.find(basis);
  return it == amplitudes_.end() ? Complex{} : it->second;
}

double StateVector::norm2() const {
  double sum = 0.0;
  for (const auto& [basis, value] : amplitudes_) sum += std::norm(value);
  return sum;
}

StateVector operator+(const StateVector& lhs, const StateVector& rhs) {
  require_same_registry(lhs, rhs);
  auto amplitudes = lhs.amplitudes_;
  for (const auto& [basis, value] : rhs.amplitudes_) amplitudes[basis] += value;
  return StateVector(lhs.registry_,
                     std::max(lhs.max_photons_, rhs.max_photons_),
                     std::move(amplitudes));
}

StateVector operator*(Complex scale, const StateVector& state) {
  auto amplitudes = state.amplitudes_;
  for (auto& [basis, value] : amplitudes) value *= scale;
  return StateVector(state.registry_, state.max_photons_,
                     std::move(amplitudes));
}

void require_same_registry(const StateVector& lhs, const StateVector& rhs) {
  if (lhs.registry_ptr() != rhs.registry_ptr() &&
      !(lhs.registry() == rhs.registry())) {
    throw DomainError("states are defined over different mode registries");
  }
}

StateVector apply_creation(const StateVector& state, ModeIndex mode) {
  if (mode >= state.registry().size()) {
    throw DomainError(fmt::format("mode index {} out of range", mode));
  }
  StateVector::Amplitudes out;
  for (const auto& [basis, value] : state.amplitudes()) {
    FockBasisState raised = basis;
    const int n = raised.occupation[mode];
    raised.occupation[mode] = static_cast<std::uint8_t>(n + 1);
    if (raised.total() > state.max_photons()) {
      throw DomainError(fmt::format(
          "creation on mode {} takes {} beyond truncation {}", mode,
          describe(basis), state.max_photons()));
    }
    out[raised] += value * std::sqrt(static_cast<double>(n + 1));
  }
  return StateVector(state.registry_ptr(), state.max_photons(),
                     std::move(out));
}

Complex inner_product(const StateVector& lhs, const StateVector& rhs) {
  require_same_registry(lhs, rhs);
  Complex sum{};
  const auto& small = lhs.amplitudes().size() <= rhs.amplitudes().size()
                          ? lhs.amplitudes()
                          : rhs.amplitudes();
  const bool small_is_lhs = &small == &lhs.amplitudes();
  const auto& other = small_is_lhs ? rhs : lhs;
  for (const auto& [basis, value] : small) {
    const Complex partner = other.amplitude(basis);
    sum += small_is_lhs ? std::conj(value) * partner
                        : std::conj(partner) * value;
  }
  return sum;
}

Complex project_single_photon(const StateVector& state, ModeIndex mode) {
  if (mode >= state.registry().size()) {
    throw DomainError(fmt::format("mode index {} out of range", mode));
  }
  return state.amplitude(occupation_of(state.registry().size(), {mode}));
}

std::string state_to_json(const StateVector& state, int indent) {
  using nlohmann::json;
  json registry = json::array();
  for (const auto& mode : state.registry().modes()) {
    registry.push_back({{"label", mode.label},
                        {"frequency", mode.frequency},
                        {"branch", std::string(to_string(mode.branch))},
                        {"port", mode.port}});
  }
  json amplitudes = json::array();
  for (const auto& [basis, value] : state.amplitudes()) {
    std::vector<int> occ(basis.occupation.begin(), basis.occupation.end());
    amplitudes.push_back(
        {{"occ", occ}, {"re", value.real()}, {"im", value.imag()}});
  }
  json doc = {{"registry", registry},
              {"max_photons", state.max_photons()},
              {"amplitudes", amplitudes}};
  return doc.dump(indent);
}

StateVector state_from_json(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("state JSON: {}", e.what()));
  }
  try {
    auto registry = std::make_shared<ModeRegistry>();
    for (const auto& mode : doc.at("registry")) {
      registry->register_mode(mode.at("label").get<std::string>(),
                              mode.at("frequency").get<double>(),
                              parse_branch(mode.at("branch").get<std::string>()),
                              mode.value("port", std::string{}));
    }
    const int max_photons = doc.value("max_photons", kDefaultMaxPhotons);
    StateVector::Amplitudes amplitudes;
    for (const auto& entry : doc.at("amplitudes")) {
      FockBasisState basis;
      for (int n : entry.at("occ").get<std::vector<int>>()) {
        if (n < 0 || n > kMaxSupportedPhotons) {
          throw FormatError(fmt::format("occupation {} out of range", n));
        }
        basis.occupation.push_back(static_cast<std::uint8_t>(n));
      }
      amplitudes[basis] +=
          Complex{entry.at("re").get<double>(), entry.at("im").get<double>()};
    }
    return StateVector(std::move(registry), max_photons, std::move(amplitudes));
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("state JSON: {}", e.what()));
  }
}

}  // namespace chbt
