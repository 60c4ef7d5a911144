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

// Truncated multimode Fock space: mode bookkeeping, sparse state vectors and
// the ladder/projection primitives the optical elements are built from.

#include <complex>
#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chbt {

using Complex = std::complex<double>;
using ModeIndex = std::size_t;

inline constexpr int kDefaultMaxPhotons = 2;
inline constexpr int kMaxSupportedPhotons = 4;
/// Amplitudes with smaller magnitude are dropped after every operation.
inline constexpr double kPruneThreshold = 1e-15;

/// Spatial branch inside one detector: `a` is the input/output port that is
/// finally observed, `b` is the second arm created by the first beamsplitter.
enum class Branch : std::uint8_t { a, b };

std::string_view to_string(Branch branch);
Branch parse_branch(std::string_view text);

struct ModeId {
  ModeIndex index = 0;
  std::string label;
  double frequency = 0.0;  // Hz
  Branch branch = Branch::a;
  /// Detector the mode belongs to ("A", "B"); empty for a lone detector.
  std::string port;

  friend bool operator==(const ModeId&, const ModeId&) = default;
};

/// Ordered set of modes. A mode is keyed by (port, label, branch).
class ModeRegistry {
 public:
  const ModeId& register_mode(std::string label, double frequency,
                              Branch branch, std::string port = {});

  std::size_t size() const noexcept { return modes_.size(); }
  bool empty() const noexcept { return modes_.empty(); }
  const ModeId& operator[](ModeIndex index) const { return modes_.at(index); }
  std::span<const ModeId> modes() const noexcept { return modes_; }

  std::optional<ModeIndex> find(std::string_view label, Branch branch,
                                std::string_view port = {}) const;
  /// Like find() but throws DomainError naming the missing mode.
  ModeIndex at(std::string_view label, Branch branch,
               std::string_view port = {}) const;

  friend bool operator==(const ModeRegistry&, const ModeRegistry&) = default;

 private:
  std::vector<ModeId> modes_;
};

using RegistryPtr = std::shared_ptr<const ModeRegistry>;

/// Occupation numbers, one entry per registered mode.
struct FockBasisState {
  std::vector<std::uint8_t> occupation;

  int total() const noexcept;
  friend auto operator<=>(const FockBasisState&,
                          const FockBasisState&) = default;
};

FockBasisState vacuum_occupation(std::size_t modes);
/// Basis state with one photon in each listed mode (repeats allowed).
FockBasisState occupation_of(std::size_t modes,
                             std::initializer_list<ModeIndex> photons);

/// All occupations of `modes` modes with at most `max_photons` photons, in a
/// fixed order: by total photon number, then lexicographically descending.
std::vector<FockBasisState> enumerate_basis(std::size_t modes, int max_photons);

/// Sparse pure state over a truncated Fock basis. Immutable once built; all
/// operations return new values.
class StateVector {
 public:
  using Amplitudes = std::map<FockBasisState, Complex>;

  StateVector(RegistryPtr registry, int max_photons, Amplitudes amplitudes);

  static StateVector vacuum(RegistryPtr registry,
                            int max_photons = kDefaultMaxPhotons);
  static StateVector zero(RegistryPtr registry,
                          int max_photons = kDefaultMaxPhotons);

  const ModeRegistry& registry() const noexcept { return *registry_; }
  const RegistryPtr& registry_ptr() const noexcept { return registry_; }
  int max_photons() const noexcept { return max_photons_; }
  const Amplitudes& amplitudes() const noexcept { return amplitudes_; }

  Complex amplitude(const FockBasisState& basis) const;
  double norm2() const;
  bool is_zero() const noexcept { return amplitudes_.empty(); }

  friend StateVector operator+(const StateVector& lhs, const StateVector& rhs);
  friend StateVector operator*(Complex scale, const StateVector& state);

 private:
  RegistryPtr registry_;
  int max_photons_;
  Amplitudes amplitudes_;
};

/// Throws DomainError unless both states live on equal registries.
void require_same_registry(const StateVector& lhs, const StateVector& rhs);

/// a†_mode with the √(n+1) ladder factor.
StateVector apply_creation(const StateVector& state, ModeIndex mode);

/// ⟨lhs|rhs⟩, conjugate-linear in `lhs`.
Complex inner_product(const StateVector& lhs, const StateVector& rhs);

/// Amplitude of the basis state with exactly one photon in `mode`.
Complex project_single_photon(const StateVector& state, ModeIndex mode);

std::string state_to_json(const StateVector& state, int indent = -1);
StateVector state_from_json(std::string_view text);

}  // namespace chbt
