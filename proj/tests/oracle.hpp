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

// Reference implementations used only by the tests. They share nothing with
// the library beyond its public types: a dense Fock space with ladder
// operators and a Taylor matrix exponential, and an O(n_A n_B) pairwise
// coincidence counter.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "chbt/fock.hpp"
#include "chbt/tdc.hpp"

namespace oracle {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

struct FockSpace {
  int modes = 0;
  int max_photons = 0;
  std::vector<std::vector<int>> basis;
  std::map<std::vector<int>, Eigen::Index> index;

  Eigen::Index dim() const { return static_cast<Eigen::Index>(basis.size()); }
};

inline void enumerate(FockSpace& s, std::vector<int>& occ, int mode, int left) {
  if (mode == s.modes) {
    s.index[occ] = static_cast<Eigen::Index>(s.basis.size());
    s.basis.push_back(occ);
    return;
  }
  for (int n = 0; n <= left; ++n) {
    occ[static_cast<std::size_t>(mode)] = n;
    enumerate(s, occ, mode + 1, left - n);
  }
  occ[static_cast<std::size_t>(mode)] = 0;
}

inline FockSpace make_space(int modes, int max_photons) {
  FockSpace s;
  s.modes = modes;
  s.max_photons = max_photons;
  std::vector<int> occ(static_cast<std::size_t>(modes), 0);
  enumerate(s, occ, 0, max_photons);
  return s;
}

/// a^dag on the truncated space; states that would exceed the cutoff map
/// to zero.
inline Matrix creation(const FockSpace& s, int mode) {
  Matrix m = Matrix::Zero(s.dim(), s.dim());
  for (Eigen::Index col = 0; col < s.dim(); ++col) {
    auto occ = s.basis[static_cast<std::size_t>(col)];
    const int n = occ[static_cast<std::size_t>(mode)];
    occ[static_cast<std::size_t>(mode)] = n + 1;
    const auto it = s.index.find(occ);
    if (it != s.index.end()) m(it->second, col) = std::sqrt(static_cast<double>(n + 1));
  }
  return m;
}

inline Matrix number_phase(const FockSpace& s, int mode, double angle) {
  Matrix m = Matrix::Zero(s.dim(), s.dim());
  for (Eigen::Index i = 0; i < s.dim(); ++i) {
    const int n = s.basis[static_cast<std::size_t>(i)][static_cast<std::size_t>(mode)];
    m(i, i) = std::polar(1.0, angle * n);
  }
  return m;
}

/// Dense exp(m) (Pade with scaling and squaring), independent of the library.
inline Matrix expm(const Matrix& m) { return m.exp(); }

/// Generator whose exponential sends a_low^dag to
/// cos(angle) a_low^dag + e^{i phase} sin(angle) a_high^dag.
inline Matrix mixer_generator(const FockSpace& s, int low, int high, double angle,
                              double phase) {
  const Matrix cl = creation(s, low);
  const Matrix ch = creation(s, high);
  const Complex e = std::polar(1.0, phase);
  return angle * (e * ch * cl.adjoint() - std::conj(e) * cl * ch.adjoint());
}

/// a^dag -> (a^dag + b^dag)/sqrt2, b^dag -> (a^dag - b^dag)/sqrt2: a parity
/// flip on b followed by a quarter-angle mixer.
inline Matrix beamsplitter(const FockSpace& s, int a, int b) {
  return expm(mixer_generator(s, a, b, std::atan(1.0), 0.0)) *
         number_phase(s, b, 4.0 * std::atan(1.0));
}

inline Vector to_vector(const FockSpace& s, const chbt::StateVector& state) {
  Vector v = Vector::Zero(s.dim());
  for (const auto& [basis, amp] : state.amplitudes()) {
    std::vector<int> occ(basis.occupation.begin(), basis.occupation.end());
    v(s.index.at(occ)) += amp;
  }
  return v;
}

inline Vector basis_vector(const FockSpace& s, const std::vector<int>& occ) {
  Vector v = Vector::Zero(s.dim());
  v(s.index.at(occ)) = 1.0;
  return v;
}

/// Bins in which at least one A click and one shifted B click land.
inline std::uint64_t pairwise_coincidences(const std::vector<std::int64_t>& a,
                                           const std::vector<std::int64_t>& b,
                                           std::int64_t shift, std::int64_t start,
                                           std::int64_t width, std::int64_t n_bin) {
  std::set<std::int64_t> bins;
  const std::int64_t end = start + n_bin * width;
  for (auto ta : a) {
    if (ta < start || ta >= end) continue;
    for (auto tb : b) {
      const auto t = tb + shift;
      if (t < start || t >= end) continue;
      if ((ta - start) / width == (t - start) / width) bins.insert((ta - start) / width);
    }
  }
  return bins.size();
}

/// Sorted uniform random timestamps in [0, duration).
inline std::vector<std::int64_t> random_times(std::mt19937_64& rng, std::size_t n,
                                              std::int64_t duration) {
  std::uniform_int_distribution<std::int64_t> d(0, duration - 1);
  std::vector<std::int64_t> t(n);
  for (auto& x : t) x = d(rng);
  std::sort(t.begin(), t.end());
  return t;
}

}  // namespace oracle
