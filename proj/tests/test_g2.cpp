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

#include <doctest.h>

#include <cmath>
#include <random>

#include "chbt/error.hpp"
#include "chbt/g2.hpp"
#include "chbt/optics.hpp"
#include "oracle.hpp"

using namespace chbt;

namespace {

TdcStream small_stream(std::int64_t duration_ps = 1'000'000) {
  TdcStream s;
  s.bin_width_ps = 1000;
  s.duration_ps = duration_ps;
  return s;
}

TdcStream random_stream(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> n(0, 450);
  auto s = small_stream(200'000);
  s.a = oracle::random_times(rng, n(rng), s.duration_ps);
  s.b = oracle::random_times(rng, n(rng), s.duration_ps);
  return s;
}

}  // namespace

TEST_CASE("same-bin clicks coincide") {
  auto s = small_stream();
  s.a = {0};
  s.b = {0};
  CHECK(count_coincidences(s, 0.0, 1e-9).n_coincidence == 1);
  CHECK(count_coincidences(s, 10e-9, 1e-9).n_coincidence == 0);
}

TEST_CASE("a constant lag is undone by tau") {
  auto s = small_stream();
  for (std::int64_t t = 0; t < 900'000; t += 7'000) {
    s.a.push_back(t);
    s.b.push_back(t + 5'000);
  }
  const auto c = count_coincidences(s, -5e-9, 1e-9);
  CHECK(c.n_coincidence == s.a.size());
  CHECK(count_coincidences(s, 0.0, 1e-9).n_coincidence == 0);
}

TEST_CASE("estimator normalisation and error bars") {
  CoincidenceCounts c{25, 1000, 500, 20000, 1e-9, 0.0};
  const auto e = estimate_g2(c);
  CHECK(e.g2 == doctest::Approx(1.0));
  CHECK(e.sigma == doctest::Approx(0.2));
  c.n_coincidence = 0;
  const auto z = estimate_g2(c);
  CHECK(z.g2 == 0.0);
  CHECK(z.sigma == doctest::Approx(20000.0 / (1000.0 * 500.0)));
  c.n_a = 0;
  CHECK_THROWS_AS(estimate_g2(c), DomainError);
}

TEST_CASE("bad windows and bin widths are rejected") {
  auto s = small_stream();
  s.a = {10};
  s.b = {10};
  CHECK_THROWS_AS(count_coincidences(s, 0.0, 0.5e-9), DomainError);
  CHECK_THROWS_AS(count_coincidences(s, 0.0, 1e-9, TimeWindow{5000, 5000}), DomainError);
  CHECK_THROWS_AS(count_coincidences(s, 0.0, 1e-9, TimeWindow{0, 2'000'000}), DomainError);
  CHECK_THROWS_AS(count_coincidences(s, 0.0, 1e-9, TimeWindow{0, 500}), DomainError);
  CHECK(count_coincidences(s, 0.0, 1e-9).n_bin == 1000);
  CHECK(count_coincidences(s, 0.0, 3e-9).n_bin == 333);
}

TEST_CASE("counting matches the pairwise oracle") {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> shift_bins(-40, 40);
  std::uniform_int_distribution<int> width_bins(1, 9);
  std::uniform_int_distribution<std::int64_t> sub_ps(0, 999);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_stream(rng);
    const std::int64_t width = 1000 * width_bins(rng);
    const std::int64_t shift = 1000 * shift_bins(rng) + (trial % 2 ? sub_ps(rng) : 0);
    const std::int64_t start = 1000 * (trial % 7);
    const std::int64_t end = s.duration_ps - 1000 * (trial % 5);
    const auto c = count_coincidences(s, shift * 1e-12, width * 1e-12, TimeWindow{start, end});
    const auto n_bin = (end - start) / width;
    CHECK(c.n_bin == static_cast<std::uint64_t>(n_bin));
    CHECK(c.n_coincidence ==
          oracle::pairwise_coincidences(s.a, s.b, shift, start, width, n_bin));
    CHECK(c.n_coincidence <= std::min(c.n_a, c.n_b));
  }
}

TEST_CASE("shift covariance") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> shift(-30'000, 30'000);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = random_stream(rng);
    const double tau = static_cast<double>(shift(rng)) * 1e-12;
    const auto direct = count_coincidences(s, tau, 2e-9);
    auto moved = count_coincidences(shift_channel_b(s, tau), 0.0, 2e-9);
    moved.tau = tau;
    CHECK(direct == moved);
  }
}

TEST_CASE("tau scans agree with one count per tau") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 30; ++trial) {
    auto s = random_stream(rng);
    s.a.push_back(s.duration_ps - 1);
    s.b.insert(s.b.begin(), 0);
    const bool aligned = trial % 2 == 0;
    const auto taus = aligned ? tau_grid(-20e-9, 20e-9, 2e-9)
                              : std::vector<double>{-3.3e-9, 0.0, 1.7e-9, 12.25e-9};
    const auto curve = scan_tau(s, taus, 2e-9);
    REQUIRE(curve.points.size() == taus.size());
    CHECK(curve.kind == XKind::tau);
    for (std::size_t i = 0; i < taus.size(); ++i) {
      const auto e = estimate_g2(count_coincidences(s, taus[i], 2e-9));
      CHECK(curve.points[i].x == taus[i]);
      CHECK(curve.points[i].g2 == e.g2);
      CHECK(curve.points[i].sigma == e.sigma);
    }
  }
}

TEST_CASE("tau scan preconditions") {
  auto s = small_stream();
  s.a = {10, 2000};
  s.b = {10, 3000};
  CHECK_THROWS_AS(scan_tau(s, {}, 1e-9), DomainError);
  const std::vector<double> far{2e-6};
  CHECK_THROWS_AS(scan_tau(s, far, 1e-9), DomainError);
}

TEST_CASE("delay scans use the recorded segments") {
  auto s = small_stream(30'000);
  for (int k = 0; k < 3; ++k) {
    s.segments.push_back({k * 1e-12, k * 10'000, (k + 1) * 10'000});
    for (int j = 0; j <= k; ++j) {
      s.a.push_back(k * 10'000 + j * 2000);
      s.b.push_back(k * 10'000 + j * 2000 + 10);
    }
    s.b.push_back(k * 10'000 + 9000);
  }
  const auto curve = scan_delay(s, 1e-9);
  REQUIRE(curve.points.size() == 3);
  CHECK(curve.points[2].x == 2e-12);
  // k + 1 coincidences in 10 bins with k + 1 A and k + 2 B clicks.
  CHECK(curve.points[1].g2 == doctest::Approx(2.0 * 10.0 / (2.0 * 3.0)));
  const auto path = scan_delay(s, 1e-9, XKind::path_length);
  CHECK(path.points[2].x == doctest::Approx(kSpeedOfLight * 2e-12));
  CHECK(x_unit(path.kind) == "m");

  std::vector<StreamSegment> two(s.segments.begin(), s.segments.begin() + 2);
  CHECK_THROWS_AS(scan_delay(s, two, 1e-9), DomainError);
  auto dup = s.segments;
  dup[2].t_delay = dup[1].t_delay;
  CHECK_THROWS_AS(scan_delay(s, dup, 1e-9), DomainError);
}

TEST_CASE("uncorrelated streams average to g2 = 1") {
  std::mt19937_64 rng(2024);
  std::bernoulli_distribution click(0.08);
  double sum = 0.0;
  for (int seed = 0; seed < 5; ++seed) {
    auto s = small_stream(1'000'000'000);
    for (std::int64_t bin = 0; bin < 1'000'000; ++bin) {
      if (click(rng)) s.a.push_back(bin * 1000);
      if (click(rng)) s.b.push_back(bin * 1000);
    }
    sum += estimate_g2(count_coincidences(s, 0.0, 1e-9)).g2;
  }
  CHECK(sum / 5.0 == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("curve CSV round trip") {
  G2Curve c{XKind::path_length, {{0.0, 1.2, 0.01}, {1.5e-4, 0.8123456789012345, 0.02}}};
  const auto text = curve_to_csv(c);
  CHECK(text.rfind("# xkind=path_length unit=m\nx,g2,sigma\n", 0) == 0);
  const auto back = curve_from_csv(text);
  CHECK(back.kind == c.kind);
  REQUIRE(back.points.size() == 2);
  CHECK(back.points[1].g2 == c.points[1].g2);
  CHECK(back.points[1].x == c.points[1].x);
  CHECK_THROWS_AS(curve_from_csv("x,g2,sigma\n1,2,3\n"), FormatError);
  CHECK_THROWS_AS(curve_from_csv("# xkind=tau unit=s\nx,g2,sigma\n1,2\n"), FormatError);
  CHECK_THROWS_AS(parse_x_kind("length"), DomainError);
}
