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
#include <filesystem>
#include <fstream>
#include <sstream>

#include "chbt/error.hpp"
#include "chbt/g2.hpp"
#include "chbt/tdc.hpp"

using namespace chbt;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "chbt_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

StreamConfig delay_config(std::uint64_t seed) {
  StreamConfig c;
  c.bin_width = 1e-9;
  c.rate_a = 20e6;
  c.rate_b = 30e6;
  c.model = {G2ModelKind::delay, 0.59, -0.16, 210.1e9, 0.0};
  for (int i = 0; i < 8; ++i) c.schedule.push_back({i * 0.6e-12, 2e-3});
  c.duration = 16e-3;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("simulation is deterministic and thread-count independent") {
  auto c = delay_config(42);
  const auto one = simulate_stream(c);
  const auto again = simulate_stream(c);
  CHECK(one == again);
  c.threads = 3;
  CHECK(simulate_stream(c) == one);
  c.seed = 43;
  CHECK_FALSE(simulate_stream(c) == one);
}

TEST_CASE("same seed gives byte-identical files") {
  const auto s = simulate_stream(delay_config(9));
  const auto p1 = temp_file("det1.tdc");
  const auto p2 = temp_file("det2.tdc");
  write_stream(simulate_stream(delay_config(9)), p1);
  write_stream(s, p2);
  CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("zero duration gives an empty stream") {
  StreamConfig c;
  c.duration = 0.0;
  const auto s = simulate_stream(c);
  CHECK(s.empty());
  CHECK(s.duration_ps == 0);
}

TEST_CASE("click probability per bin is capped") {
  StreamConfig c;
  c.bin_width = 1e-9;
  c.rate_a = 1e8;
  CHECK_THROWS_AS(simulate_stream(c), DomainError);
  c.rate_a = 1e5;
  c.bin_width = 0.0;
  CHECK_THROWS_AS(simulate_stream(c), DomainError);
  c.bin_width = 1e-9;
  c.dark_a = 2e5;
  CHECK_THROWS_AS(simulate_stream(c), DomainError);
}

TEST_CASE("schedule must cover the duration") {
  auto c = delay_config(1);
  c.duration = 1.0;
  CHECK_THROWS_AS(simulate_stream(c), DomainError);
}

TEST_CASE("singles and uncorrelated coincidences match the rates") {
  StreamConfig c;
  c.bin_width = 1e-9;
  c.duration = 20e-3;
  c.rate_a = 20e6;
  c.rate_b = 10e6;
  c.dark_a = 5e6;
  c.seed = 5;
  const auto s = simulate_stream(c);
  const double bins = c.duration / c.bin_width;
  const double pa = c.rate_a * c.bin_width;
  const double pb = c.rate_b * c.bin_width;
  CHECK(std::abs(s.a.size() - pa * bins) < 5.0 * std::sqrt(pa * bins));
  CHECK(std::abs(s.b.size() - pb * bins) < 5.0 * std::sqrt(pb * bins));
  const auto counts = count_coincidences(s, 0.0, c.bin_width);
  const double expect = pa * pb * bins;
  CHECK(std::abs(counts.n_coincidence - expect) < 5.0 * std::sqrt(expect));
  for (std::size_t i = 1; i < s.a.size(); ++i) REQUIRE(s.a[i] > s.a[i - 1]);
  CHECK(s.a.back() < s.duration_ps);
}

TEST_CASE("delay steps realise the configured g2") {
  const auto c = delay_config(77);
  const auto s = simulate_stream(c);
  REQUIRE(s.segments.size() == c.schedule.size());
  double chi2 = 0.0;
  for (const auto& seg : s.segments) {
    const auto est = estimate_g2(
        count_coincidences(s, 0.0, c.bin_width, TimeWindow{seg.start_ps, seg.end_ps}));
    const double d = (est.g2 - g2_zero_model(c.model, seg.t_delay)) / est.sigma;
    chi2 += d * d;
  }
  CHECK(chi2 / static_cast<double>(s.segments.size()) < 2.0);
}

TEST_CASE("dark counts keep the configured total-rate g2") {
  auto c = delay_config(8);
  c.dark_a = 5e6;
  c.dark_b = 5e6;
  const auto s = simulate_stream(c);
  double chi2 = 0.0;
  for (const auto& seg : s.segments) {
    const auto est = estimate_g2(
        count_coincidences(s, 0.0, c.bin_width, TimeWindow{seg.start_ps, seg.end_ps}));
    const double d = (est.g2 - g2_zero_model(c.model, seg.t_delay)) / est.sigma;
    chi2 += d * d;
  }
  CHECK(chi2 / static_cast<double>(s.segments.size()) < 2.0);
}

TEST_CASE("tau model correlates across bins") {
  StreamConfig c;
  c.bin_width = 1e-9;
  c.duration = 4.0;
  c.rate_a = 1e5;
  c.rate_b = 1e5;
  c.model = {G2ModelKind::tau, 0.576, -0.434, 1.32e6, 0.118e6};
  c.seed = 12;
  SimulationStats stats;
  const auto s = simulate_stream(c, &stats);
  CHECK(stats.clipped < stats.candidates / 1000);
  const std::vector<double> taus{-2e-6, -0.4e-6, 0.0, 0.3e-6, 1e-6, 60e-6};
  const auto curve = scan_tau(s, taus, 20e-9);
  double chi2 = 0.0;
  for (const auto& p : curve.points) {
    const double d = (p.g2 - g2_tau_model(c.model, p.x)) / p.sigma;
    chi2 += d * d;
  }
  CHECK(chi2 / static_cast<double>(curve.points.size()) < 3.0);
}

TEST_CASE("text and binary files round-trip exactly") {
  const auto s = simulate_stream(delay_config(3));
  for (auto format : {StreamFormat::text, StreamFormat::binary}) {
    const auto p = temp_file(format == StreamFormat::text ? "rt.tdc" : "rt.bin");
    write_stream(s, p, format);
    CHECK(read_stream(p) == s);
  }
}

TEST_CASE("header-only file is an empty stream") {
  const auto s = parse_stream_text("#binwidth_ps=1000\n#duration_ps=5000\n#seed=3\n");
  CHECK(s.empty());
  CHECK(s.bin_width_ps == 1000);
  CHECK(s.seed == 3);
}

TEST_CASE("malformed stream files name the failing position") {
  const std::string head = "#binwidth_ps=1000\n#duration_ps=50000\n#seed=3\n";
  auto message = [](auto&& f) -> std::string {
    try {
      f();
    } catch (const FormatError& e) {
      return e.what();
    }
    return "";
  };
  const auto truncated = message([&] { parse_stream_text(head + "A 10\nB 2"); });
  CHECK(truncated.find("byte offset") != std::string::npos);
  const auto bad = message([&] { parse_stream_text(head + "A 10\nC 20\n"); });
  CHECK(bad.find("line 5") != std::string::npos);
  CHECK(message([&] { parse_stream_text(head + "A 10\nA 5\n"); }).find("backwards") !=
        std::string::npos);
  CHECK(!message([&] { parse_stream_text(head + "A 60000\n"); }).empty());
  CHECK(!message([&] { parse_stream_text("A 1\n"); }).empty());
  CHECK(!message([&] { parse_stream_text(head + "#colour=red\n"); }).empty());

  TdcStream s;
  s.bin_width_ps = 1000;
  s.duration_ps = 100000;
  s.a = {5, 10};
  s.b = {7};
  const auto p = temp_file("trunc.bin");
  write_stream(s, p, StreamFormat::binary);
  auto bytes = slurp(p);
  bytes.pop_back();
  const auto bin = message([&] { parse_stream_binary(bytes); });
  CHECK(bin.find("byte offset") != std::string::npos);
  CHECK(bin.find("record 2") != std::string::npos);
  CHECK(!message([&] { parse_stream_binary(bytes.substr(0, 10)); }).empty());
}

TEST_CASE("records merge in time order") {
  TdcStream s;
  s.a = {1, 5};
  s.b = {1, 3};
  const auto r = s.records();
  REQUIRE(r.size() == 4);
  CHECK(r[0] == TdcRecord{Channel::A, 1});
  CHECK(r[1] == TdcRecord{Channel::B, 1});
  CHECK(r[2] == TdcRecord{Channel::B, 3});
  CHECK(r[3] == TdcRecord{Channel::A, 5});
}
