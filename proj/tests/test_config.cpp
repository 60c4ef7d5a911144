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

#include "chbt/config.hpp"
#include "chbt/error.hpp"
#include "chbt/optics.hpp"
#include "chbt/pipeline.hpp"
#include "chbt/units.hpp"

using namespace chbt;

namespace {

std::string error_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("quantities need a unit of the right dimension") {
  CHECK(parse_quantity("1064.4 nm", Dimension::length) == doctest::Approx(1064.4e-9));
  CHECK(parse_quantity("1.5mm", Dimension::length) == doctest::Approx(1.5e-3));
  CHECK(parse_quantity("2 m", Dimension::length) == 2.0);
  CHECK(parse_quantity("3e-3 s", Dimension::time) == doctest::Approx(3e-3));
  CHECK(parse_quantity("100 ns", Dimension::time) == doctest::Approx(100e-9));
  CHECK(parse_quantity("0.357 ps", Dimension::time) == doctest::Approx(0.357e-12));
  CHECK(parse_quantity("-60 us", Dimension::time) == doctest::Approx(-60e-6));
  CHECK(parse_quantity("210.1 GHz", Dimension::frequency) == doctest::Approx(210.1e9));
  CHECK(parse_quantity("0.118 MHz", Dimension::frequency) == doctest::Approx(1.18e5));
  CHECK(parse_quantity("pi:0.5", Dimension::angle) == doctest::Approx(kPi / 2));
  CHECK(parse_quantity("-0.16 rad", Dimension::angle) == doctest::Approx(-0.16));
  CHECK_THROWS_AS(parse_quantity("5", Dimension::time), DomainError);
  CHECK_THROWS_AS(parse_quantity("5 GHz", Dimension::time), DomainError);
  CHECK_THROWS_AS(parse_quantity("5 nS", Dimension::time), DomainError);
  CHECK_THROWS_AS(parse_quantity("five ns", Dimension::time), DomainError);
  CHECK_THROWS_AS(parse_quantity("1 deg", Dimension::angle), DomainError);
  CHECK_THROWS_AS(parse_number("1.0x"), DomainError);
  CHECK(parse_bool("yes"));
  CHECK_FALSE(parse_bool("off"));
  CHECK_THROWS_AS(parse_bool("maybe"), DomainError);
  CHECK(parse_unsigned("18446744073709551615") == 18446744073709551615ull);
  CHECK_THROWS_AS(parse_unsigned("-1"), DomainError);
}

TEST_CASE("empty config keeps the defaults") {
  const auto c = parse_config("");
  CHECK(c.lambda1 == 1064.4e-9);
  CHECK(c.frequencies().delta_f21() == doctest::Approx(211.85e9).epsilon(1e-3));
  CHECK(c.detector("A").is_ideally_tuned());
}

TEST_CASE("config values are parsed with units") {
  const auto c = parse_config(R"(
; comment
[modes]
lambda1 = 1064.0 nm
[conversion]
theta32 = pi:1
phi31 = 0.25 rad
[model]
kind = tau
epsilon = 0.5
gamma = 0.2 MHz
delta_f = 1 MHz
[stream]
rate_a = 50 kHz
seed = 99
format = binary
[analysis]
bin_width = 10 ns
tau_step = 200 ns
[fit]
weighted = false
starts = 5
)");
  CHECK(c.lambda1 == doctest::Approx(1064e-9));
  CHECK(c.conversion.theta_32() == doctest::Approx(kPi));
  CHECK(c.conversion.phi_31 == 0.25);
  CHECK(c.stream.model.kind == G2ModelKind::tau);
  CHECK(c.stream.model.gamma == doctest::Approx(2e5));
  CHECK(c.stream.rate_a == doctest::Approx(5e4));
  CHECK(c.stream.seed == 99);
  CHECK(c.stream_format == StreamFormat::binary);
  CHECK(c.taus().size() == 601);
  CHECK_FALSE(c.fit.weighted);
  CHECK(c.fit.starts == 5);
}

TEST_CASE("config errors name section and key") {
  CHECK(error_of("[stream]\nrate_q = 1 Hz\n").find("[stream] rate_q") != std::string::npos);
  CHECK(error_of("[colour]\nx = 1\n").find("colour") != std::string::npos);
  CHECK(error_of("[stream]\nrate_a = 1 nm\n").find("[stream] rate_a") != std::string::npos);
  CHECK(error_of("[stream]\nrate_a = 100\n").find("unit") != std::string::npos);
  CHECK(error_of("[modes]\nlambda3 = 2000 nm\n").find("[modes]") != std::string::npos);
  CHECK(error_of("[stream]\nrate_a = 200 MHz\n").find("[stream]") != std::string::npos);
  CHECK(error_of("[analysis]\nbin_width = 1 ps\n").find("[analysis]") != std::string::npos);
  CHECK(error_of("[model]\nepsilon = 2\n").find("[model]") != std::string::npos);
  CHECK(error_of("[analysis]\nstream = /no/such/file.tdc\n").find("does not exist") !=
        std::string::npos);
  CHECK(!error_of("stray = 1\n").empty());
  CHECK(!error_of("[stream]\nseed = 1\nseed = 2\n").empty());
}

TEST_CASE("schedule expands into delay steps") {
  const auto c = parse_config(R"(
[stream]
rate_a = 1 MHz
rate_b = 1 MHz
[schedule]
start = 1 ps
step = 0.5 ps
steps = 4
dwell = 2 ms
)");
  const auto s = c.stream_config();
  REQUIRE(s.schedule.size() == 4);
  CHECK(s.schedule[3].t_delay == doctest::Approx(2.5e-12));
  CHECK(s.duration == doctest::Approx(8e-3));
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("config files resolve inputs relative to themselves") {
  const auto dir = std::filesystem::temp_directory_path() / "chbt_cfg";
  std::filesystem::create_directories(dir);
  { std::ofstream(dir / "s.tdc") << "#binwidth_ps=1000\n#duration_ps=1000\n#seed=0\n"; }
  { std::ofstream(dir / "run.ini") << "[analysis]\nstream = s.tdc\n"; }
  const auto c = load_config(dir / "run.ini");
  CHECK(c.stream_input == dir / "s.tdc");
  CHECK_THROWS_AS(load_config(dir / "missing.ini"), IoError);
}

TEST_CASE("wavelength conversions are reported") {
  const auto lines = conversion_log(RunConfig{});
  REQUIRE(lines.size() == 4);
  CHECK(lines[0].find("281.654 THz") != std::string::npos);
  CHECK(lines[3].find("211.85 GHz") != std::string::npos);
}

TEST_CASE("figure presets validate") {
  for (auto f : {Figure::fig2, Figure::fig3}) {
    const auto c = figure_preset(f);
    CHECK_NOTHROW(c.validate());
    CHECK(parse_figure(to_string(f)) == f);
  }
  CHECK(figure_preset(Figure::fig2).stream_config().schedule.size() == 20);
  CHECK_THROWS_AS(parse_figure("fig4"), DomainError);
}
