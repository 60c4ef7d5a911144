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

#include "chbt/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "chbt/error.hpp"
#include "chbt/optics.hpp"
#include "chbt/units.hpp"

namespace chbt {

namespace {

namespace fs = std::filesystem;
using Setter = std::function<void(RunConfig&, const std::string&)>;

double length(const std::string& v) { return parse_quantity(v, Dimension::length); }
double time(const std::string& v) { return parse_quantity(v, Dimension::time); }
double freq(const std::string& v) { return parse_quantity(v, Dimension::frequency); }
double angle(const std::string& v) { return parse_quantity(v, Dimension::angle); }

// Conversion angles are stored as xi = theta / time.
Setter theta(double ConversionSettings::*xi) {
  return [xi](RunConfig& c, const std::string& v) {
    c.conversion.*xi = angle(v) / c.conversion.time;
  };
}

Setter phase(double ConversionSettings::*phi) {
  return [phi](RunConfig& c, const std::string& v) { c.conversion.*phi = angle(v); };
}

const std::map<std::string, std::map<std::string, Setter>>& setters() {
  static const std::map<std::string, std::map<std::string, Setter>> table{
      {"modes",
       {{"lambda1", [](RunConfig& c, const std::string& v) { c.lambda1 = length(v); }},
        {"lambda2", [](RunConfig& c, const std::string& v) { c.lambda2 = length(v); }},
        {"lambda3", [](RunConfig& c, const std::string& v) { c.lambda3 = length(v); }}}},
      {"conversion",
       {{"theta31", theta(&ConversionSettings::xi_31)},
        {"theta32", theta(&ConversionSettings::xi_32)},
        {"theta2p2", theta(&ConversionSettings::xi_2p2)},
        {"theta1p1", theta(&ConversionSettings::xi_1p1)},
        {"phi31", phase(&ConversionSettings::phi_31)},
        {"phi32", phase(&ConversionSettings::phi_32)},
        {"phi2p2", phase(&ConversionSettings::phi_2p2)},
        {"phi1p1", phase(&ConversionSettings::phi_1p1)}}},
      {"scenario",
       {{"alpha", [](RunConfig& c, const std::string& v) { c.alpha = parse_number(v); }},
        {"beta", [](RunConfig& c, const std::string& v) { c.beta = parse_number(v); }},
        {"alpha_phase", [](RunConfig& c, const std::string& v) { c.alpha_phase = angle(v); }},
        {"beta_phase", [](RunConfig& c, const std::string& v) { c.beta_phase = angle(v); }},
        {"t_delay", [](RunConfig& c, const std::string& v) { c.t_delay = time(v); }},
        {"erasure", [](RunConfig& c, const std::string& v) { c.erasure = parse_bool(v); }}}},
      {"model",
       {{"kind", [](RunConfig& c, const std::string& v) { c.stream.model.kind = parse_model_kind(v); }},
        {"epsilon", [](RunConfig& c, const std::string& v) { c.stream.model.epsilon = parse_number(v); }},
        {"phi", [](RunConfig& c, const std::string& v) { c.stream.model.phi = angle(v); }},
        {"delta_f", [](RunConfig& c, const std::string& v) { c.stream.model.delta_f = freq(v); }},
        {"gamma", [](RunConfig& c, const std::string& v) { c.stream.model.gamma = freq(v); }}}},
      {"stream",
       {{"bin_width", [](RunConfig& c, const std::string& v) { c.stream.bin_width = time(v); }},
        {"duration", [](RunConfig& c, const std::string& v) { c.stream.duration = time(v); }},
        {"rate_a", [](RunConfig& c, const std::string& v) { c.stream.rate_a = freq(v); }},
        {"rate_b", [](RunConfig& c, const std::string& v) { c.stream.rate_b = freq(v); }},
        {"dark_a", [](RunConfig& c, const std::string& v) { c.stream.dark_a = freq(v); }},
        {"dark_b", [](RunConfig& c, const std::string& v) { c.stream.dark_b = freq(v); }},
        {"seed", [](RunConfig& c, const std::string& v) { c.stream.seed = parse_unsigned(v); }},
        {"threads",
         [](RunConfig& c, const std::string& v) {
           c.stream.threads = static_cast<unsigned>(parse_unsigned(v));
         }},
        {"format",
         [](RunConfig& c, const std::string& v) {
           if (v == "text") {
             c.stream_format = StreamFormat::text;
           } else if (v == "binary") {
             c.stream_format = StreamFormat::binary;
           } else {
             throw DomainError(fmt::format("'{}' is not text or binary", v));
           }
         }}}},
      {"schedule",
       {{"start", [](RunConfig& c, const std::string& v) { c.schedule.start = time(v); }},
        {"step", [](RunConfig& c, const std::string& v) { c.schedule.step = time(v); }},
        {"steps",
         [](RunConfig& c, const std::string& v) {
           c.schedule.steps = static_cast<unsigned>(parse_unsigned(v));
         }},
        {"dwell", [](RunConfig& c, const std::string& v) { c.schedule.dwell = time(v); }}}},
      {"analysis",
       {{"bin_width", [](RunConfig& c, const std::string& v) { c.analysis_bin_width = time(v); }},
        {"tau_min", [](RunConfig& c, const std::string& v) { c.tau_min = time(v); }},
        {"tau_max", [](RunConfig& c, const std::string& v) { c.tau_max = time(v); }},
        {"tau_step", [](RunConfig& c, const std::string& v) { c.tau_step = time(v); }},
        {"x_kind", [](RunConfig& c, const std::string& v) { c.x_kind = parse_x_kind(v); }},
        {"stream", [](RunConfig& c, const std::string& v) { c.stream_input = fs::path(v); }}}},
      {"fit",
       {{"weighted", [](RunConfig& c, const std::string& v) { c.fit.weighted = parse_bool(v); }},
        {"max_iterations",
         [](RunConfig& c, const std::string& v) {
           c.fit.max_iterations = static_cast<int>(parse_unsigned(v));
         }},
        {"starts",
         [](RunConfig& c, const std::string& v) {
           c.fit.starts = static_cast<int>(parse_unsigned(v));
         }},
        {"band_low", [](RunConfig& c, const std::string& v) { c.fit.band_low = parse_number(v); }},
        {"band_high", [](RunConfig& c, const std::string& v) { c.fit.band_high = parse_number(v); }},
        {"curve", [](RunConfig& c, const std::string& v) { c.curve_input = fs::path(v); }}}},
      {"output",
       {{"dir", [](RunConfig& c, const std::string& v) { c.out_dir = fs::path(v); }}}},
  };
  return table;
}

template <typename F>
void checked(std::string_view where, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(fmt::format("{}: {}", where, e.what()));
  }
}

void resolve_input(std::optional<fs::path>& p, const fs::path& base_dir,
                   std::string_view where) {
  if (!p) return;
  if (p->is_relative() && !base_dir.empty()) *p = base_dir / *p;
  if (!fs::exists(*p)) {
    throw ConfigError(fmt::format("{}: file '{}' does not exist", where, p->string()));
  }
}

}  // namespace

ModeFrequencies RunConfig::frequencies() const {
  return ModeFrequencies::from_wavelengths(lambda1, lambda2, lambda3);
}

ErasureDetectorConfig RunConfig::detector(std::string label) const {
  return ErasureDetectorConfig{conversion, std::move(label), false};
}

HbtScenario RunConfig::scenario() const {
  HbtScenario s;
  s.alpha = std::polar(alpha, alpha_phase);
  s.beta = std::polar(beta, beta_phase);
  s.detector_a = detector("A");
  s.detector_b = detector("B");
  s.t_delay = t_delay;
  s.erasure_enabled = erasure;
  s.frequencies = frequencies();
  return s;
}

StreamConfig RunConfig::stream_config() const {
  StreamConfig out = stream;
  if (schedule.steps == 0) {
    out.schedule.clear();
    return out;
  }
  if (!(stream.bin_width > 0.0)) throw DomainError("bin width must be positive");
  const auto bins = std::llround(schedule.dwell / stream.bin_width);
  const double dwell = static_cast<double>(bins) * stream.bin_width;
  out.schedule.clear();
  for (unsigned i = 0; i < schedule.steps; ++i) {
    out.schedule.push_back({schedule.start + i * schedule.step, dwell});
  }
  out.duration = static_cast<double>(bins) * schedule.steps * stream.bin_width;
  return out;
}

std::vector<double> RunConfig::taus() const {
  return tau_grid(tau_min, tau_max, tau_step);
}

void RunConfig::validate() const {
  checked("[modes]", [&] { frequencies(); });
  checked("[conversion]", [&] { conversion.validate(); });
  checked("[scenario]", [&] { scenario().validate(); });
  if (schedule.steps > 0) {
    checked("[schedule]", [&] {
      if (!(schedule.dwell > 0.0)) throw DomainError("dwell must be > 0");
      if (!(schedule.step > 0.0)) throw DomainError("step must be > 0");
      if (std::llround(schedule.dwell / stream.bin_width) < 1) {
        throw DomainError("dwell shorter than one stream bin");
      }
    });
  }
  checked("[model]", [&] { stream.model.validate(); });
  checked("[stream]", [&] { stream_config().validate(); });
  checked("[analysis]", [&] {
    if (!(analysis_bin_width >= stream.bin_width)) {
      throw DomainError("bin_width must not be finer than the stream bin width");
    }
    if (stream.model.kind == G2ModelKind::tau) taus();
    if (stream.model.kind == G2ModelKind::delay && x_kind == XKind::tau) {
      throw DomainError("x_kind = tau needs the tau model");
    }
  });
  checked("[fit]", [&] {
    if (fit.max_iterations < 1 || fit.starts < 1) {
      throw DomainError("max_iterations and starts must be >= 1");
    }
    if (!(fit.band_low > 0.0) || !(fit.band_high >= fit.band_low)) {
      throw DomainError("need 0 < band_low <= band_high");
    }
  });
}

RunConfig parse_config(std::string_view text, const RunConfig& base,
                       const fs::path& base_dir) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("line {}: {}", e.line(), e.message()));
  }
  RunConfig config = base;
  const auto& table = setters();
  for (const auto& [section, keys] : tree) {
    const auto sec = table.find(section);
    if (sec == table.end()) {
      if (keys.empty()) {
        throw ConfigError(fmt::format("key '{}' outside any section", section));
      }
      throw ConfigError(fmt::format("unknown section [{}]", section));
    }
    for (const auto& [key, value] : keys) {
      const auto setter = sec->second.find(key);
      if (setter == sec->second.end()) {
        throw ConfigError(fmt::format("[{}] {}: unknown key", section, key));
      }
      const auto raw = value.get_value<std::string>();
      checked(fmt::format("[{}] {}", section, key),
              [&] { setter->second(config, raw); });
    }
  }
  resolve_input(config.stream_input, base_dir, "[analysis] stream");
  resolve_input(config.curve_input, base_dir, "[fit] curve");
  if (config.out_dir.is_relative() && !base_dir.empty() && tree.count("output")) {
    config.out_dir = base_dir / config.out_dir;
  }
  config.validate();
  return config;
}

RunConfig load_config(const fs::path& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open config '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config(buffer.str(), base, path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::vector<std::string> conversion_log(const RunConfig& config) {
  const auto f = config.frequencies();
  return {
      fmt::format("lambda1 = {:.6g} nm -> f1 = {}", config.lambda1 * 1e9,
                  format_frequency(f.f1)),
      fmt::format("lambda2 = {:.6g} nm -> f2 = {}", config.lambda2 * 1e9,
                  format_frequency(f.f2)),
      fmt::format("lambda3 = {:.6g} nm -> f3 = {}", config.lambda3 * 1e9,
                  format_frequency(f.f3)),
      fmt::format("f2 - f1 = {}", format_frequency(f.delta_f21())),
  };
}

}  // namespace chbt
