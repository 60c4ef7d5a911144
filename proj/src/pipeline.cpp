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

#include "chbt/pipeline.hpp"

#include <iterator>

#include <fmt/format.h>

#include "chbt/error.hpp"
#include "chbt/optics.hpp"

namespace chbt {

std::string_view to_string(Figure figure) {
  return figure == Figure::fig2 ? "fig2" : "fig3";
}

Figure parse_figure(std::string_view text) {
  if (text == "fig2") return Figure::fig2;
  if (text == "fig3") return Figure::fig3;
  throw DomainError(fmt::format("unknown figure '{}' (expected fig2 or fig3)", text));
}

RunConfig figure_preset(Figure figure) {
  RunConfig c;
  if (figure == Figure::fig2) {
    c.stream.model = {G2ModelKind::delay, 0.59, -0.16, 210.1e9, 0.0};
    c.stream.bin_width = 1e-9;
    c.stream.rate_a = 40e6;
    c.stream.rate_b = 40e6;
    c.schedule = {0.0, 1.5 / (20.0 * 210.1e9), 20, 6e-3};
    c.analysis_bin_width = 1e-9;
    c.x_kind = XKind::path_length;
  } else {
    c.stream.model = {G2ModelKind::tau, 0.576, -0.434, 1.32e6, 0.118e6};
    c.stream.bin_width = 1e-9;
    c.stream.rate_a = 1e5;
    c.stream.rate_b = 1e5;
    c.stream.duration = 40.0;
    c.analysis_bin_width = 10e-9;
    c.tau_min = -60e-6;
    c.tau_max = 60e-6;
    c.tau_step = 100e-9;
    c.x_kind = XKind::tau;
  }
  c.out_dir = ".";
  return c;
}

G2Curve analyze_stream(const RunConfig& config, const TdcStream& stream) {
  if (stream.empty()) throw DomainError("stream has no clicks");
  if (config.stream.model.kind == G2ModelKind::delay) {
    const auto kind = config.x_kind == XKind::tau ? XKind::t_delay : config.x_kind;
    return scan_delay(stream, config.analysis_bin_width, kind);
  }
  const auto taus = config.taus();
  return scan_tau(stream, taus, config.analysis_bin_width);
}

FitResult fit_curve(const RunConfig& config, const G2Curve& curve) {
  if (curve.kind == XKind::tau) return fit_tau_model(curve, std::nullopt, config.fit);
  return fit_delay_model(curve, std::nullopt, config.fit);
}

Reproduction run_pipeline(const RunConfig& config) {
  Reproduction r;
  const auto stream = simulate_stream(config.stream_config(), &r.stats);
  r.clicks = stream.size();
  r.curve = analyze_stream(config, stream);
  r.fit = fit_curve(config, r.curve);
  return r;
}

std::string plot_csv(const G2Curve& curve, const FitResult& fit) {
  const auto model = fit.model();
  std::string out = fmt::format("# xkind={} unit={}\nx,g2,sigma,model\n",
                                to_string(curve.kind), x_unit(curve.kind));
  for (const auto& p : curve.points) {
    const double x = curve.kind == XKind::path_length ? p.x / kSpeedOfLight : p.x;
    fmt::format_to(std::back_inserter(out), "{},{},{},{}\n", p.x, p.g2, p.sigma,
                   model_value(model, x));
  }
  return out;
}

}  // namespace chbt
