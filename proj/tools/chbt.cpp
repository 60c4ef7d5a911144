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

// Command-line driver: quantum protocol report, stream simulation, g2
// analysis, fitting and figure reproduction.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "chbt/config.hpp"
#include "chbt/error.hpp"
#include "chbt/fit.hpp"
#include "chbt/g2.hpp"
#include "chbt/pipeline.hpp"
#include "chbt/protocol.hpp"
#include "chbt/tdc.hpp"

namespace fs = std::filesystem;
using namespace chbt;

namespace {

enum Exit : int {
  kOk = 0,
  kUsage = 1,
  kConfig = 2,
  kIo = 3,
  kNotConverged = 4,
  kData = 5,
};

struct Globals {
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> out_dir;
  bool dump_state = false;
  bool quiet = false;
};

/// Removes every registered file unless released.
class OutputGuard {
 public:
  ~OutputGuard() {
    if (released_) return;
    for (const auto& p : files_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }
  void add(const fs::path& p) { files_.push_back(p); }
  void release() { released_ = true; }

 private:
  std::vector<fs::path> files_;
  bool released_ = false;
};

RunConfig load(const Globals& g, RunConfig base = {}) {
  RunConfig c = g.config ? load_config(*g.config, base) : base;
  if (g.seed) c.stream.seed = *g.seed;
  if (g.out_dir) c.out_dir = *g.out_dir;
  return c;
}

fs::path output_path(const RunConfig& c, const std::string& name) {
  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  if (ec) {
    throw IoError(fmt::format("cannot create output directory '{}': {}",
                              c.out_dir.string(), ec.message()));
  }
  return c.out_dir / name;
}

void write_text(const fs::path& path, const std::string& text, OutputGuard& guard) {
  guard.add(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << text;
  out.flush();
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

void log_conversions(const RunConfig& c) {
  for (const auto& line : conversion_log(c)) spdlog::info("{}", line);
}

std::string complex_text(Complex z) {
  return fmt::format("{:+.6f}{:+.6f}i", z.real(), z.imag());
}

std::string ket(const StateVector& s, const FockBasisState& basis) {
  std::string out;
  for (std::size_t m = 0; m < basis.occupation.size(); ++m) {
    const int n = basis.occupation[m];
    if (n == 0) continue;
    const auto& id = s.registry()[m];
    if (!out.empty()) out += ", ";
    out += fmt::format("{}{}.{}.{}", n > 1 ? fmt::format("{}x ", n) : "", id.port,
                       to_string(id.branch), id.label);
  }
  return "|" + (out.empty() ? std::string("vac") : out) + ">";
}

void print_state(std::string_view title, const StateVector& s) {
  fmt::print("{} (norm^2 = {:.12f})\n", title, s.norm2());
  for (const auto& [basis, amp] : s.amplitudes()) {
    fmt::print("  {}  {}\n", complex_text(amp), ket(s, basis));
  }
}

nlohmann::ordered_json state_json(const StateVector& s) {
  return nlohmann::ordered_json::parse(state_to_json(s));
}

int cmd_protocol(const Globals& g) {
  const auto c = load(g);
  log_conversions(c);
  const auto scenario = c.scenario();
  const auto trace = run_erasure_detector(scenario.alpha, scenario.beta,
                                          c.detector("A"), c.frequencies());
  print_state("input", trace.input);
  print_state("after first beamsplitter", trace.after_first_splitter);
  print_state("after conversion", trace.after_conversion);
  print_state("after second beamsplitter (pre-filter)", trace.after_second_splitter);
  print_state("post-filter", trace.filtered);
  fmt::print("filter discarded probability = {:.12f}\n", trace.discarded);
  fmt::print("detection amplitude on gamma3 = {}\n", complex_text(trace.amplitude));
  fmt::print("post-selection probability = {:.12f}\n", trace.detection_probability());
  fmt::print("ideal tuning: {}\n", c.detector("A").is_ideally_tuned() ? "yes" : "no");

  const auto hbt = hbt_coincidence_amplitude(scenario);
  if (hbt.interfering) {
    fmt::print("HBT coincidence amplitude (t_delay = {} s) = {}\n", scenario.t_delay,
               complex_text(hbt.amplitude));
  } else {
    fmt::print("HBT which-path amplitudes = {}, {} (no interference)\n",
               complex_text(hbt.which_path[0]), complex_text(hbt.which_path[1]));
  }
  fmt::print("HBT coincidence probability = {:.12f}\n", hbt.probability);
  fmt::print("predicted g2(0) at epsilon = {} : {:.12f}\n", c.stream.model.epsilon,
             predicted_g2_zero(scenario, c.stream.model.epsilon));

  if (g.dump_state) {
    OutputGuard guard;
    nlohmann::ordered_json j;
    j["input"] = state_json(trace.input);
    j["after_first_splitter"] = state_json(trace.after_first_splitter);
    j["after_conversion"] = state_json(trace.after_conversion);
    j["after_second_splitter"] = state_json(trace.after_second_splitter);
    j["filtered"] = state_json(trace.filtered);
    j["amplitude"] = {trace.amplitude.real(), trace.amplitude.imag()};
    const auto path = output_path(c, "protocol_states.json");
    write_text(path, j.dump(2) + "\n", guard);
    guard.release();
    spdlog::info("wrote {}", path.string());
  }
  return kOk;
}

int cmd_simulate(const Globals& g, const std::optional<fs::path>& out) {
  const auto c = load(g);
  log_conversions(c);
  OutputGuard guard;
  SimulationStats stats;
  const auto stream = simulate_stream(c.stream_config(), &stats);
  spdlog::info("simulated {} A and {} B clicks", stream.a.size(), stream.b.size());
  if (stats.clipped > 0) {
    spdlog::warn("{} of {} B candidates had clipped probabilities", stats.clipped,
                 stats.candidates);
  }
  const auto path = out ? *out : output_path(c, "stream.tdc");
  guard.add(path);
  write_stream(stream, path, c.stream_format);
  guard.release();
  fmt::print("{}\n", path.string());
  return kOk;
}

int cmd_analyze(const Globals& g, std::optional<fs::path> input,
                const std::optional<fs::path>& out) {
  const auto c = load(g);
  if (!input) input = c.stream_input;
  if (!input) throw ConfigError("no stream file given (argument or [analysis] stream)");
  const auto stream = read_stream(*input);
  if (stream.empty()) {
    throw DomainError(fmt::format("stream '{}' has no clicks", input->string()));
  }
  const auto curve = analyze_stream(c, stream);
  OutputGuard guard;
  const auto path = out ? *out : output_path(c, "curve.csv");
  write_text(path, curve_to_csv(curve), guard);
  guard.release();
  spdlog::info("{} points", curve.points.size());
  fmt::print("{}\n", path.string());
  return kOk;
}

int cmd_fit(const Globals& g, std::optional<fs::path> input,
            const std::optional<fs::path>& out) {
  const auto c = load(g);
  if (!input) input = c.curve_input;
  if (!input) throw ConfigError("no curve file given (argument or [fit] curve)");
  const auto curve = read_curve(*input);
  const auto fit = fit_curve(c, curve);
  fmt::print("{}", format_fit_table(fit));
  OutputGuard guard;
  const auto path = out ? *out : output_path(c, "fit.json");
  write_text(path, fit_to_json(fit) + "\n", guard);
  guard.release();
  if (!fit.converged) {
    spdlog::error("fit did not converge after {} iterations", fit.iterations);
    return kNotConverged;
  }
  return kOk;
}

int cmd_reproduce(const Globals& g, const std::string& figure_name) {
  const auto figure = parse_figure(figure_name);
  auto c = load(g, figure_preset(figure));
  if (!g.seed && !g.config) c.stream.seed = 7;
  log_conversions(c);
  const auto name = std::string(to_string(figure));
  OutputGuard guard;
  const auto curve_path = output_path(c, name + "_curve.csv");
  const auto fit_path = output_path(c, name + "_fit.json");
  const auto plot_path = output_path(c, name + "_plot.csv");

  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_pipeline(c);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  spdlog::info("{}: {} clicks, {} points, {:.2f} s", name, r.clicks,
               r.curve.points.size(), seconds);
  if (r.stats.clipped > 0) {
    spdlog::warn("{} of {} B candidates had clipped probabilities", r.stats.clipped,
                 r.stats.candidates);
  }
  write_text(curve_path, curve_to_csv(r.curve), guard);
  write_text(fit_path, fit_to_json(r.fit) + "\n", guard);
  write_text(plot_path, plot_csv(r.curve, r.fit), guard);
  guard.release();
  fmt::print("{}", format_fit_table(r.fit));
  if (!r.fit.converged) {
    spdlog::error("fit did not converge after {} iterations", r.fit.iterations);
    return kNotConverged;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Colour-erasure chromatic HBT simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  std::string config_arg;
  std::uint64_t seed_arg = 0;
  std::string out_dir_arg;
  app.add_option("--config", config_arg, "INI configuration file");
  app.add_option("--seed", seed_arg, "Random seed (overrides the config)");
  app.add_option("--out-dir", out_dir_arg, "Output directory");
  app.add_flag("--dump-state", g.dump_state, "Write protocol states as JSON");
  app.add_flag("-q,--quiet", g.quiet, "Only log warnings and errors");

  auto* protocol = app.add_subcommand("protocol", "Run the single-photon erasure detector");

  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "Generate a TDC stream");
  simulate->add_option("-o,--output", sim_out, "Stream file");

  std::string an_in;
  std::string an_out;
  auto* analyze = app.add_subcommand("analyze", "Turn a stream into a g2 curve");
  analyze->add_option("stream", an_in, "Stream file");
  analyze->add_option("-o,--output", an_out, "Curve CSV");

  std::string fit_in;
  std::string fit_out;
  auto* fit = app.add_subcommand("fit", "Fit a g2 curve");
  fit->add_option("curve", fit_in, "Curve CSV");
  fit->add_option("-o,--output", fit_out, "Fit JSON");

  std::string figure;
  auto* reproduce = app.add_subcommand("reproduce", "Simulate, analyse and fit a figure");
  reproduce->add_option("figure", figure, "fig2 or fig3")
      ->required()
      ->check(CLI::IsMember({"fig2", "fig3"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  auto logger = spdlog::stderr_color_st("chbt");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(g.quiet ? spdlog::level::warn : spdlog::level::info);

  if (app.count("--config") > 0) g.config = config_arg;
  if (app.count("--seed") > 0) g.seed = seed_arg;
  if (app.count("--out-dir") > 0) g.out_dir = out_dir_arg;
  const auto opt_path = [](const std::string& s) -> std::optional<fs::path> {
    if (s.empty()) return std::nullopt;
    return fs::path(s);
  };

  try {
    if (*protocol) return cmd_protocol(g);
    if (*simulate) return cmd_simulate(g, opt_path(sim_out));
    if (*analyze) return cmd_analyze(g, opt_path(an_in), opt_path(an_out));
    if (*fit) return cmd_fit(g, opt_path(fit_in), opt_path(fit_out));
    if (*reproduce) return cmd_reproduce(g, figure);
  } catch (const ConfigError& e) {
    spdlog::error("config: {}", e.what());
    return kConfig;
  } catch (const IoError& e) {
    spdlog::error("I/O: {}", e.what());
    return kIo;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kData;
  } catch (const std::exception& e) {
    spdlog::error("unexpected: {}", e.what());
    return kData;
  }
  return kUsage;
}
