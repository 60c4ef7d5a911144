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

// Run configuration read from an INI file. Every physical quantity carries
// a unit suffix; unknown sections and keys are errors.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chbt/fit.hpp"
#include "chbt/g2.hpp"
#include "chbt/protocol.hpp"
#include "chbt/tdc.hpp"

namespace chbt {

/// `steps` delay settings start, start + step, ..., each held for `dwell`.
struct ScheduleSpec {
  double start = 0.0;
  double step = 0.0;
  unsigned steps = 0;
  double dwell = 0.0;
};

struct RunConfig {
  // [modes]
  double lambda1 = 1064.4e-9;
  double lambda2 = 1063.6e-9;
  double lambda3 = 630.8e-9;
  // [conversion]
  ConversionSettings conversion = ConversionSettings::ideal();
  // [scenario]
  double alpha = 0.70710678118654752;
  double beta = 0.70710678118654752;
  double alpha_phase = 0.0;
  double beta_phase = 0.0;
  double t_delay = 0.0;
  bool erasure = true;
  // [model] and [stream]; the schedule is expanded by stream_config()
  StreamConfig stream;
  StreamFormat stream_format = StreamFormat::text;
  // [schedule]
  ScheduleSpec schedule;
  // [analysis]
  double analysis_bin_width = 1e-9;
  double tau_min = -60e-6;
  double tau_max = 60e-6;
  double tau_step = 100e-9;
  XKind x_kind = XKind::t_delay;
  std::optional<std::filesystem::path> stream_input;
  // [fit]
  FitOptions fit;
  std::optional<std::filesystem::path> curve_input;
  // [output]
  std::filesystem::path out_dir = "out";

  ModeFrequencies frequencies() const;
  ErasureDetectorConfig detector(std::string label) const;
  HbtScenario scenario() const;
  /// The stream settings with the schedule expanded; a non-empty schedule
  /// fixes the duration to steps x dwell.
  StreamConfig stream_config() const;
  std::vector<double> taus() const;
  /// Throws ConfigError naming the offending section and key.
  void validate() const;
};

/// Overlays the INI text on `base`. Relative input paths resolve against
/// `base_dir` and must exist.
RunConfig parse_config(std::string_view text, const RunConfig& base = {},
                       const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path,
                      const RunConfig& base = {});

/// One line per wavelength-to-frequency conversion plus f2 - f1.
std::vector<std::string> conversion_log(const RunConfig& config);

}  // namespace chbt
