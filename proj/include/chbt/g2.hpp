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

// Coincidence counting on TDC streams and the normalised g2 estimator,
// singly and as delay or tau scans.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chbt/tdc.hpp"

namespace chbt {

/// Half-open acquisition window [start_ps, end_ps).
struct TimeWindow {
  std::int64_t start_ps = 0;
  std::int64_t end_ps = 0;
};

struct CoincidenceCounts {
  std::uint64_t n_coincidence = 0;
  std::uint64_t n_a = 0;
  std::uint64_t n_b = 0;
  std::uint64_t n_bin = 0;
  double bin_width = 0.0;  // s
  double tau = 0.0;        // s, shift applied to channel B

  friend bool operator==(const CoincidenceCounts&,
                         const CoincidenceCounts&) = default;
};

/// Shifts every B timestamp by +tau, bins both channels with `bin_width`
/// from the window start and counts bins in which both channels clicked.
/// Only whole bins of the window are used. The default window is the whole
/// stream.
CoincidenceCounts count_coincidences(
    const TdcStream& stream, double tau, double bin_width,
    std::optional<TimeWindow> window = std::nullopt);

/// The same stream with channel B moved by +tau (rounded to ps).
TdcStream shift_channel_b(const TdcStream& stream, double tau);

struct G2Estimate {
  double g2 = 0.0;
  double sigma = 0.0;
};

/// g2 = n_c n_bin / (n_A n_B), sigma = g2 / sqrt(n_c). With no coincidences
/// sigma is the one-count bound n_bin / (n_A n_B).
G2Estimate estimate_g2(const CoincidenceCounts& counts);

enum class XKind { t_delay, tau, path_length };

std::string_view to_string(XKind kind);
XKind parse_x_kind(std::string_view text);
/// "s" for times, "m" for path length.
std::string_view x_unit(XKind kind);

struct G2Point {
  double x = 0.0;
  double g2 = 0.0;
  double sigma = 0.0;
};

struct G2Curve {
  XKind kind = XKind::t_delay;
  std::vector<G2Point> points;
};

/// One point per recorded delay setting (stream segments) at tau = 0.
/// `kind` selects x = t_delay or x = c t_delay.
G2Curve scan_delay(const TdcStream& stream, double bin_width,
                   XKind kind = XKind::t_delay);
G2Curve scan_delay(const TdcStream& stream,
                   std::span<const StreamSegment> segments, double bin_width,
                   XKind kind = XKind::t_delay);

/// One point per tau from a single acquisition.
G2Curve scan_tau(const TdcStream& stream, std::span<const double> taus,
                 double bin_width,
                 std::optional<TimeWindow> window = std::nullopt);

/// Evenly spaced tau grid, both ends included.
std::vector<double> tau_grid(double tau_min, double tau_max, double step);

std::string curve_to_csv(const G2Curve& curve);
G2Curve curve_from_csv(std::string_view text);
void write_curve(const G2Curve& curve, const std::filesystem::path& path);
G2Curve read_curve(const std::filesystem::path& path);

}  // namespace chbt
