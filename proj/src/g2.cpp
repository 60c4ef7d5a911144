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

#include "chbt/g2.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "chbt/error.hpp"
#include "chbt/optics.hpp"

namespace chbt {

namespace {

std::int64_t to_ps(double seconds) {
  return static_cast<std::int64_t>(std::llround(seconds * 1e12));
}

std::int64_t floor_div(std::int64_t num, std::int64_t den) {
  std::int64_t q = num / den;
  if ((num % den != 0) && ((num < 0) != (den < 0))) --q;
  return q;
}

std::int64_t check_bin_width(const TdcStream& stream, double bin_width) {
  const auto width = to_ps(bin_width);
  if (!(bin_width > 0.0) || width <= 0) {
    throw DomainError("analysis bin width must be at least 1 ps");
  }
  if (stream.bin_width_ps > 0 && width < stream.bin_width_ps) {
    throw DomainError(fmt::format(
        "analysis bin width {} ps is finer than the stream resolution {} ps",
        width, stream.bin_width_ps));
  }
  return width;
}

TimeWindow resolve_window(const TdcStream& stream,
                          std::optional<TimeWindow> window) {
  TimeWindow w;
  if (window) {
    w = *window;
  } else if (stream.duration_ps > 0) {
    w = {0, stream.duration_ps};
  } else {
    std::int64_t last = -1;
    if (!stream.a.empty()) last = std::max(last, stream.a.back());
    if (!stream.b.empty()) last = std::max(last, stream.b.back());
    w = {0, last + 1};
  }
  if (w.end_ps <= w.start_ps) throw DomainError("empty analysis window");
  if (stream.duration_ps > 0 && (w.start_ps < 0 || w.end_ps > stream.duration_ps)) {
    throw DomainError(fmt::format("window [{}, {}) ps lies outside the stream",
                                  w.start_ps, w.end_ps));
  }
  return w;
}

/// Occupied bin indices (unique, ascending) of timestamps + shift inside
/// [start, start + n_bin * width), and the number of clicks there.
std::vector<std::int64_t> occupied_bins(const std::vector<std::int64_t>& times,
                                        std::int64_t shift, std::int64_t start,
                                        std::int64_t width, std::int64_t n_bin,
                                        std::uint64_t& clicks) {
  const std::int64_t end = start + n_bin * width;
  auto first = std::lower_bound(times.begin(), times.end(), start - shift);
  auto last = std::lower_bound(first, times.end(), end - shift);
  clicks = static_cast<std::uint64_t>(last - first);
  std::vector<std::int64_t> bins;
  bins.reserve(clicks);
  for (auto it = first; it != last; ++it) {
    const std::int64_t bin = (*it + shift - start) / width;
    if (bins.empty() || bins.back() != bin) bins.push_back(bin);
  }
  return bins;
}

std::uint64_t intersection_size(const std::vector<std::int64_t>& x,
                                const std::vector<std::int64_t>& y) {
  std::uint64_t n = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i] < y[j]) {
      ++i;
    } else if (y[j] < x[i]) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

}  // namespace

CoincidenceCounts count_coincidences(const TdcStream& stream, double tau,
                                     double bin_width,
                                     std::optional<TimeWindow> window) {
  const auto width = check_bin_width(stream, bin_width);
  const auto w = resolve_window(stream, window);
  const std::int64_t n_bin = (w.end_ps - w.start_ps) / width;
  if (n_bin <= 0) throw DomainError("analysis window shorter than one bin");
  const auto shift = to_ps(tau);

  CoincidenceCounts counts;
  counts.bin_width = bin_width;
  counts.tau = tau;
  counts.n_bin = static_cast<std::uint64_t>(n_bin);
  const auto a_bins = occupied_bins(stream.a, 0, w.start_ps, width, n_bin, counts.n_a);
  const auto b_bins = occupied_bins(stream.b, shift, w.start_ps, width, n_bin, counts.n_b);
  counts.n_coincidence = intersection_size(a_bins, b_bins);
  return counts;
}

TdcStream shift_channel_b(const TdcStream& stream, double tau) {
  TdcStream out = stream;
  const auto shift = to_ps(tau);
  for (auto& t : out.b) t += shift;
  return out;
}

G2Estimate estimate_g2(const CoincidenceCounts& counts) {
  if (counts.n_a == 0 || counts.n_b == 0) {
    throw DomainError("g2 undefined: a channel has no counts in the window");
  }
  const double norm = static_cast<double>(counts.n_bin) /
                      (static_cast<double>(counts.n_a) * static_cast<double>(counts.n_b));
  if (counts.n_coincidence == 0) return {0.0, norm};
  const double nc = static_cast<double>(counts.n_coincidence);
  const double g2 = nc * norm;
  return {g2, g2 / std::sqrt(nc)};
}

std::string_view to_string(XKind kind) {
  switch (kind) {
    case XKind::t_delay: return "t_delay";
    case XKind::tau: return "tau";
    case XKind::path_length: return "path_length";
  }
  return "t_delay";
}

XKind parse_x_kind(std::string_view text) {
  if (text == "t_delay") return XKind::t_delay;
  if (text == "tau") return XKind::tau;
  if (text == "path_length") return XKind::path_length;
  throw DomainError(fmt::format(
      "unknown x kind '{}' (expected t_delay, tau or path_length)", text));
}

std::string_view x_unit(XKind kind) {
  return kind == XKind::path_length ? "m" : "s";
}

G2Curve scan_delay(const TdcStream& stream, double bin_width, XKind kind) {
  return scan_delay(stream, stream.segments, bin_width, kind);
}

G2Curve scan_delay(const TdcStream& stream,
                   std::span<const StreamSegment> segments, double bin_width,
                   XKind kind) {
  if (kind == XKind::tau) {
    throw DomainError("a delay scan has x = t_delay or path_length");
  }
  std::set<double> delays;
  for (const auto& s : segments) {
    if (!delays.insert(s.t_delay).second) {
      throw DomainError(fmt::format("duplicate delay setting {} s", s.t_delay));
    }
  }
  if (delays.size() < 3) {
    throw DomainError(fmt::format(
        "a delay scan needs at least 3 delay settings, got {}", delays.size()));
  }
  G2Curve curve{kind, {}};
  for (const auto& s : segments) {
    const auto counts =
        count_coincidences(stream, 0.0, bin_width, TimeWindow{s.start_ps, s.end_ps});
    const auto est = estimate_g2(counts);
    const double x = kind == XKind::path_length ? kSpeedOfLight * s.t_delay : s.t_delay;
    curve.points.push_back({x, est.g2, est.sigma});
  }
  return curve;
}

G2Curve scan_tau(const TdcStream& stream, std::span<const double> taus,
                 double bin_width, std::optional<TimeWindow> window) {
  if (taus.empty()) throw DomainError("tau list is empty");
  const auto width = check_bin_width(stream, bin_width);
  const auto w = resolve_window(stream, window);
  const std::int64_t n_bin = (w.end_ps - w.start_ps) / width;
  if (n_bin <= 0) throw DomainError("analysis window shorter than one bin");
  const std::int64_t span_ps = n_bin * width;

  std::vector<std::int64_t> shifts;
  bool aligned = true;
  for (double tau : taus) {
    const auto s = to_ps(tau);
    if (std::abs(s) >= span_ps) {
      throw DomainError(fmt::format("tau = {} s exceeds the analysis window", tau));
    }
    aligned = aligned && s % width == 0;
    shifts.push_back(s);
  }

  G2Curve curve{XKind::tau, {}};
  if (!aligned) {
    for (double tau : taus) {
      const auto est = estimate_g2(count_coincidences(stream, tau, bin_width, w));
      curve.points.push_back({tau, est.g2, est.sigma});
    }
    return curve;
  }

  // Bin-aligned shifts: histogram bin differences between occupied A bins
  // and unshifted B bins once, then read off every requested shift.
  std::uint64_t n_a = 0;
  const auto a_bins = occupied_bins(stream.a, 0, w.start_ps, width, n_bin, n_a);
  std::vector<std::int64_t> b_all;
  b_all.reserve(stream.b.size());
  for (auto t : stream.b) b_all.push_back(floor_div(t - w.start_ps, width));
  std::vector<std::int64_t> b_unique;
  for (auto bin : b_all) {
    if (b_unique.empty() || b_unique.back() != bin) b_unique.push_back(bin);
  }

  std::int64_t k_min = shifts.front() / width;
  std::int64_t k_max = k_min;
  for (auto s : shifts) {
    k_min = std::min(k_min, s / width);
    k_max = std::max(k_max, s / width);
  }
  std::vector<std::uint64_t> histogram(static_cast<std::size_t>(k_max - k_min + 1), 0);
  // A bin a meets shifted B bin b + k when a - b = k.
  std::size_t lo = 0;
  for (auto a : a_bins) {
    while (lo < b_unique.size() && b_unique[lo] < a - k_max) ++lo;
    for (std::size_t i = lo; i < b_unique.size() && b_unique[i] <= a - k_min; ++i) {
      ++histogram[static_cast<std::size_t>(a - b_unique[i] - k_min)];
    }
  }

  for (std::size_t i = 0; i < taus.size(); ++i) {
    const std::int64_t k = shifts[i] / width;
    CoincidenceCounts counts;
    counts.bin_width = bin_width;
    counts.tau = taus[i];
    counts.n_bin = static_cast<std::uint64_t>(n_bin);
    counts.n_a = n_a;
    const auto first = std::lower_bound(b_all.begin(), b_all.end(), -k);
    const auto last = std::lower_bound(first, b_all.end(), n_bin - k);
    counts.n_b = static_cast<std::uint64_t>(last - first);
    counts.n_coincidence = histogram[static_cast<std::size_t>(k - k_min)];
    const auto est = estimate_g2(counts);
    curve.points.push_back({taus[i], est.g2, est.sigma});
  }
  return curve;
}

std::vector<double> tau_grid(double tau_min, double tau_max, double step) {
  if (!(step > 0.0) || !(tau_max >= tau_min)) {
    throw DomainError("tau grid needs step > 0 and tau_max >= tau_min");
  }
  const auto n = static_cast<std::size_t>(std::llround((tau_max - tau_min) / step)) + 1;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = tau_min + static_cast<double>(i) * step;
  return grid;
}

std::string curve_to_csv(const G2Curve& curve) {
  std::string out = fmt::format("# xkind={} unit={}\nx,g2,sigma\n",
                                to_string(curve.kind), x_unit(curve.kind));
  for (const auto& p : curve.points) {
    fmt::format_to(std::back_inserter(out), "{},{},{}\n", p.x, p.g2, p.sigma);
  }
  return out;
}

G2Curve curve_from_csv(std::string_view text) {
  G2Curve curve;
  bool have_kind = false;
  bool have_columns = false;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto pos = line.find("xkind=");
      if (pos != std::string::npos) {
        const auto end = line.find(' ', pos);
        curve.kind = parse_x_kind(line.substr(pos + 6, end == std::string::npos
                                                            ? std::string::npos
                                                            : end - pos - 6));
        have_kind = true;
      }
      continue;
    }
    if (!have_columns) {
      if (line != "x,g2,sigma") {
        throw FormatError(fmt::format("line {}: expected header 'x,g2,sigma'", line_no));
      }
      have_columns = true;
      continue;
    }
    G2Point p;
    char c1 = 0;
    char c2 = 0;
    std::istringstream fields(line);
    if (!(fields >> p.x >> c1 >> p.g2 >> c2 >> p.sigma) || c1 != ',' || c2 != ',' ||
        !(fields >> std::ws).eof()) {
      throw FormatError(fmt::format("line {}: malformed row '{}'", line_no, line));
    }
    curve.points.push_back(p);
  }
  if (!have_kind) throw FormatError("curve CSV lacks the '# xkind=' comment");
  if (!have_columns) throw FormatError("curve CSV lacks the column header");
  return curve;
}

void write_curve(const G2Curve& curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << curve_to_csv(curve);
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

G2Curve read_curve(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return curve_from_csv(buffer.str());
  } catch (const FormatError& e) {
    throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace chbt
