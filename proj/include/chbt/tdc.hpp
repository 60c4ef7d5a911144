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

// Synthetic time-to-digital-converter click streams for the two detectors,
// with A-B correlations injected from an analytic g2 model, plus the text and
// binary stream file formats. The binary layout is the magic "TDC1", a
// little-endian u64 header (bin width, duration, seed, segment count, then
// per segment the delay bits, start and end) and 9-byte records
// {u8 channel, u64 timestamp_ps}.

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "chbt/protocol.hpp"

namespace chbt {

enum class Channel : std::uint8_t { A = 0, B = 1 };

/// One delay-controller setting held for `dwell` seconds.
struct DelayStep {
  double t_delay = 0.0;
  double dwell = 0.0;
};

inline constexpr double kMaxClickProbability = 0.1;

struct StreamConfig {
  double bin_width = 1e-9;  // s, TDC resolution
  double duration = 1.0;    // s
  double rate_a = 1e5;      // Hz, total singles rate at A (signal + dark)
  double rate_b = 1e5;
  double dark_a = 0.0;      // Hz, uncorrelated part of rate_a
  double dark_b = 0.0;
  G2Model model;
  /// Consecutive delay settings from t = 0; their dwells must add up to the
  /// duration. Empty means a single setting with t_delay = 0.
  std::vector<DelayStep> schedule;
  std::uint64_t seed = 0;
  /// Worker threads; 0 picks the hardware concurrency. Output does not
  /// depend on this value.
  unsigned threads = 1;

  std::int64_t bin_width_ps() const;
  std::int64_t duration_ps() const;
  void validate() const;
};

/// A time window recorded at one delay setting, [start_ps, end_ps).
struct StreamSegment {
  double t_delay = 0.0;
  std::int64_t start_ps = 0;
  std::int64_t end_ps = 0;

  friend bool operator==(const StreamSegment&, const StreamSegment&) = default;
};

struct TdcRecord {
  Channel channel;
  std::int64_t timestamp_ps;

  friend bool operator==(const TdcRecord&, const TdcRecord&) = default;
};

/// Click timestamps per channel, each sorted, plus the acquisition header.
/// Header fields are 0 when the source file did not carry them.
struct TdcStream {
  std::int64_t bin_width_ps = 0;
  std::int64_t duration_ps = 0;
  std::uint64_t seed = 0;
  std::vector<StreamSegment> segments;
  std::vector<std::int64_t> a;
  std::vector<std::int64_t> b;

  const std::vector<std::int64_t>& channel(Channel c) const {
    return c == Channel::A ? a : b;
  }
  std::size_t size() const noexcept { return a.size() + b.size(); }
  bool empty() const noexcept { return a.empty() && b.empty(); }
  /// Time-ordered merge, A before B on equal timestamps.
  std::vector<TdcRecord> records() const;

  friend bool operator==(const TdcStream&, const TdcStream&) = default;
};

struct SimulationStats {
  std::uint64_t candidates = 0;
  /// B bins whose conditional click probability left [0, p_max] and had to
  /// be clipped; non-zero values mean the correlation model was stretched.
  std::uint64_t clipped = 0;
};

/// Per-bin Bernoulli clicks. A clicks are independent; a B click in bin j
/// has probability p_B (1 + sum_k (s_{j+k} - p_s) c_k) where s marks A
/// signal clicks and c_k is chosen so that P(A_{j+k} B_j) = p_A p_B g2(k w).
/// Deterministic for a given seed.
TdcStream simulate_stream(const StreamConfig& config,
                          SimulationStats* stats = nullptr);

enum class StreamFormat { text, binary };

void write_stream(const TdcStream& stream, const std::filesystem::path& path,
                  StreamFormat format = StreamFormat::text);
/// Detects the format from the "TDC1" magic. Throws FormatError with the
/// line or byte offset of the first malformed record.
TdcStream read_stream(const std::filesystem::path& path);
TdcStream parse_stream_text(std::string_view text);
TdcStream parse_stream_binary(std::string_view bytes);

}  // namespace chbt
