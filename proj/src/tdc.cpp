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

#include "chbt/tdc.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "chbt/error.hpp"

namespace chbt {

namespace {

constexpr std::int64_t kChunkBins = std::int64_t{1} << 24;
constexpr std::int64_t kMaxKernelHalfWidth = 10'000'000;
constexpr std::string_view kBinaryMagic = "TDC1";

void put_u64(std::string& out, std::uint64_t v) {
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

std::uint64_t get_u64(std::string_view bytes, std::size_t offset) {
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) {
    v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(bytes[offset + k]))
         << (8 * k);
  }
  return v;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent generator per (seed, chunk, channel).
std::mt19937_64 chunk_rng(std::uint64_t seed, std::int64_t chunk, int lane) {
  const auto key = static_cast<std::uint64_t>(chunk) * 2 + lane;
  return std::mt19937_64(splitmix64(seed ^ splitmix64(key)));
}

/// Uniform in (0, 1].
double uniform01(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

/// Failures before the next success of a Bernoulli(p) sequence.
std::int64_t geometric_skip(std::mt19937_64& rng, double log1m_p) {
  const double skip = std::floor(std::log(uniform01(rng)) / log1m_p);
  return skip > 9e18 ? std::numeric_limits<std::int64_t>::max() / 2
                     : static_cast<std::int64_t>(skip);
}

struct SegmentBins {
  std::int64_t begin = 0;
  std::int64_t end = 0;
  double t_delay = 0.0;
};

std::vector<SegmentBins> segment_bins(const StreamConfig& c, std::int64_t bins) {
  if (c.schedule.empty()) return {{0, bins, 0.0}};
  std::vector<SegmentBins> out;
  std::int64_t cursor = 0;
  for (const auto& step : c.schedule) {
    const auto n = static_cast<std::int64_t>(std::llround(step.dwell / c.bin_width));
    out.push_back({cursor, cursor + n, step.t_delay});
    cursor += n;
  }
  return out;
}

/// Conditional-probability kernel for one delay setting.
struct Kernel {
  std::int64_t half_width = 0;
  std::vector<double> weights;  // c_k for k = -half_width .. half_width
  double mean_shift = 0.0;      // p_s * sum_k c_k
  double p_max = 0.0;           // candidate rate for thinning
};

struct Probabilities {
  double a, b, a_signal, b_signal, b_dark;
};

Kernel build_kernel(const StreamConfig& c, const Probabilities& p,
                    double t_delay) {
  Kernel kernel;
  const double w = c.bin_width;
  if (c.model.kind == G2ModelKind::tau && c.model.epsilon > 0.0) {
    kernel.half_width =
        static_cast<std::int64_t>(std::ceil(5.0 / (c.model.gamma * w)));
  }
  const double scale = (p.a_signal > 0.0 && p.b_signal > 0.0)
                           ? p.a * p.b / (p.a_signal * p.b_signal * (1.0 - p.a_signal))
                           : 0.0;
  kernel.weights.resize(static_cast<std::size_t>(2 * kernel.half_width + 1));
  double sum = 0.0;
  double sum_sq = 0.0;
  double peak = 0.0;
  for (std::int64_t k = -kernel.half_width; k <= kernel.half_width; ++k) {
    const double g2 = c.model.kind == G2ModelKind::tau
                          ? g2_tau_model(c.model, static_cast<double>(k) * w)
                          : g2_zero_model(c.model, t_delay);
    const double weight = (g2 - 1.0) * scale;
    kernel.weights[static_cast<std::size_t>(k + kernel.half_width)] = weight;
    sum += weight;
    sum_sq += weight * weight;
    peak = std::max(peak, std::abs(weight));
  }
  kernel.mean_shift = p.a_signal * sum;
  double bound;
  if (kernel.half_width == 0) {
    const double w0 = kernel.weights[0];
    bound = std::max(1.0 - p.a_signal * w0, 1.0 + (1.0 - p.a_signal) * w0);
  } else {
    bound = 1.0 + std::abs(kernel.mean_shift) +
            6.0 * std::sqrt(p.a_signal * sum_sq) + peak;
  }
  kernel.p_max = std::min(1.0, p.b_dark + p.b_signal * bound);
  return kernel;
}

struct ChunkClicks {
  std::vector<std::int64_t> bins;
  std::vector<std::int64_t> signal_bins;
};

ChunkClicks draw_a_chunk(const StreamConfig& c, const Probabilities& p,
                         std::int64_t chunk, std::int64_t total_bins) {
  ChunkClicks out;
  const std::int64_t begin = chunk * kChunkBins;
  const std::int64_t end = std::min(total_bins, begin + kChunkBins);
  if (p.a <= 0.0) return out;
  auto rng = chunk_rng(c.seed, chunk, 0);
  const double log1m = std::log1p(-p.a);
  const double signal_share = p.a_signal / p.a;
  for (std::int64_t j = begin + geometric_skip(rng, log1m); j < end;
       j += 1 + geometric_skip(rng, log1m)) {
    out.bins.push_back(j);
    if (uniform01(rng) <= signal_share) out.signal_bins.push_back(j);
  }
  return out;
}

std::vector<std::int64_t> draw_b_chunk(
    const StreamConfig& c, const Probabilities& p,
    const std::vector<SegmentBins>& segments,
    const std::vector<Kernel>& kernels, const std::vector<std::int64_t>& signal,
    std::int64_t chunk, std::int64_t total_bins, SimulationStats& stats) {
  std::vector<std::int64_t> out;
  const std::int64_t begin = chunk * kChunkBins;
  const std::int64_t end = std::min(total_bins, begin + kChunkBins);
  double p_max = 0.0;
  for (const auto& k : kernels) p_max = std::max(p_max, k.p_max);
  if (p_max <= 0.0) return out;
  auto rng = chunk_rng(c.seed, chunk, 1);
  const double log1m = p_max >= 1.0 ? -std::numeric_limits<double>::infinity()
                                    : std::log1p(-p_max);
  std::size_t segment = 0;
  std::int64_t widest = 0;
  for (const auto& k : kernels) widest = std::max(widest, k.half_width);
  // Candidates only move forward, so the first signal click that can reach
  // them only moves forward too.
  auto window = static_cast<std::size_t>(
      std::lower_bound(signal.begin(), signal.end(), begin - widest) - signal.begin());
  for (std::int64_t j = begin + geometric_skip(rng, log1m); j < end;
       j += 1 + geometric_skip(rng, log1m)) {
    while (segment + 1 < segments.size() && j >= segments[segment].end) ++segment;
    const Kernel& kernel = kernels[segment];
    const std::int64_t lo = j - kernel.half_width;
    const std::int64_t hi = j + kernel.half_width;
    while (window < signal.size() && signal[window] < lo) ++window;
    double modulation = 1.0 - kernel.mean_shift;
    for (std::size_t i = window; i < signal.size() && signal[i] <= hi; ++i) {
      modulation += kernel.weights[static_cast<std::size_t>(signal[i] - lo)];
    }
    double prob = p.b_dark + p.b_signal * modulation;
    ++stats.candidates;
    if (prob < 0.0 || prob > p_max) {
      ++stats.clipped;
      prob = std::clamp(prob, 0.0, p_max);
    }
    if (uniform01(rng) * p_max <= prob && prob > 0.0) out.push_back(j);
  }
  return out;
}

template <typename Fn>
void for_each_chunk(std::int64_t chunks, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(
      std::min<std::int64_t>(threads, std::max<std::int64_t>(chunks, 1)));
  if (threads <= 1) {
    for (std::int64_t i = 0; i < chunks; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::int64_t i = t; i < chunks; i += threads) fn(i);
    });
  }
  for (auto& worker : pool) worker.join();
}

std::int64_t to_ps(double seconds) {
  return static_cast<std::int64_t>(std::llround(seconds * 1e12));
}

}  // namespace

std::int64_t StreamConfig::bin_width_ps() const { return to_ps(bin_width); }

std::int64_t StreamConfig::duration_ps() const { return to_ps(duration); }

void StreamConfig::validate() const {
  if (!(bin_width > 0.0) || bin_width_ps() <= 0) {
    throw DomainError("bin width must be at least 1 ps");
  }
  if (!(duration >= 0.0) || !std::isfinite(duration)) {
    throw DomainError("duration must be finite and >= 0");
  }
  for (double r : {rate_a, rate_b, dark_a, dark_b}) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw DomainError("rates must be finite and >= 0");
    }
  }
  if (dark_a > rate_a || dark_b > rate_b) {
    throw DomainError("dark rate exceeds total singles rate");
  }
  if (rate_a * bin_width >= kMaxClickProbability ||
      rate_b * bin_width >= kMaxClickProbability) {
    throw DomainError(fmt::format(
        "rate x bin width must stay below {} (got {:.4g}, {:.4g})",
        kMaxClickProbability, rate_a * bin_width, rate_b * bin_width));
  }
  model.validate();
  if (model.epsilon > 0.0) {
    if (rate_a - dark_a <= 0.0 || rate_b - dark_b <= 0.0) {
      throw DomainError("a correlated model needs non-zero signal rates");
    }
    if (model.kind == G2ModelKind::tau) {
      if (!(model.gamma > 0.0)) {
        throw DomainError("tau model synthesis needs a linewidth gamma > 0");
      }
      if (5.0 / (model.gamma * bin_width) > kMaxKernelHalfWidth) {
        throw DomainError("correlation kernel longer than 1e7 bins");
      }
    }
  }
  if (!schedule.empty()) {
    std::int64_t total = 0;
    for (const auto& step : schedule) {
      if (!(step.dwell > 0.0) || !std::isfinite(step.t_delay)) {
        throw DomainError("schedule steps need finite delay and dwell > 0");
      }
      total += std::llround(step.dwell / bin_width);
    }
    if (total != duration_ps() / bin_width_ps()) {
      throw DomainError(fmt::format(
          "schedule covers {} bins but the duration has {}", total,
          duration_ps() / bin_width_ps()));
    }
  }
  // Single-bin kernels must give probabilities in [0, 1] exactly.
  const double pa = rate_a * bin_width;
  const double pas = (rate_a - dark_a) * bin_width;
  const double pb = rate_b * bin_width;
  const double pbs = (rate_b - dark_b) * bin_width;
  if (model.kind == G2ModelKind::delay && model.epsilon > 0.0) {
    const double w = 0.5 * model.epsilon * pa * pb / (pas * pbs * (1.0 - pas));
    if (1.0 - (1.0 - pas) * w < 0.0 || (pb - pbs) + pbs * (1.0 + (1.0 - pas) * w) > 1.0) {
      throw DomainError("visibility too large for the signal/dark split");
    }
  }
}

std::vector<TdcRecord> TdcStream::records() const {
  std::vector<TdcRecord> out;
  out.reserve(size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i] <= b[j])) {
      out.push_back({Channel::A, a[i++]});
    } else {
      out.push_back({Channel::B, b[j++]});
    }
  }
  return out;
}

TdcStream simulate_stream(const StreamConfig& config, SimulationStats* stats) {
  config.validate();
  TdcStream stream;
  stream.bin_width_ps = config.bin_width_ps();
  stream.duration_ps = config.duration_ps();
  stream.seed = config.seed;
  const std::int64_t bins = stream.duration_ps / stream.bin_width_ps;
  const auto segments = segment_bins(config, bins);
  for (const auto& s : segments) {
    stream.segments.push_back({s.t_delay, s.begin * stream.bin_width_ps,
                               s.end * stream.bin_width_ps});
  }
  if (bins == 0) return stream;

  const double w = config.bin_width;
  const Probabilities p{config.rate_a * w, config.rate_b * w,
                        (config.rate_a - config.dark_a) * w,
                        (config.rate_b - config.dark_b) * w, config.dark_b * w};

  std::vector<Kernel> kernels;
  for (const auto& s : segments) {
    if (config.model.kind == G2ModelKind::tau && !kernels.empty()) {
      kernels.push_back(kernels.front());
    } else {
      kernels.push_back(build_kernel(config, p, s.t_delay));
    }
  }

  const std::int64_t chunks = (bins + kChunkBins - 1) / kChunkBins;
  std::vector<ChunkClicks> a_chunks(static_cast<std::size_t>(chunks));
  for_each_chunk(chunks, config.threads, [&](std::int64_t i) {
    a_chunks[static_cast<std::size_t>(i)] = draw_a_chunk(config, p, i, bins);
  });
  std::vector<std::int64_t> a_bins;
  std::vector<std::int64_t> signal;
  for (auto& chunk : a_chunks) {
    a_bins.insert(a_bins.end(), chunk.bins.begin(), chunk.bins.end());
    signal.insert(signal.end(), chunk.signal_bins.begin(), chunk.signal_bins.end());
    chunk = {};
  }

  std::vector<std::vector<std::int64_t>> b_chunks(static_cast<std::size_t>(chunks));
  std::vector<SimulationStats> chunk_stats(static_cast<std::size_t>(chunks));
  for_each_chunk(chunks, config.threads, [&](std::int64_t i) {
    const auto idx = static_cast<std::size_t>(i);
    b_chunks[idx] = draw_b_chunk(config, p, segments, kernels, signal, i, bins,
                                 chunk_stats[idx]);
  });

  stream.a.reserve(a_bins.size());
  for (auto bin : a_bins) stream.a.push_back(bin * stream.bin_width_ps);
  SimulationStats total;
  for (std::size_t i = 0; i < b_chunks.size(); ++i) {
    for (auto bin : b_chunks[i]) stream.b.push_back(bin * stream.bin_width_ps);
    total.candidates += chunk_stats[i].candidates;
    total.clipped += chunk_stats[i].clipped;
  }
  if (stats) *stats = total;
  return stream;
}

void write_stream(const TdcStream& stream, const std::filesystem::path& path,
                  StreamFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  std::string buffer;
  buffer.reserve(1 << 20);
  auto flush = [&] {
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    buffer.clear();
  };
  if (format == StreamFormat::text) {
    fmt::format_to(std::back_inserter(buffer), "#binwidth_ps={}\n#duration_ps={}\n#seed={}\n",
                   stream.bin_width_ps, stream.duration_ps, stream.seed);
    for (const auto& s : stream.segments) {
      fmt::format_to(std::back_inserter(buffer), "#segment={} {} {}\n", s.t_delay,
                     s.start_ps, s.end_ps);
    }
    char digits[24];
    for (const auto& r : stream.records()) {
      buffer.push_back(r.channel == Channel::A ? 'A' : 'B');
      buffer.push_back(' ');
      auto [end, ec] = std::to_chars(digits, digits + sizeof digits, r.timestamp_ps);
      buffer.append(digits, end);
      buffer.push_back('\n');
      if (buffer.size() > (1 << 20)) flush();
    }
  } else {
    // Header: bin width, duration, seed, segment count, then per segment
    // the delay as IEEE-754 bits and its bounds.
    buffer.append(kBinaryMagic);
    put_u64(buffer, static_cast<std::uint64_t>(stream.bin_width_ps));
    put_u64(buffer, static_cast<std::uint64_t>(stream.duration_ps));
    put_u64(buffer, stream.seed);
    put_u64(buffer, stream.segments.size());
    for (const auto& seg : stream.segments) {
      put_u64(buffer, std::bit_cast<std::uint64_t>(seg.t_delay));
      put_u64(buffer, static_cast<std::uint64_t>(seg.start_ps));
      put_u64(buffer, static_cast<std::uint64_t>(seg.end_ps));
    }
    for (const auto& r : stream.records()) {
      buffer.push_back(static_cast<char>(r.channel));
      put_u64(buffer, static_cast<std::uint64_t>(r.timestamp_ps));
      if (buffer.size() > (1 << 20)) flush();
    }
  }
  flush();
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

namespace {

void append_record(TdcStream& stream, Channel channel, std::int64_t timestamp,
                   const std::string& where) {
  if (timestamp < 0) throw FormatError(fmt::format("{}: negative timestamp", where));
  if (stream.duration_ps > 0 && timestamp >= stream.duration_ps) {
    throw FormatError(fmt::format("{}: timestamp {} beyond duration {}", where,
                                  timestamp, stream.duration_ps));
  }
  auto& list = channel == Channel::A ? stream.a : stream.b;
  if (!list.empty() && timestamp < list.back()) {
    throw FormatError(fmt::format("{}: timestamps of channel {} go backwards",
                                  where, channel == Channel::A ? 'A' : 'B'));
  }
  list.push_back(timestamp);
}

template <typename T>
bool parse_number(std::string_view text, T& value) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

bool parse_double(std::string_view text, double& value) {
  // from_chars for double is unavailable on some toolchains.
  std::string copy(text);
  char* end = nullptr;
  value = std::strtod(copy.c_str(), &end);
  return !copy.empty() && end == copy.c_str() + copy.size();
}

}  // namespace

TdcStream parse_stream_text(std::string_view text) {
  TdcStream stream;
  bool have_width = false;
  bool have_duration = false;
  bool have_seed = false;
  bool in_records = false;
  std::size_t offset = 0;
  std::size_t line_no = 0;
  while (offset < text.size()) {
    ++line_no;
    const auto newline = text.find('\n', offset);
    if (newline == std::string_view::npos) {
      throw FormatError(fmt::format(
          "line {}: truncated record at byte offset {}", line_no, offset));
    }
    std::string_view line = text.substr(offset, newline - offset);
    const auto where = fmt::format("line {} (byte offset {})", line_no, offset);
    offset = newline + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (in_records) throw FormatError(fmt::format("{}: header after records", where));
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw FormatError(fmt::format("{}: header line without '='", where));
      }
      const auto key = line.substr(1, eq - 1);
      const auto value = line.substr(eq + 1);
      bool ok = false;
      if (key == "binwidth_ps") {
        ok = parse_number(value, stream.bin_width_ps) && stream.bin_width_ps > 0;
        have_width = true;
      } else if (key == "duration_ps") {
        ok = parse_number(value, stream.duration_ps) && stream.duration_ps >= 0;
        have_duration = true;
      } else if (key == "seed") {
        ok = parse_number(value, stream.seed);
        have_seed = true;
      } else if (key == "segment") {
        const auto s1 = value.find(' ');
        const auto s2 = s1 == std::string_view::npos ? s1 : value.find(' ', s1 + 1);
        StreamSegment seg;
        ok = s2 != std::string_view::npos &&
             parse_double(value.substr(0, s1), seg.t_delay) &&
             parse_number(value.substr(s1 + 1, s2 - s1 - 1), seg.start_ps) &&
             parse_number(value.substr(s2 + 1), seg.end_ps) &&
             seg.start_ps <= seg.end_ps;
        if (ok) stream.segments.push_back(seg);
      } else {
        throw FormatError(fmt::format("{}: unknown header '{}'", where, key));
      }
      if (!ok) throw FormatError(fmt::format("{}: bad value for '{}'", where, key));
      continue;
    }
    if (!in_records) {
      if (!have_width || !have_duration || !have_seed) {
        throw FormatError(fmt::format(
            "{}: record before the binwidth_ps/duration_ps/seed header", where));
      }
      in_records = true;
    }
    if (line.size() < 3 || (line[0] != 'A' && line[0] != 'B') || line[1] != ' ') {
      throw FormatError(fmt::format("{}: expected '<A|B> <timestamp_ps>'", where));
    }
    std::int64_t timestamp = 0;
    if (!parse_number(line.substr(2), timestamp)) {
      throw FormatError(fmt::format("{}: bad timestamp '{}'", where, line.substr(2)));
    }
    append_record(stream, line[0] == 'A' ? Channel::A : Channel::B, timestamp, where);
  }
  if (!have_width || !have_duration || !have_seed) {
    throw FormatError("stream header incomplete: need binwidth_ps, duration_ps and seed");
  }
  return stream;
}

TdcStream parse_stream_binary(std::string_view bytes) {
  if (!bytes.starts_with(kBinaryMagic)) {
    throw FormatError("binary stream does not start with TDC1 magic");
  }
  TdcStream stream;
  std::size_t offset = kBinaryMagic.size();
  const auto header_field = [&](std::string_view name) {
    if (bytes.size() - offset < 8) {
      throw FormatError(fmt::format("header truncated at byte offset {} ({})", offset, name));
    }
    const auto v = get_u64(bytes, offset);
    offset += 8;
    return v;
  };
  const auto as_signed = [](std::uint64_t v, std::string_view name) {
    if (v > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      throw FormatError(fmt::format("header field {} out of range", name));
    }
    return static_cast<std::int64_t>(v);
  };
  stream.bin_width_ps = as_signed(header_field("binwidth_ps"), "binwidth_ps");
  stream.duration_ps = as_signed(header_field("duration_ps"), "duration_ps");
  stream.seed = header_field("seed");
  const auto n_segments = header_field("segment count");
  if (n_segments > (bytes.size() - offset) / 24) {
    throw FormatError(fmt::format("segment table of {} entries truncated at byte offset {}",
                                  n_segments, offset));
  }
  for (std::uint64_t k = 0; k < n_segments; ++k) {
    StreamSegment seg;
    seg.t_delay = std::bit_cast<double>(header_field("segment delay"));
    seg.start_ps = as_signed(header_field("segment start"), "segment start");
    seg.end_ps = as_signed(header_field("segment end"), "segment end");
    stream.segments.push_back(seg);
  }
  constexpr std::size_t kRecord = 9;
  std::size_t index = 0;
  while (offset < bytes.size()) {
    if (bytes.size() - offset < kRecord) {
      throw FormatError(fmt::format("record {}: truncated record at byte offset {}",
                                    index, offset));
    }
    const auto channel = static_cast<std::uint8_t>(bytes[offset]);
    if (channel > 1) {
      throw FormatError(fmt::format("record {} (byte offset {}): channel {} not 0/1",
                                    index, offset, channel));
    }
    const std::uint64_t ts = get_u64(bytes, offset + 1);
    if (ts > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      throw FormatError(fmt::format("record {}: timestamp overflows", index));
    }
    append_record(stream, static_cast<Channel>(channel), static_cast<std::int64_t>(ts),
                  fmt::format("record {} (byte offset {})", index, offset));
    offset += kRecord;
    ++index;
  }
  return stream;
}

TdcStream read_stream(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(fmt::format("read of '{}' failed", path.string()));
  try {
    if (std::string_view(bytes).starts_with(kBinaryMagic)) return parse_stream_binary(bytes);
    return parse_stream_text(bytes);
  } catch (const FormatError& e) {
    throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace chbt
