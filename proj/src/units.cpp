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

#include "chbt/units.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "chbt/error.hpp"
#include "chbt/optics.hpp"

namespace chbt {

namespace {

using UnitTable = std::array<std::pair<std::string_view, double>, 6>;

constexpr UnitTable kLength{{{"nm", 1e-9}, {"um", 1e-6}, {"mm", 1e-3}, {"m", 1.0},
                             {"", 0.0}, {"", 0.0}}};
constexpr UnitTable kTime{{{"fs", 1e-15}, {"ps", 1e-12}, {"ns", 1e-9},
                           {"us", 1e-6}, {"ms", 1e-3}, {"s", 1.0}}};
constexpr UnitTable kFrequency{{{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6},
                                {"GHz", 1e9}, {"THz", 1e12}, {"", 0.0}}};
constexpr UnitTable kAngle{{{"rad", 1.0}, {"", 0.0}, {"", 0.0}, {"", 0.0},
                            {"", 0.0}, {"", 0.0}}};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

const UnitTable& table(Dimension d) {
  switch (d) {
    case Dimension::length: return kLength;
    case Dimension::time: return kTime;
    case Dimension::frequency: return kFrequency;
    case Dimension::angle: return kAngle;
  }
  return kLength;
}

std::string unit_list(Dimension d) {
  std::string out;
  for (const auto& [name, factor] : table(d)) {
    if (name.empty()) continue;
    if (!out.empty()) out += ", ";
    out += name;
  }
  if (d == Dimension::angle) out += ", pi:<x>";
  return out;
}

}  // namespace

std::string_view to_string(Dimension dimension) {
  switch (dimension) {
    case Dimension::length: return "length";
    case Dimension::time: return "time";
    case Dimension::frequency: return "frequency";
    case Dimension::angle: return "angle";
  }
  return "length";
}

double parse_number(std::string_view text) {
  const auto s = trim(text);
  double value = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (s.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw DomainError(fmt::format("'{}' is not a number", text));
  }
  return value;
}

unsigned long long parse_unsigned(std::string_view text) {
  const auto s = trim(text);
  unsigned long long value = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (s.empty() || ec != std::errc{} || ptr != end) {
    throw DomainError(fmt::format("'{}' is not a non-negative integer", text));
  }
  return value;
}

bool parse_bool(std::string_view text) {
  const auto s = trim(text);
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw DomainError(fmt::format("'{}' is not a boolean", text));
}

double parse_quantity(std::string_view text, Dimension dimension) {
  const auto s = trim(text);
  if (dimension == Dimension::angle && s.substr(0, 3) == "pi:") {
    return kPi * parse_number(s.substr(3));
  }
  // Split at the first character that can start a unit.
  std::size_t split = s.size();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    const bool exponent = (c == 'e' || c == 'E') && i > 0 && i + 1 < s.size() &&
                          (std::isdigit(static_cast<unsigned char>(s[i + 1])) ||
                           s[i + 1] == '-' || s[i + 1] == '+');
    if (std::isalpha(static_cast<unsigned char>(c)) && !exponent) {
      split = i;
      break;
    }
  }
  const auto unit = trim(s.substr(split));
  if (unit.empty()) {
    throw DomainError(fmt::format("'{}' lacks a {} unit (one of {})", text,
                                  to_string(dimension), unit_list(dimension)));
  }
  for (const auto& [name, factor] : table(dimension)) {
    if (!name.empty() && name == unit) {
      double value = 0.0;
      try {
        value = parse_number(s.substr(0, split));
      } catch (const DomainError&) {
        throw DomainError(fmt::format("'{}' does not start with a number", text));
      }
      return value * factor;
    }
  }
  throw DomainError(fmt::format("'{}': unit '{}' is not a {} unit (one of {})",
                                text, unit, to_string(dimension),
                                unit_list(dimension)));
}

std::string format_frequency(double hz) {
  const double a = std::abs(hz);
  if (a >= 1e12) return fmt::format("{:.6g} THz", hz / 1e12);
  if (a >= 1e9) return fmt::format("{:.6g} GHz", hz / 1e9);
  if (a >= 1e6) return fmt::format("{:.6g} MHz", hz / 1e6);
  if (a >= 1e3) return fmt::format("{:.6g} kHz", hz / 1e3);
  return fmt::format("{:.6g} Hz", hz);
}

}  // namespace chbt
