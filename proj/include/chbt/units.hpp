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

// Strict parsing of physical quantities with unit suffixes.

#include <string>
#include <string_view>

namespace chbt {

enum class Dimension { length, time, frequency, angle };

std::string_view to_string(Dimension dimension);

/// "<number> <unit>" (the space is optional) converted to SI. Units:
///   length     nm um mm m
///   time       fs ps ns us ms s
///   frequency  Hz kHz MHz GHz THz
///   angle      rad, or "pi:<x>" for x * pi
/// Throws DomainError naming the text on anything else.
double parse_quantity(std::string_view text, Dimension dimension);

/// A bare real number with nothing after it.
double parse_number(std::string_view text);

/// Unsigned integer, decimal.
unsigned long long parse_unsigned(std::string_view text);

/// true/false, yes/no, on/off, 1/0.
bool parse_bool(std::string_view text);

/// Value with an SI prefix picked for readability, e.g. "281.654 THz".
std::string format_frequency(double hz);

}  // namespace chbt
