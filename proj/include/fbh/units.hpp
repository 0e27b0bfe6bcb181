// Copyright 2026 The fbh Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <numbers>

namespace fbh {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kSpeedOfLight = 299792458.0;

// Ordinary frequency to angular frequency.
constexpr double hz(double v) { return kTwoPi * v; }
constexpr double khz(double v) { return kTwoPi * 1e3 * v; }
constexpr double mhz(double v) { return kTwoPi * 1e6 * v; }
constexpr double ghz(double v) { return kTwoPi * 1e9 * v; }
constexpr double thz(double v) { return kTwoPi * 1e12 * v; }

constexpr double to_ghz(double omega) { return omega / (kTwoPi * 1e9); }

constexpr double ns(double v) { return 1e-9 * v; }
constexpr double us(double v) { return 1e-6 * v; }

}  // namespace fbh
