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

#include <cstdint>
#include <random>

namespace fbh {

inline constexpr uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Key of the substream identified by (seed, stream, index); independent of evaluation order.
inline constexpr uint64_t substream_key(uint64_t seed, uint64_t stream, uint64_t index) {
    return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
}

enum class StreamTag : uint64_t {
    experiment = 0x4558504552494D45ull,
    readout = 0x524541444F555421ull,
    jumps = 0x4A554D5053545245ull,
    scan_noise = 0x5343414E4E4F4953ull,
};

inline std::mt19937_64 substream(uint64_t seed, StreamTag tag, uint64_t index) {
    return std::mt19937_64(substream_key(seed, static_cast<uint64_t>(tag), index));
}

}  // namespace fbh
