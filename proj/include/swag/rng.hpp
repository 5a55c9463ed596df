/*
 * Copyright 2026 The Swagkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace swag {

// Counter-style RNG built on the SplitMix64 finalizer. Every consumer keys
// its own stream with (seed, stream), so draws are reproducible bit-for-bit
// regardless of evaluation order or parallelism. Not cryptographic.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// Namespaces stream indices by purpose so that e.g. posterior draw 0 and
// weight-init never read the same underlying sequence for one seed.
inline constexpr std::uint64_t stream_tag(std::uint64_t purpose, std::uint64_t index) {
  return (purpose << 56) | (index & 0x00FFFFFFFFFFFFFFull);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : state_(splitmix64_mix(splitmix64_mix(seed + kGolden) ^
                              splitmix64_mix(stream + 0x853C49E6748FEA9Bull))) {}

  std::uint64_t next_u64() noexcept {
    state_ += kGolden;
    return splitmix64_mix(state_);
  }

  // Uniform in (0, 1]; never 0 so it is safe under log().
  double uniform01() noexcept {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform01();
  }

  // Standard normal via Box-Muller (cosine branch only; stateless per call).
  double normal() noexcept {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

  // Unbiased integer in [0, n) by rejection.
  std::uint64_t next_below(std::uint64_t n) noexcept {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& v) noexcept {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// Stream purposes used across the toolkit.
inline constexpr std::uint64_t kStreamPosteriorDraw = 0;  // index = draw_index
inline constexpr std::uint64_t kStreamParamInit = 1;
inline constexpr std::uint64_t kStreamEpochShuffle = 2;  // index = epoch
inline constexpr std::uint64_t kStreamSynthData = 3;

}  // namespace swag
