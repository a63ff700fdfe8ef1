// Copyright 2026 The privaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Deterministic randomness. Every random decision in the toolkit is drawn
// from a counter-based SplitMix-style 64-bit generator whose key is derived
// from (seed, label, index). Sub-streams are independent of execution order
// and of the parallelism degree, so any experiment replays bit-for-bit.
//
// Draw orders are part of the reproducibility contract:
//   * uniform():  next_u64() >> 11, scaled by 2^-53, in [0, 1).
//   * gaussian(): Box-Muller on (u1, u2) with u1 in (0, 1]; the cosine
//     variate is returned first, the sine variate is cached and returned
//     on the following call.
//   * permutation(): Fisher-Yates from the top index down, one bounded
//     draw per swap.

#ifndef PRIVAUDIT_RNG_HPP
#define PRIVAUDIT_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

namespace privaudit::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// SplitMix64 output mixing function.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

// Key for the sub-stream (seed, label, index). Labels are stable component
// names ("init", "perm", "dpnoise", ...); indices separate repeated draws
// (epoch number, sample number, ...).
inline std::uint64_t derive_key(std::uint64_t seed, std::string_view label,
                                std::uint64_t index = 0) {
  std::uint64_t k = mix64(seed ^ fnv1a64(label));
  return mix64(k + (index + 1) * kGolden);
}

class Stream {
 public:
  explicit Stream(std::uint64_t key) : state_(key) {}

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix64(state_);
  }

  // Uniform in [0, 1), 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in (0, 1]; safe as a logarithm argument.
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  double uniform_range(double lo, double hi) {
    return lo + (hi - lo) * uniform();
  }

  // Standard normal via Box-Muller; variates are consumed in pairs.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Unbiased-enough bounded draw via 128-bit multiply.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Fisher-Yates permutation of {0, ..., n-1}.
  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(p[i - 1], p[j]);
    }
    return p;
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline Stream stream(std::uint64_t seed, std::string_view label,
                     std::uint64_t index = 0) {
  return Stream(derive_key(seed, label, index));
}

}  // namespace privaudit::rng

#endif  // PRIVAUDIT_RNG_HPP
