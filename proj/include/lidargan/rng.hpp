// Copyright 2026 The LidarGAN Authors
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
#include <limits>
#include <string_view>

#include "lidargan/error.hpp"

namespace lidargan {

constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Counter-based 64-bit generator.
///
/// Draw number i (0-based) of a generator with key k is
///
///   mix64(k + (i + 1) * 0x9E3779B97F4A7C15)
///
/// where mix64 is the SplitMix64 finalizer (xor-shift 30/27/31 with the
/// multipliers 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB). Outputs depend
/// only on (key, index), so the stream is reproducible on any platform and
/// can be evaluated out of order with `at()`. `split()` derives an
/// independent child key; children of distinct stream ids do not overlap in
/// practice.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  constexpr explicit CounterRng(std::uint64_t seed = 0) noexcept : key_(mix64(seed)) {}

  static constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }

  constexpr std::uint64_t at(std::uint64_t index) const noexcept {
    return mix64(key_ + (index + 1) * kGamma);
  }

  constexpr result_type operator()() noexcept { return at(counter_++); }

  /// Skips `n` draws.
  constexpr void advance(std::uint64_t n) noexcept { counter_ += n; }

  constexpr CounterRng split(std::uint64_t stream) const noexcept {
    CounterRng child;
    child.key_ = mix64(key_ ^ mix64(stream + kGamma));
    return child;
  }

  /// Child stream keyed by a name (FNV-1a of the bytes).
  constexpr CounterRng split(std::string_view name) const noexcept { return split(fnv1a64(name)); }

  /// Uniform integer in [0, n) by rejection, no modulo bias.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw PreconditionError("uniform_index: empty range");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = (*this)();
      if (r >= threshold) return r % n;
    }
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace lidargan
