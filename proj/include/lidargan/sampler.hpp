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

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "lidargan/error.hpp"
#include "lidargan/rng.hpp"

namespace lidargan {

/// Draws unpaired batches from two frame pools.
///
/// Each domain owns its own child stream of CounterRng(seed); call k draws
/// from the grandchild stream split(k), uniformly with replacement. The
/// output of a call is therefore a pure function of (seed, k) and the two
/// domains never share draws. Single owner: not thread safe.
template <typename Handle>
class UnpairedSampler {
 public:
  using Batch = std::pair<std::vector<Handle>, std::vector<Handle>>;

  UnpairedSampler(std::vector<Handle> domain_x, std::vector<Handle> domain_y, std::uint64_t seed,
                  std::size_t batch_size)
      : domain_x_(std::move(domain_x)),
        domain_y_(std::move(domain_y)),
        seed_(seed),
        batch_size_(batch_size),
        stream_x_(CounterRng(seed).split("domain-x")),
        stream_y_(CounterRng(seed).split("domain-y")) {
    if (domain_x_.empty() || domain_y_.empty()) {
      throw ConfigError("sampler: both domains must be non-empty");
    }
    if (batch_size_ == 0) throw ConfigError("sampler: batch size must be positive");
  }

  Batch sample_batch() {
    Batch out{draw(stream_x_, domain_x_), draw(stream_y_, domain_y_)};
    ++calls_;
    return out;
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t batch_size() const noexcept { return batch_size_; }
  std::uint64_t calls() const noexcept { return calls_; }
  const std::vector<Handle>& domain_x() const noexcept { return domain_x_; }
  const std::vector<Handle>& domain_y() const noexcept { return domain_y_; }

 private:
  std::vector<Handle> draw(const CounterRng& stream, const std::vector<Handle>& pool) const {
    CounterRng rng = stream.split(calls_);
    std::vector<Handle> out;
    out.reserve(batch_size_);
    for (std::size_t i = 0; i < batch_size_; ++i) out.push_back(pool[rng.uniform_index(pool.size())]);
    return out;
  }

  std::vector<Handle> domain_x_;
  std::vector<Handle> domain_y_;
  std::uint64_t seed_;
  std::size_t batch_size_;
  CounterRng stream_x_;
  CounterRng stream_y_;
  std::uint64_t calls_ = 0;
};

}  // namespace lidargan
