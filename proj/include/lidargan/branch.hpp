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

namespace lidargan::detail {

/// Running hash of the branch taken by every piecewise-smooth operation
/// (ReLU side, sign of an absolute difference, clamp). Two evaluations with
/// equal hashes ran through the same smooth piece. Recording is off unless
/// a BranchScope is live on the current thread.
class BranchTrace {
 public:
  void add(std::uint64_t branch) noexcept {
    hash_ ^= branch + 0x9E3779B97F4A7C15ULL + (hash_ << 6) + (hash_ >> 2);
  }
  std::uint64_t hash() const noexcept { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

inline BranchTrace*& active_branch_trace() noexcept {
  thread_local BranchTrace* trace = nullptr;
  return trace;
}

inline void record_branch(std::uint64_t branch) noexcept {
  if (BranchTrace* t = active_branch_trace()) t->add(branch);
}

class BranchScope {
 public:
  explicit BranchScope(BranchTrace& trace) noexcept : previous_(active_branch_trace()) {
    active_branch_trace() = &trace;
  }
  ~BranchScope() { active_branch_trace() = previous_; }
  BranchScope(const BranchScope&) = delete;
  BranchScope& operator=(const BranchScope&) = delete;

 private:
  BranchTrace* previous_;
};

}  // namespace lidargan::detail
