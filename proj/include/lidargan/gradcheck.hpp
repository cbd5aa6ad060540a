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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "lidargan/branch.hpp"
#include "lidargan/error.hpp"
#include "lidargan/layers.hpp"
#include "lidargan/rng.hpp"

namespace lidargan {

/// Objective under test. Returns the loss; when `backprop` is true it must
/// also accumulate dL/dtheta into every Param::grad.
using CheckedObjective = std::function<double(bool backprop)>;

inline constexpr double kRoundoffUlps = 8.0;

struct GradientCheckOptions {
  std::size_t samples_per_param = 64;
  std::uint64_t seed = 0;
};

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  double max_raw_relative_error = 0.0;  // before the two exemptions below
  std::size_t coordinates = 0;
  std::size_t below_resolution = 0;
  std::size_t kinks = 0;
};

/// Compares analytic gradients with central differences on a sampled
/// subset of coordinates (all of them for small params). Relative error is
/// |a - n| / max(|a|, |n|, 1e-8), with two exemptions:
///
///  - below resolution: |a - n| is under the rounding resolution of the
///    difference quotient, kRoundoffUlps * DBL_EPSILON * max(|L+|, |L-|) /
///    (2 * epsilon), and cannot be measured;
///  - kink: L+ or L- ran through a different branch of some piecewise
///    operation (ReLU side, sign inside |.|, probability clamp) than L did,
///    so the step straddles a non-differentiable point and the difference
///    quotient does not estimate the derivative.
///
/// Exempt coordinates score 0 and are counted. Gradients are left zeroed
/// on return.
inline GradientCheckResult gradient_check_detailed(const CheckedObjective& loss_fn,
                                                   std::span<Param* const> params, double epsilon,
                                                   const GradientCheckOptions& options = {}) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) {
    throw PreconditionError("gradient_check: epsilon must lie in [1e-7, 1e-3]");
  }
  auto evaluate = [&](bool backprop, std::uint64_t& branches) {
    detail::BranchTrace trace;
    double loss;
    {
      detail::BranchScope scope(trace);
      loss = loss_fn(backprop);
    }
    branches = trace.hash();
    return loss;
  };
  for (Param* p : params) p->grad.fill(0.0);
  std::uint64_t base_branches = 0, up_branches = 0, down_branches = 0;
  const double base = evaluate(true, base_branches);
  std::vector<Tensor> analytic;
  for (Param* p : params) {
    analytic.push_back(p->grad);
    p->grad.fill(0.0);
  }
  const double again = loss_fn(false);
  const double third = loss_fn(false);
  if (again != third || again != base) {
    throw NonDeterministicError("gradient_check: loss differs between identical evaluations");
  }

  GradientCheckResult result;
  CounterRng rng(options.seed);
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Param& p = *params[pi];
    std::vector<std::size_t> idx(p.value.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const std::size_t take = std::min(options.samples_per_param, idx.size());
    for (std::size_t i = 0; i < take; ++i) {
      std::swap(idx[i], idx[i + rng.uniform_index(idx.size() - i)]);
    }
    for (std::size_t s = 0; s < take; ++s) {
      const std::size_t i = idx[s];
      const double saved = p.value[i];
      p.value[i] = saved + epsilon;
      const double up = evaluate(false, up_branches);
      p.value[i] = saved - epsilon;
      const double down = evaluate(false, down_branches);
      p.value[i] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = analytic[pi][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double resolution = kRoundoffUlps * std::numeric_limits<double>::epsilon() *
                                std::max(std::abs(up), std::abs(down)) / (2.0 * epsilon);
      double rel = std::abs(a - numeric) / denom;
      result.max_raw_relative_error = std::max(result.max_raw_relative_error, rel);
      if (std::abs(a - numeric) <= resolution) {
        rel = 0.0;
        ++result.below_resolution;
      } else if (up_branches != base_branches || down_branches != base_branches) {
        rel = 0.0;
        ++result.kinks;
      }
      ++result.coordinates;
      if (!(rel <= result.max_relative_error)) {
        result.max_relative_error = rel;
        result.worst_param = p.name;
        result.worst_index = i;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  for (Param* p : params) p->grad.fill(0.0);
  return result;
}

inline double gradient_check(const CheckedObjective& loss_fn, std::span<Param* const> params,
                             double epsilon, const GradientCheckOptions& options = {}) {
  return gradient_check_detailed(loss_fn, params, epsilon, options).max_relative_error;
}

}  // namespace lidargan
