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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lidargan/branch.hpp"
#include "lidargan/error.hpp"
#include "lidargan/tensor.hpp"

namespace lidargan {

/// Generator objective against a critic. kSaturating minimizes
/// E[log(1 - D(fake))] literally; kNonSaturating minimizes -E[log D(fake)].
enum class GenLossMode { kSaturating, kNonSaturating };

namespace detail {

template <typename A, typename B>
double mean_abs_difference(std::span<const A> a, std::span<const B> b) {
  if (a.size() != b.size()) throw ShapeError("mean_abs_difference: size mismatch");
  if (a.empty()) throw ShapeError("mean_abs_difference: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += std::abs(d);
    record_branch(static_cast<std::uint64_t>((d > 0.0) - (d < 0.0) + 1));
  }
  return sum / static_cast<double>(a.size());
}

inline void require_open_unit(std::span<const double> p, const char* who) {
  for (double v : p) {
    if (!(v > 0.0 && v < 1.0)) {
      throw NumericFault(std::string(who) + ": probability " + std::to_string(v) +
                         " is not strictly inside (0, 1); clamp first");
    }
  }
}

inline double mean_log(std::span<const double> p) {
  double s = 0.0;
  for (double v : p) s += std::log(v);
  return s / static_cast<double>(p.size());
}

inline double mean_log1m(std::span<const double> p) {
  double s = 0.0;
  for (double v : p) s += std::log1p(-v);
  return s / static_cast<double>(p.size());
}

}  // namespace detail

/// Clamps probabilities into [eps, 1 - eps]. Returns a 0/1 mask of the
/// entries left untouched; gradients of clamped entries are zero.
inline Tensor clamp_probabilities(Tensor& p, double eps) {
  Tensor mask(p.shape(), 1.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < eps) {
      p[i] = eps;
      mask[i] = 0.0;
      detail::record_branch(0);
    } else if (p[i] > 1.0 - eps) {
      p[i] = 1.0 - eps;
      mask[i] = 0.0;
      detail::record_branch(2);
    } else {
      detail::record_branch(1);
    }
  }
  return mask;
}

/// -E[log D(real)] - E[log(1 - D(fake))], optionally with its gradients.
inline double discriminator_loss(const Tensor& d_real, const Tensor& d_fake, Tensor* grad_real = nullptr,
                                 Tensor* grad_fake = nullptr) {
  detail::require_open_unit(d_real.data(), "discriminator_loss");
  detail::require_open_unit(d_fake.data(), "discriminator_loss");
  if (grad_real) {
    *grad_real = Tensor(d_real.shape());
    const double n = static_cast<double>(d_real.size());
    for (std::size_t i = 0; i < d_real.size(); ++i) (*grad_real)[i] = -1.0 / (d_real[i] * n);
  }
  if (grad_fake) {
    *grad_fake = Tensor(d_fake.shape());
    const double n = static_cast<double>(d_fake.size());
    for (std::size_t i = 0; i < d_fake.size(); ++i) (*grad_fake)[i] = 1.0 / ((1.0 - d_fake[i]) * n);
  }
  return -detail::mean_log(d_real.data()) - detail::mean_log1m(d_fake.data());
}

inline double generator_adversarial_loss(const Tensor& d_fake, GenLossMode mode, Tensor* grad = nullptr) {
  detail::require_open_unit(d_fake.data(), "generator_adversarial_loss");
  const double n = static_cast<double>(d_fake.size());
  if (grad) *grad = Tensor(d_fake.shape());
  if (mode == GenLossMode::kSaturating) {
    if (grad) {
      for (std::size_t i = 0; i < d_fake.size(); ++i) (*grad)[i] = -1.0 / ((1.0 - d_fake[i]) * n);
    }
    return detail::mean_log1m(d_fake.data());
  }
  if (grad) {
    for (std::size_t i = 0; i < d_fake.size(); ++i) (*grad)[i] = -1.0 / (d_fake[i] * n);
  }
  return -detail::mean_log(d_fake.data());
}

struct AdversarialLoss {
  double d_loss = 0.0;
  double g_loss = 0.0;
};

/// Both sides of the adversarial game on already-clamped critic outputs.
/// Means run over batch and patches.
inline AdversarialLoss adversarial_loss(const Tensor& d_real, const Tensor& d_fake, GenLossMode mode) {
  return {discriminator_loss(d_real, d_fake), generator_adversarial_loss(d_fake, mode)};
}

/// Mean absolute difference between a grid batch and its reconstruction.
inline double cycle_loss(const Tensor& original, const Tensor& reconstructed) {
  original.require_same_shape(reconstructed, "cycle_loss");
  return detail::mean_abs_difference(original.data(), reconstructed.data());
}

/// d cycle_loss / d reconstructed; the subgradient at zero difference is 0.
inline Tensor cycle_loss_grad(const Tensor& original, const Tensor& reconstructed) {
  original.require_same_shape(reconstructed, "cycle_loss_grad");
  Tensor g(reconstructed.shape());
  const double inv_n = 1.0 / static_cast<double>(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = reconstructed[i] - original[i];
    g[i] = d > 0.0 ? inv_n : (d < 0.0 ? -inv_n : 0.0);
  }
  return g;
}

/// adv_G + adv_F + lambda * (cyc_Y + cyc_X).
inline double total_loss(double adv_g, double adv_f, double cyc_y, double cyc_x, double lambda_cyc) {
  return adv_g + adv_f + lambda_cyc * (cyc_y + cyc_x);
}

/// Mean of squared elementwise differences; `grad` receives d/d(prediction).
inline double mean_squared_error(const Tensor& prediction, const Tensor& target, Tensor* grad = nullptr) {
  prediction.require_same_shape(target, "mean_squared_error");
  if (prediction.size() == 0) throw ShapeError("mean_squared_error: empty input");
  const double n = static_cast<double>(prediction.size());
  double sum = 0.0;
  if (grad) *grad = Tensor(prediction.shape());
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const double d = prediction[i] - target[i];
    sum += d * d;
    if (grad) (*grad)[i] = 2.0 * d / n;
  }
  return sum / n;
}

}  // namespace lidargan
