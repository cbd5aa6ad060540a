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

#include <memory>
#include <string>
#include <vector>

#include "lidargan/layers.hpp"
#include "lidargan/network.hpp"
#include "lidargan/rng.hpp"

namespace lidargan {

/// Translator: 7x7 stem, two stride-2 downsamples, two residual blocks,
/// two upsample+conv stages and a 7x7 tanh head. Reflection padding
/// throughout; convolutions feeding an instance norm carry no bias.
/// Spatial dims must be divisible by 4.
inline Network make_generator(const std::string& name, std::size_t base_channels, CounterRng rng,
                              std::size_t channels = 1) {
  const std::size_t b = base_channels;
  Network net(name, channels);
  auto conv_norm_relu = [&](std::size_t in, std::size_t out, std::size_t k, std::size_t stride) {
    net.emplace<Conv2d>(in, out, k, stride, Padding::kReflect, false, rng);
    net.emplace<InstanceNorm>(out);
    net.emplace<ReLU>();
  };
  conv_norm_relu(channels, b, 7, 1);
  conv_norm_relu(b, 2 * b, 3, 2);
  conv_norm_relu(2 * b, 4 * b, 3, 2);
  for (int i = 0; i < 2; ++i) {
    std::vector<std::unique_ptr<Layer>> body;
    body.push_back(std::make_unique<Conv2d>(4 * b, 4 * b, 3, 1, Padding::kReflect, false, rng));
    body.push_back(std::make_unique<InstanceNorm>(4 * b));
    body.push_back(std::make_unique<ReLU>());
    body.push_back(std::make_unique<Conv2d>(4 * b, 4 * b, 3, 1, Padding::kReflect, false, rng));
    body.push_back(std::make_unique<InstanceNorm>(4 * b));
    net.emplace<Residual>(std::move(body));
  }
  net.emplace<Upsample2x>();
  conv_norm_relu(4 * b, 2 * b, 3, 1);
  net.emplace<Upsample2x>();
  conv_norm_relu(2 * b, b, 3, 1);
  net.emplace<Conv2d>(b, channels, 7, 1, Padding::kReflect, true, rng);
  net.emplace<Tanh>();
  return net;
}

/// Patch critic: three stride-2 convs with zero padding, sigmoid output.
/// An H x W input yields an (H/8) x (W/8) map of probabilities.
inline Network make_discriminator(const std::string& name, std::size_t base_channels, CounterRng rng,
                                  std::size_t channels = 1) {
  const std::size_t b = base_channels;
  Network net(name, channels);
  net.emplace<Conv2d>(channels, b, 3, 2, Padding::kZero, true, rng);
  net.emplace<LeakyReLU>();
  net.emplace<Conv2d>(b, 2 * b, 3, 2, Padding::kZero, false, rng);
  net.emplace<InstanceNorm>(2 * b);
  net.emplace<LeakyReLU>();
  net.emplace<Conv2d>(2 * b, 1, 3, 2, Padding::kZero, true, rng);
  net.emplace<Sigmoid>();
  return net;
}

/// Dense predictor mapping a grid to a same-size occupancy map in (0, 1).
inline Network make_reference_model(const std::string& name, std::size_t base_channels,
                                    CounterRng rng, std::size_t channels = 1) {
  const std::size_t b = base_channels;
  Network net(name, channels);
  net.emplace<Conv2d>(channels, b, 3, 1, Padding::kReflect, true, rng);
  net.emplace<ReLU>();
  net.emplace<Conv2d>(b, b, 3, 1, Padding::kReflect, true, rng);
  net.emplace<ReLU>();
  net.emplace<Conv2d>(b, 1, 3, 1, Padding::kReflect, true, rng);
  net.emplace<Sigmoid>();
  return net;
}

/// Single 1x1 convolution with an identity kernel and no bias.
inline Network make_identity(const std::string& name, std::size_t channels = 1) {
  CounterRng rng(0);
  auto conv = std::make_unique<Conv2d>(channels, channels, 1, 1, Padding::kZero, false, rng);
  conv->weight().value.fill(0.0);
  for (std::size_t c = 0; c < channels; ++c) conv->weight().value[c * channels + c] = 1.0;
  Network net(name, channels);
  net.add(std::move(conv));
  return net;
}

}  // namespace lidargan
