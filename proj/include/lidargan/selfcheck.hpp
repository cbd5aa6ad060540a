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
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "lidargan/cyclegan.hpp"
#include "lidargan/gradcheck.hpp"
#include "lidargan/layers.hpp"
#include "lidargan/models.hpp"
#include "lidargan/network.hpp"
#include "lidargan/supervised.hpp"

namespace lidargan {

struct GradientCheckCase {
  std::string name;
  GradientCheckResult result;
};

namespace detail {

inline Tensor random_tensor(const Shape& shape, CounterRng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(shape);
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

// Moves the parameters off their initial values (zero biases, unit gains)
// so that no activation sits exactly on a ReLU kink.
inline void jitter(std::span<Param* const> params, CounterRng rng, double scale = 0.1) {
  for (Param* p : params) {
    for (double& v : p->value.data()) v += rng.uniform(-scale, scale);
  }
}

// L = sum(net(input) * probe), checked against the parameters and the input.
inline GradientCheckResult check_network(Network& net, const Shape& in_shape, CounterRng rng, double eps,
                                         const GradientCheckOptions& opt) {
  jitter(net.params(), rng.split("jitter"));
  Param input("input", random_tensor(in_shape, rng));
  const Tensor probe = random_tensor(net.output_shape(in_shape), rng);
  const CheckedObjective fn = [&](bool backprop) {
    Trace t;
    const Tensor out = net.forward(input.value, t);
    double loss = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) loss += out[i] * probe[i];
    if (backprop) input.grad += net.backward(t, probe);
    return loss;
  };
  std::vector<Param*> params = net.params();
  params.push_back(&input);
  return gradient_check_detailed(fn, params, eps, opt);
}

inline Network single_layer(const std::string& name, std::size_t channels, std::unique_ptr<Layer> layer) {
  Network net(name, channels);
  net.add(std::move(layer));
  return net;
}

inline Tensor random_grid_batch(std::size_t n, std::size_t size, CounterRng& rng) {
  return random_tensor({n, 1, size, size}, rng, 0.0, 1.0);
}

}  // namespace detail

/// Central-difference checks of every layer kind, the three model
/// families, the CycleGAN critic and translator objectives, the
/// supervised translator objective and the reference-model objective.
inline std::vector<GradientCheckCase> run_gradient_checks(std::uint64_t seed = 0, double eps = 1e-5,
                                                          std::size_t samples_per_param = 64) {
  const CounterRng root(seed);
  const GradientCheckOptions opt{samples_per_param, seed};
  std::vector<GradientCheckCase> out;
  auto layer_case = [&](const std::string& name, std::size_t channels, std::unique_ptr<Layer> layer,
                        const Shape& in_shape) {
    Network net = detail::single_layer(name, channels, std::move(layer));
    out.push_back({name, detail::check_network(net, in_shape, root.split(name).split(1), eps, opt)});
  };

  const Shape s2{2, 2, 6, 6};
  {
    CounterRng r = root.split("init");
    layer_case("conv3_zero", 2, std::make_unique<Conv2d>(2, 3, 3, 1, Padding::kZero, true, r), s2);
    layer_case("conv3_reflect", 2, std::make_unique<Conv2d>(2, 3, 3, 1, Padding::kReflect, true, r), s2);
    layer_case("conv3_stride2_zero", 2, std::make_unique<Conv2d>(2, 3, 3, 2, Padding::kZero, true, r), s2);
    layer_case("conv3_stride2_reflect", 2, std::make_unique<Conv2d>(2, 3, 3, 2, Padding::kReflect, false, r), s2);
    layer_case("conv7_reflect", 1, std::make_unique<Conv2d>(1, 2, 7, 1, Padding::kReflect, true, r), {2, 1, 8, 8});
    layer_case("conv1", 2, std::make_unique<Conv2d>(2, 2, 1, 1, Padding::kZero, true, r), s2);
    layer_case("upsample2x", 2, std::make_unique<Upsample2x>(), s2);
    layer_case("instance_norm", 2, std::make_unique<InstanceNorm>(2), s2);
    layer_case("relu", 2, std::make_unique<ReLU>(), s2);
    layer_case("leaky_relu", 2, std::make_unique<LeakyReLU>(), s2);
    layer_case("tanh", 2, std::make_unique<Tanh>(), s2);
    layer_case("sigmoid", 2, std::make_unique<Sigmoid>(), s2);
    std::vector<std::unique_ptr<Layer>> body;
    body.push_back(std::make_unique<Conv2d>(2, 2, 3, 1, Padding::kReflect, false, r));
    body.push_back(std::make_unique<InstanceNorm>(2));
    body.push_back(std::make_unique<ReLU>());
    body.push_back(std::make_unique<Conv2d>(2, 2, 3, 1, Padding::kReflect, false, r));
    body.push_back(std::make_unique<InstanceNorm>(2));
    layer_case("residual", 2, std::make_unique<Residual>(std::move(body)), s2);
  }
  {
    Network g = make_generator("generator", 2, root.split("generator"));
    out.push_back({"generator", detail::check_network(g, {2, 1, 8, 8}, root.split("generator-in"), eps, opt)});
    Network d = make_discriminator("discriminator", 2, root.split("discriminator"));
    out.push_back(
        {"discriminator", detail::check_network(d, {2, 1, 8, 8}, root.split("discriminator-in"), eps, opt)});
    Network h = make_reference_model("reference", 2, root.split("reference"));
    out.push_back({"reference", detail::check_network(h, {2, 1, 8, 8}, root.split("reference-in"), eps, opt)});
  }

  constexpr std::size_t kObjectiveGrid = 16;
  CycleGanConfig gan;
  gan.seed = seed;
  gan.generator_channels = 2;
  gan.critic_channels = 2;
  CounterRng data = root.split("data");
  const Tensor bx = detail::random_grid_batch(2, kObjectiveGrid, data);
  const Tensor by = detail::random_grid_batch(2, kObjectiveGrid, data);
  {
    TrainState state = TrainState::create(gan);
    for (Network* n : state.networks()) detail::jitter(n->params(), root.split(n->name()));
    const CheckedObjective critic = [&](bool) {
      LossReport r;
      detail::TranslatedBatch fakes = detail::translate_batches(state, bx, by);
      FreezeGuard fg(state.translators.G);
      FreezeGuard ff(state.translators.F);
      detail::critic_grads(state, bx, by, fakes, r);
      return r.d_x + r.d_y;
    };
    std::vector<Param*> ps = state.critics.D_X.params();
    for (Param* p : state.critics.D_Y.params()) ps.push_back(p);
    out.push_back({"critic_objective", gradient_check_detailed(critic, ps, eps, opt)});

    const CheckedObjective translator = [&](bool) {
      LossReport r;
      detail::TranslatedBatch fakes = detail::translate_batches(state, bx, by);
      detail::generator_grads(state, bx, by, fakes, nullptr, nullptr, r);
      return r.total;
    };
    ps = state.translators.G.params();
    for (Param* p : state.translators.F.params()) ps.push_back(p);
    out.push_back({"translator_objective", gradient_check_detailed(translator, ps, eps, opt)});
  }
  {
    SupervisedConfig sup;
    sup.lambda_ref = 1.0;
    sup.lambda_ext = 1.0;
    sup.lambda_aug = 1.0;
    sup.baseline_x = 0.05;
    sup.baseline_y = 0.07;
    sup.reference_channels = 2;
    SupervisedState state = SupervisedState::create(gan, sup);
    for (Network* n : state.core.networks()) detail::jitter(n->params(), root.split(n->name()));
    detail::jitter(state.h_x.net.params(), root.split("H_X"));
    detail::jitter(state.h_y.net.params(), root.split("H_Y"));
    const SupervisedBatch batch{bx, detail::random_grid_batch(2, kObjectiveGrid, data), by, detail::random_grid_batch(2, kObjectiveGrid, data)};

    const CheckedObjective translator = [&](bool) {
      FreezeGuard fhx(state.h_x.net);
      FreezeGuard fhy(state.h_y.net);
      SupervisedComponents c;
      const GeneratorTermFn term = [&](const Tensor& fake_y, const Tensor& fake_x) {
        GeneratorTerm t;
        c.ref_y = detail::reference_term(state.h_y.net, fake_y, batch.x_gt, sup.lambda_ref, &t.grad_fake_y);
        c.ref_x = detail::reference_term(state.h_x.net, fake_x, batch.y_gt, sup.lambda_ref, &t.grad_fake_x);
        return t;
      };
      LossReport r;
      detail::TranslatedBatch fakes = detail::translate_batches(state.core, batch.x, batch.y);
      detail::generator_grads(state.core, batch.x, batch.y, fakes, &term, nullptr, r);
      c.adv_g = r.g_adv;
      c.adv_f = r.f_adv;
      c.cyc_x = r.cyc_x;
      c.cyc_y = r.cyc_y;
      return supervised_total_loss(c, state.config);
    };
    std::vector<Param*> ps = state.core.translators.G.params();
    for (Param* p : state.core.translators.F.params()) ps.push_back(p);
    out.push_back({"supervised_translator_objective", gradient_check_detailed(translator, ps, eps, opt)});

    const CheckedObjective reference = [&](bool) {
      return reference_objective(reference_objective_grads(state, batch), state.config);
    };
    ps = state.h_x.net.params();
    for (Param* p : state.h_y.net.params()) ps.push_back(p);
    out.push_back({"reference_objective", gradient_check_detailed(reference, ps, eps, opt)});
  }
  return out;
}

inline double max_relative_error(const std::vector<GradientCheckCase>& cases) {
  double worst = 0.0;
  for (const auto& c : cases) worst = std::max(worst, c.result.max_relative_error);
  return worst;
}

}  // namespace lidargan
