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
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "lidargan/error.hpp"
#include "lidargan/grid.hpp"
#include "lidargan/losses.hpp"
#include "lidargan/models.hpp"
#include "lidargan/network.hpp"
#include "lidargan/optim.hpp"
#include "lidargan/rng.hpp"
#include "lidargan/sampler.hpp"
#include "lidargan/tensor.hpp"

namespace lidargan {

struct CycleGanConfig {
  double lambda_cyc = 50.0;
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  std::size_t steps = 2000;
  std::size_t batch = 4;
  std::uint64_t seed = 0;
  GenLossMode gen_loss_mode = GenLossMode::kNonSaturating;
  double clamp_eps = 1e-7;
  std::size_t generator_channels = 4;
  std::size_t critic_channels = 4;

  void validate() const {
    if (!(lambda_cyc >= 0.0) || !std::isfinite(lambda_cyc)) throw ConfigError("lambda_cyc must be >= 0");
    if (!(clamp_eps > 0.0 && clamp_eps < 0.1)) throw ConfigError("clamp_eps must lie in (0, 0.1)");
    if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
      throw ConfigError("Adam betas must lie in [0, 1)");
    }
    if (batch == 0) throw ConfigError("batch must be positive");
    if (generator_channels == 0 || critic_channels == 0) throw ConfigError("channel widths must be positive");
  }

  AdamConfig adam() const { return AdamConfig{lr, beta1, beta2, 1e-8}; }
};

/// G maps simulated to real (sim2real), F maps real to simulated.
struct TranslatorPair {
  Network G;
  Network F;
};

/// D_X judges simulated grids, D_Y judges real grids.
struct CriticPair {
  Network D_X;
  Network D_Y;
};

struct TrainSnapshot {
  ParamSnapshot g, f, d_x, d_y;
  std::uint64_t step = 0;
};

struct TrainState {
  CycleGanConfig config;
  TranslatorPair translators;
  CriticPair critics;
  std::uint64_t step = 0;

  /// Networks are initialized from independent child streams of the seed.
  static TrainState create(const CycleGanConfig& config) {
    config.validate();
    const CounterRng root(config.seed);
    return TrainState{
        config,
        TranslatorPair{make_generator("G", config.generator_channels, root.split("G")),
                       make_generator("F", config.generator_channels, root.split("F"))},
        CriticPair{make_discriminator("D_X", config.critic_channels, root.split("D_X")),
                   make_discriminator("D_Y", config.critic_channels, root.split("D_Y"))},
        0};
  }

  TrainSnapshot snapshot() {
    return TrainSnapshot{translators.G.snapshot(), translators.F.snapshot(), critics.D_X.snapshot(),
                         critics.D_Y.snapshot(), step};
  }

  void restore(const TrainSnapshot& s) {
    translators.G.restore(s.g);
    translators.F.restore(s.f);
    critics.D_X.restore(s.d_x);
    critics.D_Y.restore(s.d_y);
    step = s.step;
  }

  std::vector<Network*> networks() {
    return {&translators.G, &translators.F, &critics.D_X, &critics.D_Y};
  }
};

/// Per-step losses, one CSV row each.
struct LossReport {
  std::uint64_t step = 0;
  double d_x = 0.0;
  double d_y = 0.0;
  double g_adv = 0.0;
  double f_adv = 0.0;
  double cyc_x = 0.0;
  double cyc_y = 0.0;
  double total = 0.0;

  static std::string csv_header() { return "step,d_x,d_y,g_adv,f_adv,cyc_x,cyc_y,total"; }

  std::string csv_row() const {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g",
                  static_cast<unsigned long long>(step), d_x, d_y, g_adv, f_adv, cyc_x, cyc_y, total);
    return buf;
  }

  friend bool operator==(const LossReport&, const LossReport&) = default;
};

enum class CycleDirection { kXCycle, kYCycle };

/// F(G(x)) for kXCycle, G(F(y)) for kYCycle.
inline Tensor reconstruct(const TranslatorPair& pair, const Tensor& grid, CycleDirection direction) {
  Trace a, b;
  if (direction == CycleDirection::kXCycle) return pair.F.forward(pair.G.forward(grid, a), b);
  return pair.G.forward(pair.F.forward(grid, a), b);
}

/// Additional differentiable generator term evaluated on (G(x), F(y)).
/// Gradients must already include the term's weight.
struct GeneratorTerm {
  double value = 0.0;
  Tensor grad_fake_y;
  Tensor grad_fake_x;
};
using GeneratorTermFn = std::function<GeneratorTerm(const Tensor& fake_y, const Tensor& fake_x)>;

namespace detail {

// Clamped critic output plus its pass-through mask.
struct CriticEval {
  Tensor prob;
  Tensor mask;
};

inline CriticEval eval_critic(const Network& critic, const Tensor& input, Trace& trace, double eps) {
  CriticEval e{critic.forward(input, trace), {}};
  e.mask = clamp_probabilities(e.prob, eps);
  return e;
}

inline Tensor masked(Tensor grad, const Tensor& mask) {
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= mask[i];
  return grad;
}

/// G(x) and F(y) with the traces needed to backpropagate into G and F.
struct TranslatedBatch {
  Trace g_of_x;
  Trace f_of_y;
  Tensor fake_y;
  Tensor fake_x;
};

inline TranslatedBatch translate_batches(const TrainState& state, const Tensor& batch_x, const Tensor& batch_y) {
  batch_x.require_same_shape(batch_y, "train_step batches");
  TranslatedBatch t;
  t.fake_y = state.translators.G.forward(batch_x, t.g_of_x);
  t.fake_x = state.translators.F.forward(batch_y, t.f_of_y);
  return t;
}

/// Critic losses on (real, translated) pairs; accumulates their gradient
/// into D_X and D_Y.
inline void critic_grads(TrainState& state, const Tensor& batch_x, const Tensor& batch_y,
                         const TranslatedBatch& fakes, LossReport& report) {
  const CycleGanConfig& cfg = state.config;
  Network& DX = state.critics.D_X;
  Network& DY = state.critics.D_Y;
  Trace real_t, fake_t;
  Tensor g_real, g_fake;

  auto y_real = eval_critic(DY, batch_y, real_t, cfg.clamp_eps);
  auto y_fake = eval_critic(DY, fakes.fake_y, fake_t, cfg.clamp_eps);
  report.d_y = discriminator_loss(y_real.prob, y_fake.prob, &g_real, &g_fake);
  DY.backward(real_t, masked(g_real, y_real.mask));
  DY.backward(fake_t, masked(g_fake, y_fake.mask));

  auto x_real = eval_critic(DX, batch_x, real_t, cfg.clamp_eps);
  auto x_fake = eval_critic(DX, fakes.fake_x, fake_t, cfg.clamp_eps);
  report.d_x = discriminator_loss(x_real.prob, x_fake.prob, &g_real, &g_fake);
  DX.backward(real_t, masked(g_real, x_real.mask));
  DX.backward(fake_t, masked(g_fake, x_fake.mask));

  require_finite(report.d_x, "d_x");
  require_finite(report.d_y, "d_y");
}

/// Translator objective against frozen critics; accumulates its gradient
/// into G and F. `fakes` is consumed.
inline void generator_grads(TrainState& state, const Tensor& batch_x, const Tensor& batch_y, TranslatedBatch& fakes,
                            const GeneratorTermFn* extra, GeneratorTerm* extra_out, LossReport& report) {
  const CycleGanConfig& cfg = state.config;
  Network& G = state.translators.G;
  Network& F = state.translators.F;
  Network& DX = state.critics.D_X;
  Network& DY = state.critics.D_Y;
  FreezeGuard freeze_x(DX);
  FreezeGuard freeze_y(DY);
  Trace critic_t, f_of_fake_y, g_of_fake_x;
  Tensor g;

  auto on_fake_y = eval_critic(DY, fakes.fake_y, critic_t, cfg.clamp_eps);
  report.g_adv = generator_adversarial_loss(on_fake_y.prob, cfg.gen_loss_mode, &g);
  Tensor grad_fake_y = DY.backward(critic_t, masked(g, on_fake_y.mask));

  auto on_fake_x = eval_critic(DX, fakes.fake_x, critic_t, cfg.clamp_eps);
  report.f_adv = generator_adversarial_loss(on_fake_x.prob, cfg.gen_loss_mode, &g);
  Tensor grad_fake_x = DX.backward(critic_t, masked(g, on_fake_x.mask));

  const Tensor rec_x = F.forward(fakes.fake_y, f_of_fake_y);
  const Tensor rec_y = G.forward(fakes.fake_x, g_of_fake_x);
  report.cyc_x = cycle_loss(batch_x, rec_x);
  report.cyc_y = cycle_loss(batch_y, rec_y);

  if (cfg.lambda_cyc != 0.0) {
    Tensor gx = cycle_loss_grad(batch_x, rec_x);
    gx *= cfg.lambda_cyc;
    grad_fake_y += F.backward(f_of_fake_y, gx);
    Tensor gy = cycle_loss_grad(batch_y, rec_y);
    gy *= cfg.lambda_cyc;
    grad_fake_x += G.backward(g_of_fake_x, gy);
  }
  if (extra != nullptr) {
    GeneratorTerm term = (*extra)(fakes.fake_y, fakes.fake_x);
    grad_fake_y += term.grad_fake_y;
    grad_fake_x += term.grad_fake_x;
    if (extra_out) *extra_out = std::move(term);
  }
  G.backward(fakes.g_of_x, grad_fake_y);
  F.backward(fakes.f_of_y, grad_fake_x);

  report.total = total_loss(report.g_adv, report.f_adv, report.cyc_y, report.cyc_x, cfg.lambda_cyc);
  require_finite(report.total, "generator objective");
}

/// One alternating update: critics first with translators frozen, then the
/// translators against the updated, frozen critics.
inline LossReport cyclegan_step(TrainState& state, const Tensor& batch_x, const Tensor& batch_y,
                                const GeneratorTermFn* extra, GeneratorTerm* extra_out) {
  const AdamConfig adam = state.config.adam();
  LossReport report;
  report.step = state.step;
  TranslatedBatch fakes = translate_batches(state, batch_x, batch_y);

  {
    FreezeGuard freeze_g(state.translators.G);
    FreezeGuard freeze_f(state.translators.F);
    state.critics.D_X.zero_grad();
    state.critics.D_Y.zero_grad();
    critic_grads(state, batch_x, batch_y, fakes, report);
    adam_step(state.critics.D_X.params(), adam);
    adam_step(state.critics.D_Y.params(), adam);
  }

  state.translators.G.zero_grad();
  state.translators.F.zero_grad();
  generator_grads(state, batch_x, batch_y, fakes, extra, extra_out, report);
  adam_step(state.translators.G.params(), adam);
  adam_step(state.translators.F.params(), adam);

  ++state.step;
  return report;
}

}  // namespace detail

/// One alternating update of the four networks. A numeric fault restores
/// every parameter and moment to its pre-step value and rethrows.
inline LossReport train_step(TrainState& state, const Tensor& batch_x, const Tensor& batch_y) {
  const TrainSnapshot before = state.snapshot();
  try {
    return detail::cyclegan_step(state, batch_x, batch_y, nullptr, nullptr);
  } catch (const NumericFault&) {
    state.restore(before);
    throw;
  }
}

/// Gathers the frames named by `handles` into an N x 1 x H x W batch.
inline Tensor gather_batch(const std::vector<Grid>& frames, const std::vector<std::size_t>& handles) {
  std::vector<const Grid*> picked;
  picked.reserve(handles.size());
  for (std::size_t h : handles) picked.push_back(&frames.at(h));
  return stack_grids(picked);
}

inline std::vector<std::size_t> iota_handles(std::size_t n) {
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

/// Training loop over two unpaired frame pools.
class CycleGanTrainer {
 public:
  CycleGanTrainer(const CycleGanConfig& config, std::vector<Grid> domain_x, std::vector<Grid> domain_y)
      : state_(TrainState::create(config)),
        x_(std::move(domain_x)),
        y_(std::move(domain_y)),
        sampler_(iota_handles(x_.size()), iota_handles(y_.size()), config.seed, config.batch) {}

  TrainState& state() noexcept { return state_; }

  LossReport step() {
    const auto [hx, hy] = sampler_.sample_batch();
    return train_step(state_, gather_batch(x_, hx), gather_batch(y_, hy));
  }

  std::vector<LossReport> run(std::size_t steps,
                              const std::function<void(const LossReport&)>& on_step = {}) {
    std::vector<LossReport> out;
    out.reserve(steps);
    for (std::size_t i = 0; i < steps; ++i) {
      out.push_back(step());
      if (on_step) on_step(out.back());
    }
    return out;
  }

 private:
  TrainState state_;
  std::vector<Grid> x_;
  std::vector<Grid> y_;
  UnpairedSampler<std::size_t> sampler_;
};

}  // namespace lidargan
