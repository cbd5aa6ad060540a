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

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lidargan/cyclegan.hpp"
#include "lidargan/error.hpp"
#include "lidargan/grid.hpp"
#include "lidargan/losses.hpp"
#include "lidargan/models.hpp"
#include "lidargan/network.hpp"
#include "lidargan/optim.hpp"
#include "lidargan/sampler.hpp"

namespace lidargan {

enum class Domain { kX, kY };

/// H_X or H_Y: maps a grid of its domain to an object-occupancy map.
struct ReferenceModel {
  Network net;
  Domain domain = Domain::kX;

  ReferenceModel() = default;
  ReferenceModel(Network n, Domain d) : net(std::move(n)), domain(d) {
    const Shape probe{1, net.in_channels(), 8, 8};
    const Shape out = net.output_shape(probe);
    if (out != Shape{1, 1, 8, 8}) {
      throw ShapeError("reference model must map to a single-channel map of the input size");
    }
  }
};

/// Loss weights of the supervised objective plus the advantage baselines
/// T_X, T_Y subtracted from the extrinsic evaluation losses.
struct SupervisedConfig {
  double lambda_cyc = 50.0;
  double lambda_ref = 0.0;
  double lambda_ext = 0.0;
  double lambda_aug = 0.0;
  double baseline_x = 0.0;
  double baseline_y = 0.0;
  double reference_lr = 1e-3;
  std::size_t reference_channels = 4;

  void validate() const {
    for (double l : {lambda_cyc, lambda_ref, lambda_ext, lambda_aug}) {
      if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("supervised: every lambda must be >= 0");
    }
    if (!std::isfinite(baseline_x) || !std::isfinite(baseline_y)) {
      throw ConfigError("supervised: baselines must be finite");
    }
    if (!(reference_lr > 0.0)) throw ConfigError("supervised: reference_lr must be positive");
  }
};

struct LambdaPattern {
  double lambda_ref = 0.0;
  double lambda_aug = 0.0;
  double lambda_ext = 0.0;

  friend bool operator==(const LambdaPattern&, const LambdaPattern&) = default;
};

/// Which of (lambda_ref, lambda_aug, lambda_ext) are active in scenarios 1-6:
///
///   1: none (plain CycleGAN)          4: ref
///   2: aug                            5: ref, aug
///   3: aug, ext                       6: ref, aug, ext
///
/// Active slots take their value from `magnitudes`, which must be positive
/// for every slot the scenario turns on.
inline LambdaPattern scenario_lambdas(int scenario, const LambdaPattern& magnitudes = {1.0, 1.0, 1.0}) {
  static constexpr std::array<std::array<bool, 3>, 6> kActive{{
      {false, false, false},
      {false, true, false},
      {false, true, true},
      {true, false, false},
      {true, true, false},
      {true, true, true},
  }};
  if (scenario < 1 || scenario > 6) {
    throw ConfigError("scenario must be in 1..6, got " + std::to_string(scenario));
  }
  const auto& on = kActive[static_cast<std::size_t>(scenario - 1)];
  const std::array<double, 3> mag{magnitudes.lambda_ref, magnitudes.lambda_aug, magnitudes.lambda_ext};
  for (std::size_t i = 0; i < 3; ++i) {
    if (on[i] && !(mag[i] > 0.0)) throw ConfigError("scenario requires a positive lambda");
  }
  return LambdaPattern{on[0] ? mag[0] : 0.0, on[1] ? mag[1] : 0.0, on[2] ? mag[2] : 0.0};
}

inline SupervisedConfig apply_scenario(SupervisedConfig cfg, int scenario,
                                       const LambdaPattern& magnitudes = {1.0, 1.0, 1.0}) {
  const LambdaPattern p = scenario_lambdas(scenario, magnitudes);
  cfg.lambda_ref = p.lambda_ref;
  cfg.lambda_aug = p.lambda_aug;
  cfg.lambda_ext = p.lambda_ext;
  return cfg;
}

/// Mean squared distance between H(frames) and the ground truth.
inline double reference_loss(const Network& h, const Tensor& frames, const Tensor& gts) {
  if (frames.rank() != 4 || gts.rank() != 4 || frames.dim(0) != gts.dim(0)) {
    throw ShapeError("reference_loss: frames and ground truth are misaligned");
  }
  Trace t;
  return mean_squared_error(h.forward(frames, t), gts);
}

/// R_Y-hat: how well H_Y still finds the simulated ground truth in G(x).
inline double eval_sim2real(const Network& g, const Network& h_y, const Tensor& x_batch, const Tensor& x_gt) {
  Trace t;
  return reference_loss(h_y, g.forward(x_batch, t), x_gt);
}

/// R_X-hat: how well H_X finds the real ground truth in F(y).
inline double eval_real2sim(const Network& f, const Network& h_x, const Tensor& y_batch, const Tensor& y_gt) {
  Trace t;
  return reference_loss(h_x, f.forward(y_batch, t), y_gt);
}

inline double advantage_shift(double loss, double baseline) { return loss - baseline; }

/// Every term of the supervised objective for one batch.
struct SupervisedComponents {
  double adv_g = 0.0;
  double adv_f = 0.0;
  double cyc_y = 0.0;
  double cyc_x = 0.0;
  double ref_y = 0.0;  // R_Y-hat
  double ref_x = 0.0;  // R_X-hat
  double l_hx = 0.0;
  double l_hy = 0.0;
};

/// Objective of G and F after the loss decomposition: the plain CycleGAN
/// total plus lambda_ref times the baseline-shifted evaluation losses. The
/// lambda_ext terms depend on H only and are left to the H updates.
inline double supervised_total_loss(const SupervisedComponents& c, const SupervisedConfig& cfg) {
  double total = total_loss(c.adv_g, c.adv_f, c.cyc_y, c.cyc_x, cfg.lambda_cyc);
  if (cfg.lambda_ref != 0.0) {
    total += cfg.lambda_ref *
             (advantage_shift(c.ref_y, cfg.baseline_y) + advantage_shift(c.ref_x, cfg.baseline_x));
  }
  return total;
}

/// Objective of H_X and H_Y in the adaptation phase, summed over both
/// models: lambda_ext * (L_HX + L_HY) + lambda_aug * (shifted R_Y + R_X).
inline double reference_objective(const SupervisedComponents& c, const SupervisedConfig& cfg) {
  return cfg.lambda_ext * (c.l_hx + c.l_hy) +
         cfg.lambda_aug *
             (advantage_shift(c.ref_y, cfg.baseline_y) + advantage_shift(c.ref_x, cfg.baseline_x));
}

struct SupervisedState {
  TrainState core;
  ReferenceModel h_x;
  ReferenceModel h_y;
  SupervisedConfig config;

  /// The translators and critics are initialized exactly as
  /// TrainState::create would for the same seed.
  static SupervisedState create(CycleGanConfig gan, const SupervisedConfig& sup) {
    sup.validate();
    gan.lambda_cyc = sup.lambda_cyc;
    TrainState core = TrainState::create(gan);
    const CounterRng root(gan.seed);
    return SupervisedState{
        std::move(core),
        ReferenceModel(make_reference_model("H_X", sup.reference_channels, root.split("H_X")), Domain::kX),
        ReferenceModel(make_reference_model("H_Y", sup.reference_channels, root.split("H_Y")), Domain::kY),
        sup};
  }

  AdamConfig reference_adam() const { return AdamConfig{config.reference_lr, 0.9, 0.999, 1e-8}; }
};

enum class Phase { kPretrain = 1, kTranslate = 2, kAdapt = 3 };

/// One CSV row of the alternating algorithm. Fields a phase does not
/// compute are left empty.
struct SupervisedReport {
  Phase phase = Phase::kTranslate;
  std::uint64_t step = 0;
  std::optional<LossReport> gan;
  std::optional<double> ref_x, ref_y, l_hx, l_hy, adv_ref_x, adv_ref_y;
  double total = 0.0;

  static std::string csv_header() {
    return "phase,step,d_x,d_y,g_adv,f_adv,cyc_x,cyc_y,ref_x,ref_y,l_hx,l_hy,adv_ref_x,adv_ref_y,total";
  }

  std::string csv_row() const {
    auto num = [](std::optional<double> v) {
      if (!v) return std::string();
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", *v);
      return std::string(buf);
    };
    std::string row = std::to_string(static_cast<int>(phase)) + "," + std::to_string(step);
    std::vector<std::optional<double>> fields;
    if (gan) {
      fields = {gan->d_x, gan->d_y, gan->g_adv, gan->f_adv, gan->cyc_x, gan->cyc_y};
    } else {
      fields.assign(6, std::nullopt);
    }
    for (const auto& v : {ref_x, ref_y, l_hx, l_hy, adv_ref_x, adv_ref_y}) fields.push_back(v);
    fields.emplace_back(total);
    for (const auto& v : fields) row += "," + num(v);
    return row;
  }
};

namespace detail {

inline double reference_term(Network& h, const Tensor& input, const Tensor& gt, double weight,
                             Tensor* grad_input) {
  Trace t;
  Tensor g;
  const double loss = mean_squared_error(h.forward(input, t), gt, &g);
  if (weight != 0.0) {
    g *= weight;
    Tensor gi = h.backward(t, g);
    if (grad_input) *grad_input = std::move(gi);
  }
  return loss;
}

}  // namespace detail

/// Plain supervised step of one reference model on ground truth.
inline double pretrain_reference_step(ReferenceModel& h, const Tensor& frames, const Tensor& gts,
                                      const AdamConfig& adam) {
  h.net.zero_grad();
  const double loss = detail::reference_term(h.net, frames, gts, 1.0, nullptr);
  adam_step(h.net.params(), adam);
  return loss;
}

struct SupervisedBatch {
  Tensor x;
  Tensor x_gt;
  Tensor y;
  Tensor y_gt;
};

/// Evaluates the adaptation objective of H_X and H_Y with G and F frozen
/// and leaves its gradient in the H parameters:
///   H_X: lambda_ext * L_HX(x, X_gt) + lambda_aug * R_X-hat(F(y), Y_gt)
///   H_Y: lambda_ext * L_HY(y, Y_gt) + lambda_aug * R_Y-hat(G(x), X_gt)
inline SupervisedComponents reference_objective_grads(SupervisedState& state, const SupervisedBatch& batch) {
  const SupervisedConfig& cfg = state.config;
  Network& hx = state.h_x.net;
  Network& hy = state.h_y.net;
  FreezeGuard freeze_g(state.core.translators.G);
  FreezeGuard freeze_f(state.core.translators.F);
  Trace t;
  const Tensor fake_y = state.core.translators.G.forward(batch.x, t);
  const Tensor fake_x = state.core.translators.F.forward(batch.y, t);

  hx.zero_grad();
  hy.zero_grad();
  SupervisedComponents c;
  c.l_hx = detail::reference_term(hx, batch.x, batch.x_gt, cfg.lambda_ext, nullptr);
  c.ref_x = detail::reference_term(hx, fake_x, batch.y_gt, cfg.lambda_aug, nullptr);
  c.l_hy = detail::reference_term(hy, batch.y, batch.y_gt, cfg.lambda_ext, nullptr);
  c.ref_y = detail::reference_term(hy, fake_y, batch.x_gt, cfg.lambda_aug, nullptr);
  return c;
}

/// One optimizer step of H_X and H_Y on the adaptation objective. Both
/// lambdas zero leaves every parameter untouched.
inline SupervisedReport update_reference_models(SupervisedState& state, const SupervisedBatch& batch) {
  const SupervisedConfig& cfg = state.config;
  Network& hx = state.h_x.net;
  Network& hy = state.h_y.net;
  const ParamSnapshot before_x = hx.snapshot();
  const ParamSnapshot before_y = hy.snapshot();
  try {
    const SupervisedComponents c = reference_objective_grads(state, batch);
    SupervisedReport r;
    r.phase = Phase::kAdapt;
    r.ref_x = c.ref_x;
    r.ref_y = c.ref_y;
    r.l_hx = c.l_hx;
    r.l_hy = c.l_hy;
    r.adv_ref_x = advantage_shift(c.ref_x, cfg.baseline_x);
    r.adv_ref_y = advantage_shift(c.ref_y, cfg.baseline_y);
    r.total = reference_objective(c, cfg);
    require_finite(r.total, "reference objective");
    if (cfg.lambda_ext != 0.0 || cfg.lambda_aug != 0.0) {
      const AdamConfig adam = state.reference_adam();
      adam_step(hx.params(), adam);
      adam_step(hy.params(), adam);
    }
    return r;
  } catch (const NumericFault&) {
    hx.restore(before_x);
    hy.restore(before_y);
    throw;
  }
}

/// Translation step with H_X and H_Y frozen: the CycleGAN update with the
/// lambda_ref evaluation terms added to the G/F objective.
inline SupervisedReport supervised_train_step(SupervisedState& state, const SupervisedBatch& batch) {
  const SupervisedConfig& cfg = state.config;
  Network& hx = state.h_x.net;
  Network& hy = state.h_y.net;
  FreezeGuard freeze_hx(hx);
  FreezeGuard freeze_hy(hy);

  SupervisedComponents c;
  c.ref_y = eval_sim2real(state.core.translators.G, hy, batch.x, batch.x_gt);
  c.ref_x = eval_real2sim(state.core.translators.F, hx, batch.y, batch.y_gt);
  c.l_hx = reference_loss(hx, batch.x, batch.x_gt);
  c.l_hy = reference_loss(hy, batch.y, batch.y_gt);

  const TrainSnapshot before = state.core.snapshot();
  LossReport gan;
  try {
    if (cfg.lambda_ref != 0.0) {
      const GeneratorTermFn term = [&](const Tensor& fake_y, const Tensor& fake_x) {
        GeneratorTerm out;
        detail::reference_term(hy, fake_y, batch.x_gt, cfg.lambda_ref, &out.grad_fake_y);
        detail::reference_term(hx, fake_x, batch.y_gt, cfg.lambda_ref, &out.grad_fake_x);
        return out;
      };
      gan = detail::cyclegan_step(state.core, batch.x, batch.y, &term, nullptr);
    } else {
      gan = detail::cyclegan_step(state.core, batch.x, batch.y, nullptr, nullptr);
    }
  } catch (const NumericFault&) {
    state.core.restore(before);
    throw;
  }

  c.adv_g = gan.g_adv;
  c.adv_f = gan.f_adv;
  c.cyc_x = gan.cyc_x;
  c.cyc_y = gan.cyc_y;

  SupervisedReport r;
  r.phase = Phase::kTranslate;
  r.step = gan.step;
  r.ref_x = c.ref_x;
  r.ref_y = c.ref_y;
  r.l_hx = c.l_hx;
  r.l_hy = c.l_hy;
  r.adv_ref_x = advantage_shift(c.ref_x, cfg.baseline_x);
  r.adv_ref_y = advantage_shift(c.ref_y, cfg.baseline_y);
  r.total = supervised_total_loss(c, cfg);
  gan.total = r.total;
  r.gan = gan;
  return r;
}

/// Frames and ground-truth maps for one domain.
struct LabeledFrames {
  std::vector<Grid> frames;
  std::vector<Grid> ground_truth;

  void validate(const char* who) const {
    if (frames.size() != ground_truth.size()) {
      throw ConfigError(std::string(who) + ": frames and ground truth differ in count");
    }
  }
};

struct SupervisedData {
  LabeledFrames x;
  LabeledFrames y;
  LabeledFrames heldout_x;  // used for the baselines; falls back to x when empty
  LabeledFrames heldout_y;
};

/// Step counts of the alternating algorithm. Phases 2 and 3 repeat
/// `rounds` times after a single pretraining phase.
struct Schedule {
  std::size_t pretrain_steps = 200;
  std::size_t rounds = 1;
  std::size_t translate_steps = 500;
  std::size_t adapt_steps = 0;
};

/// Mean reference loss over a labeled pool.
inline double mean_reference_loss(const Network& h, const LabeledFrames& pool) {
  return reference_loss(h, stack_grids(pool.frames), stack_grids(pool.ground_truth));
}

/// Runs the three-step algorithm:
///   1. pretrain H_X, H_Y on ground truth, then freeze the baselines
///      T_X, T_Y at their mean loss on the held-out split;
///   2. freeze H, train G, F, D_X, D_Y on the supervised objective;
///   3. freeze G, F, adapt H_X, H_Y.
/// Phase 2 draws batches from the same stream as CycleGanTrainer, so with
/// lambda_ref = 0 its trajectory matches the plain trainer bit for bit.
/// Phases 1 and 3 sample from their own streams.
inline std::vector<SupervisedReport> alternating_train(
    SupervisedState& state, const SupervisedData& data, const Schedule& schedule,
    const std::function<void(const SupervisedReport&)>& on_step = {}) {
  data.x.validate("domain x");
  data.y.validate("domain y");
  data.heldout_x.validate("held-out x");
  data.heldout_y.validate("held-out y");
  const CycleGanConfig& gan = state.core.config;
  const auto hx = iota_handles(data.x.frames.size());
  const auto hy = iota_handles(data.y.frames.size());
  const CounterRng root(gan.seed);
  UnpairedSampler<std::size_t> translate(hx, hy, gan.seed, gan.batch);
  UnpairedSampler<std::size_t> pretrain(hx, hy, root.split("pretrain").key(), gan.batch);
  UnpairedSampler<std::size_t> adapt(hx, hy, root.split("adapt").key(), gan.batch);

  auto make_batch = [&](const std::pair<std::vector<std::size_t>, std::vector<std::size_t>>& h) {
    return SupervisedBatch{gather_batch(data.x.frames, h.first), gather_batch(data.x.ground_truth, h.first),
                           gather_batch(data.y.frames, h.second), gather_batch(data.y.ground_truth, h.second)};
  };

  std::vector<SupervisedReport> out;
  auto emit = [&](SupervisedReport r) {
    out.push_back(std::move(r));
    if (on_step) on_step(out.back());
  };

  const AdamConfig ref_adam = state.reference_adam();
  for (std::size_t i = 0; i < schedule.pretrain_steps; ++i) {
    const SupervisedBatch b = make_batch(pretrain.sample_batch());
    SupervisedReport r;
    r.phase = Phase::kPretrain;
    r.step = i;
    r.l_hx = pretrain_reference_step(state.h_x, b.x, b.x_gt, ref_adam);
    r.l_hy = pretrain_reference_step(state.h_y, b.y, b.y_gt, ref_adam);
    r.total = *r.l_hx + *r.l_hy;
    emit(r);
  }
  state.config.baseline_x =
      mean_reference_loss(state.h_x.net, data.heldout_x.frames.empty() ? data.x : data.heldout_x);
  state.config.baseline_y =
      mean_reference_loss(state.h_y.net, data.heldout_y.frames.empty() ? data.y : data.heldout_y);

  std::uint64_t adapt_step = 0;
  for (std::size_t round = 0; round < schedule.rounds; ++round) {
    for (std::size_t i = 0; i < schedule.translate_steps; ++i) {
      emit(supervised_train_step(state, make_batch(translate.sample_batch())));
    }
    for (std::size_t i = 0; i < schedule.adapt_steps; ++i) {
      SupervisedReport r = update_reference_models(state, make_batch(adapt.sample_batch()));
      r.step = adapt_step++;
      emit(r);
    }
  }
  return out;
}

}  // namespace lidargan
