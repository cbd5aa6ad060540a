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
#include <utility>
#include <vector>

#include "lidargan/error.hpp"
#include "lidargan/layers.hpp"
#include "lidargan/tensor.hpp"

namespace lidargan {

/// Activations recorded by one forward pass. Consumed by backward.
class Trace {
 public:
  bool ready() const noexcept { return ready_; }

 private:
  friend class Network;
  std::vector<LayerCache> caches_;
  Shape output_shape_;
  bool ready_ = false;
};

/// Values and optimizer moments of every parameter of a network.
struct ParamSnapshot {
  std::vector<Tensor> values;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::vector<std::uint64_t> steps;

  friend bool operator==(const ParamSnapshot&, const ParamSnapshot&) = default;
};

/// Sequential stack of layers with a parameter registry.
///
/// A network may be applied several times before any backward pass; each
/// application records into its own Trace. Backward walks the layers in
/// exact reverse order. A frozen network still propagates gradients to its
/// input but leaves its parameter gradients untouched.
class Network {
 public:
  Network() = default;
  Network(std::string name, std::size_t in_channels) : name_(std::move(name)), in_channels_(in_channels) {}

  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  const std::string& name() const noexcept { return name_; }
  std::size_t in_channels() const noexcept { return in_channels_; }
  std::size_t num_layers() const noexcept { return layers_.size(); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }

  Network& add(std::unique_ptr<Layer> layer) {
    const std::size_t index = layers_.size();
    std::size_t j = 0;
    for (Param* p : layer->params()) {
      p->name = name_ + "." + std::to_string(index) + "." + std::to_string(j++) + "." + p->name;
    }
    layers_.push_back(std::move(layer));
    return *this;
  }

  template <typename L, typename... Args>
  Network& emplace(Args&&... args) {
    return add(std::make_unique<L>(std::forward<Args>(args)...));
  }

  Shape output_shape(const Shape& in) const {
    detail::require_rank4(in, name_);
    if (in[1] != in_channels_) {
      throw ShapeError(name_ + ": expected " + std::to_string(in_channels_) + " input channels, got " +
                       shape_str(in));
    }
    Shape s = in;
    for (const auto& layer : layers_) s = layer->output_shape(s);
    return s;
  }

  Tensor forward(const Tensor& in, Trace& trace) const {
    trace.output_shape_ = output_shape(in.shape());
    require_finite(in, name_ + " input");
    trace.caches_.assign(layers_.size(), LayerCache{});
    trace.ready_ = false;
    Tensor x = in;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      x = layers_[i]->forward(x, trace.caches_[i]);
      require_finite(x, name_ + " layer " + std::to_string(i) + " (" + layers_[i]->kind() + ")");
    }
    trace.ready_ = true;
    return x;
  }

  Tensor forward(const Tensor& in) { return forward(in, last_trace_); }

  /// Returns dL/d(input) and consumes the trace.
  Tensor backward(Trace& trace, const Tensor& grad_out) {
    if (!trace.ready_) throw PreconditionError(name_ + ": backward called before forward");
    if (grad_out.shape() != trace.output_shape_) {
      throw ShapeError(name_ + ": output gradient " + shape_str(grad_out.shape()) + " vs output " +
                       shape_str(trace.output_shape_));
    }
    trace.ready_ = false;
    Tensor g = grad_out;
    for (std::size_t i = layers_.size(); i-- > 0;) {
      g = layers_[i]->backward(g, trace.caches_[i], trainable_);
      require_finite(g, name_ + " gradient at layer " + std::to_string(i));
    }
    trace.caches_.clear();
    return g;
  }

  Tensor backward(const Tensor& grad_out) { return backward(last_trace_, grad_out); }

  std::vector<Param*> params() {
    std::vector<Param*> out;
    for (auto& layer : layers_) {
      for (Param* p : layer->params()) out.push_back(p);
    }
    return out;
  }

  std::size_t num_parameters() {
    std::size_t n = 0;
    for (Param* p : params()) n += p->value.size();
    return n;
  }

  void zero_grad() {
    for (Param* p : params()) p->grad.fill(0.0);
  }

  bool trainable() const noexcept { return trainable_; }
  void set_trainable(bool on) noexcept { trainable_ = on; }

  ParamSnapshot snapshot() {
    ParamSnapshot s;
    for (Param* p : params()) {
      s.values.push_back(p->value);
      s.m.push_back(p->m);
      s.v.push_back(p->v);
      s.steps.push_back(p->step);
    }
    return s;
  }

  void restore(const ParamSnapshot& s) {
    auto ps = params();
    if (ps.size() != s.values.size()) throw ShapeError(name_ + ": snapshot does not match network");
    for (std::size_t i = 0; i < ps.size(); ++i) {
      ps[i]->value.require_same_shape(s.values[i], "restore");
      ps[i]->value = s.values[i];
      ps[i]->m = s.m[i];
      ps[i]->v = s.v[i];
      ps[i]->step = s.steps[i];
      ps[i]->grad.fill(0.0);
    }
  }

 private:
  std::string name_;
  std::size_t in_channels_ = 1;
  std::vector<std::unique_ptr<Layer>> layers_;
  bool trainable_ = true;
  Trace last_trace_;
};

/// Marks a network frozen for the lifetime of the guard.
class FreezeGuard {
 public:
  explicit FreezeGuard(Network& net) : net_(net), was_(net.trainable()) { net_.set_trainable(false); }
  ~FreezeGuard() { net_.set_trainable(was_); }
  FreezeGuard(const FreezeGuard&) = delete;
  FreezeGuard& operator=(const FreezeGuard&) = delete;

 private:
  Network& net_;
  bool was_;
};

}  // namespace lidargan
