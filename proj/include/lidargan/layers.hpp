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
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "lidargan/branch.hpp"
#include "lidargan/error.hpp"
#include "lidargan/rng.hpp"
#include "lidargan/tensor.hpp"

namespace lidargan {

/// A trainable tensor with its gradient and Adam moment buffers.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor m;
  Tensor v;
  std::uint64_t step = 0;

  Param() = default;
  Param(std::string n, Tensor init)
      : name(std::move(n)),
        value(std::move(init)),
        grad(value.shape()),
        m(value.shape()),
        v(value.shape()) {}
};

/// Activations a layer keeps between forward and backward.
struct LayerCache {
  std::vector<Tensor> saved;
  std::vector<LayerCache> children;
};

class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string kind() const = 0;

  /// Output shape for an input shape; throws ShapeError when incompatible.
  virtual Shape output_shape(const Shape& in) const = 0;

  virtual Tensor forward(const Tensor& in, LayerCache& cache) const = 0;

  /// Returns dL/d(input). Adds parameter gradients when `accumulate`.
  virtual Tensor backward(const Tensor& grad_out, const LayerCache& cache, bool accumulate) = 0;

  virtual std::vector<Param*> params() { return {}; }
};

namespace detail {

inline void require_rank4(const Shape& s, const std::string& who) {
  if (s.size() != 4) throw ShapeError(who + ": expected N x C x H x W, got " + shape_str(s));
}

}  // namespace detail

enum class Padding { kZero, kReflect };

/// Square-kernel 2D convolution with "same" padding of kernel/2.
class Conv2d final : public Layer {
 public:
  Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride,
         Padding padding, bool bias, CounterRng& rng)
      : in_c_(in_channels), out_c_(out_channels), k_(kernel), stride_(stride), pad_(kernel / 2),
        padding_(padding), has_bias_(bias) {
    if (kernel % 2 == 0 || kernel == 0) throw ConfigError("conv: kernel size must be odd");
    if (stride != 1 && stride != 2) throw ConfigError("conv: stride must be 1 or 2");
    const double fan_in = static_cast<double>(in_c_ * k_ * k_);
    const double fan_out = static_cast<double>(out_c_ * k_ * k_);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Tensor w({out_c_, in_c_, k_, k_});
    for (double& x : w.data()) x = rng.uniform(-limit, limit);
    weight_ = Param("weight", std::move(w));
    if (has_bias_) bias_ = Param("bias", Tensor({out_c_}));
  }

  std::string kind() const override { return "conv" + std::to_string(k_) + "x" + std::to_string(k_); }

  Param& weight() { return weight_; }
  Param& bias() { return bias_; }

  Shape output_shape(const Shape& in) const override {
    detail::require_rank4(in, kind());
    if (in[1] != in_c_) {
      throw ShapeError(kind() + ": expected " + std::to_string(in_c_) + " channels, got " +
                       std::to_string(in[1]));
    }
    if (padding_ == Padding::kReflect && (in[2] <= pad_ || in[3] <= pad_)) {
      throw ShapeError(kind() + ": input too small for reflection padding");
    }
    if (stride_ == 2 && (in[2] % 2 != 0 || in[3] % 2 != 0)) {
      throw ConfigError(kind() + ": strided conv needs even spatial dims, got " + shape_str(in));
    }
    return {in[0], out_c_, in[2] / stride_, in[3] / stride_};
  }

  Tensor forward(const Tensor& in, LayerCache& cache) const override {
    const Shape os = output_shape(in.shape());
    Tensor padded = pad(in);
    const std::size_t n_batch = os[0], ho = os[2], wo = os[3];
    const std::size_t hp = padded.dim(2), wp = padded.dim(3);
    Tensor out(os);
    const double* w = weight_.value.ptr();
    for (std::size_t n = 0; n < n_batch; ++n) {
      for (std::size_t o = 0; o < out_c_; ++o) {
        double* dst = out.ptr() + (n * out_c_ + o) * ho * wo;
        if (has_bias_) std::fill(dst, dst + ho * wo, bias_.value[o]);
        for (std::size_t c = 0; c < in_c_; ++c) {
          const double* plane = padded.ptr() + (n * in_c_ + c) * hp * wp;
          for (std::size_t ky = 0; ky < k_; ++ky) {
            for (std::size_t kx = 0; kx < k_; ++kx) {
              const double wv = w[((o * in_c_ + c) * k_ + ky) * k_ + kx];
              for (std::size_t oy = 0; oy < ho; ++oy) {
                const double* src = plane + (oy * stride_ + ky) * wp + kx;
                double* row = dst + oy * wo;
                if (stride_ == 1) {
#pragma omp simd
                  for (std::size_t ox = 0; ox < wo; ++ox) row[ox] += wv * src[ox];
                } else {
                  for (std::size_t ox = 0; ox < wo; ++ox) row[ox] += wv * src[2 * ox];
                }
              }
            }
          }
        }
      }
    }
    cache.saved = {std::move(padded)};
    cache.children.clear();
    return out;
  }

  Tensor backward(const Tensor& grad_out, const LayerCache& cache, bool accumulate) override {
    const Tensor& padded = cache.saved.at(0);
    const std::size_t n_batch = grad_out.dim(0), ho = grad_out.dim(2), wo = grad_out.dim(3);
    const std::size_t hp = padded.dim(2), wp = padded.dim(3);
    Tensor grad_padded(padded.shape());
    const double* w = weight_.value.ptr();
    double* gw = weight_.grad.ptr();
    for (std::size_t n = 0; n < n_batch; ++n) {
      for (std::size_t o = 0; o < out_c_; ++o) {
        const double* g = grad_out.ptr() + (n * out_c_ + o) * ho * wo;
        if (accumulate && has_bias_) {
          double s = 0.0;
          for (std::size_t i = 0; i < ho * wo; ++i) s += g[i];
          bias_.grad[o] += s;
        }
        for (std::size_t c = 0; c < in_c_; ++c) {
          const double* plane = padded.ptr() + (n * in_c_ + c) * hp * wp;
          double* gplane = grad_padded.ptr() + (n * in_c_ + c) * hp * wp;
          for (std::size_t ky = 0; ky < k_; ++ky) {
            for (std::size_t kx = 0; kx < k_; ++kx) {
              const std::size_t wi = ((o * in_c_ + c) * k_ + ky) * k_ + kx;
              const double wv = w[wi];
              double acc = 0.0;
              for (std::size_t oy = 0; oy < ho; ++oy) {
                const std::size_t off = (oy * stride_ + ky) * wp + kx;
                const double* src = plane + off;
                double* gsrc = gplane + off;
                const double* grow = g + oy * wo;
                if (stride_ == 1) {
#pragma omp simd
                  for (std::size_t ox = 0; ox < wo; ++ox) gsrc[ox] += wv * grow[ox];
                  if (accumulate) {
#pragma omp simd reduction(+ : acc)
                    for (std::size_t ox = 0; ox < wo; ++ox) acc += grow[ox] * src[ox];
                  }
                } else {
                  for (std::size_t ox = 0; ox < wo; ++ox) {
                    acc += grow[ox] * src[2 * ox];
                    gsrc[2 * ox] += wv * grow[ox];
                  }
                }
              }
              if (accumulate) gw[wi] += acc;
            }
          }
        }
      }
    }
    return unpad(grad_padded);
  }

  std::vector<Param*> params() override {
    if (has_bias_) return {&weight_, &bias_};
    return {&weight_};
  }

 private:
  // Source index for padded coordinate i, or -1 for a zero pad.
  std::vector<long> index_map(std::size_t extent) const {
    std::vector<long> map(extent + 2 * pad_);
    const long n = static_cast<long>(extent);
    for (std::size_t j = 0; j < map.size(); ++j) {
      long i = static_cast<long>(j) - static_cast<long>(pad_);
      if (i < 0 || i >= n) {
        if (padding_ == Padding::kZero) {
          i = -1;
        } else {
          i = i < 0 ? -i : 2 * (n - 1) - i;
        }
      }
      map[j] = i;
    }
    return map;
  }

  Tensor pad(const Tensor& in) const {
    const std::size_t n_batch = in.dim(0), h = in.dim(2), w = in.dim(3);
    const auto rmap = index_map(h), cmap = index_map(w);
    Tensor out({n_batch, in_c_, rmap.size(), cmap.size()});
    for (std::size_t nc = 0; nc < n_batch * in_c_; ++nc) {
      const double* src = in.ptr() + nc * h * w;
      double* dst = out.ptr() + nc * rmap.size() * cmap.size();
      for (std::size_t r = 0; r < rmap.size(); ++r) {
        if (rmap[r] < 0) continue;
        for (std::size_t c = 0; c < cmap.size(); ++c) {
          if (cmap[c] >= 0) dst[r * cmap.size() + c] = src[rmap[r] * w + cmap[c]];
        }
      }
    }
    return out;
  }

  Tensor unpad(const Tensor& grad_padded) const {
    const std::size_t n_batch = grad_padded.dim(0);
    const std::size_t h = grad_padded.dim(2) - 2 * pad_, w = grad_padded.dim(3) - 2 * pad_;
    const auto rmap = index_map(h), cmap = index_map(w);
    Tensor out({n_batch, in_c_, h, w});
    for (std::size_t nc = 0; nc < n_batch * in_c_; ++nc) {
      const double* src = grad_padded.ptr() + nc * rmap.size() * cmap.size();
      double* dst = out.ptr() + nc * h * w;
      for (std::size_t r = 0; r < rmap.size(); ++r) {
        if (rmap[r] < 0) continue;
        for (std::size_t c = 0; c < cmap.size(); ++c) {
          if (cmap[c] >= 0) dst[rmap[r] * w + cmap[c]] += src[r * cmap.size() + c];
        }
      }
    }
    return out;
  }

  std::size_t in_c_, out_c_, k_, stride_, pad_;
  Padding padding_;
  bool has_bias_;
  Param weight_;
  Param bias_;
};

/// Nearest-neighbour x2 upsampling.
class Upsample2x final : public Layer {
 public:
  std::string kind() const override { return "upsample2x"; }

  Shape output_shape(const Shape& in) const override {
    detail::require_rank4(in, kind());
    return {in[0], in[1], in[2] * 2, in[3] * 2};
  }

  Tensor forward(const Tensor& in, LayerCache& cache) const override {
    Tensor out(output_shape(in.shape()));
    const std::size_t h = in.dim(2), w = in.dim(3);
    for (std::size_t nc = 0; nc < in.dim(0) * in.dim(1); ++nc) {
      const double* src = in.ptr() + nc * h * w;
      double* dst = out.ptr() + nc * 4 * h * w;
      for (std::size_t y = 0; y < 2 * h; ++y) {
        for (std::size_t x = 0; x < 2 * w; ++x) dst[y * 2 * w + x] = src[(y / 2) * w + x / 2];
      }
    }
    cache = {};
    return out;
  }

  Tensor backward(const Tensor& grad_out, const LayerCache&, bool) override {
    const std::size_t h = grad_out.dim(2) / 2, w = grad_out.dim(3) / 2;
    Tensor out({grad_out.dim(0), grad_out.dim(1), h, w});
    for (std::size_t nc = 0; nc < grad_out.dim(0) * grad_out.dim(1); ++nc) {
      const double* src = grad_out.ptr() + nc * 4 * h * w;
      double* dst = out.ptr() + nc * h * w;
      for (std::size_t y = 0; y < 2 * h; ++y) {
        for (std::size_t x = 0; x < 2 * w; ++x) dst[(y / 2) * w + x / 2] += src[y * 2 * w + x];
      }
    }
    return out;
  }
};

/// Per-(sample, channel) normalization over H x W with a learned affine.
class InstanceNorm final : public Layer {
 public:
  explicit InstanceNorm(std::size_t channels, double eps = 1e-8)
      : channels_(channels), eps_(eps), gamma_("gamma", Tensor({channels}, 1.0)),
        beta_("beta", Tensor({channels}, 0.0)) {}

  std::string kind() const override { return "instance_norm"; }

  Shape output_shape(const Shape& in) const override {
    detail::require_rank4(in, kind());
    if (in[1] != channels_) throw ShapeError("instance_norm: channel mismatch");
    return in;
  }

  Tensor forward(const Tensor& in, LayerCache& cache) const override {
    output_shape(in.shape());
    const std::size_t m = in.dim(2) * in.dim(3);
    Tensor xhat(in.shape());
    Tensor inv_std({in.dim(0) * channels_});
    Tensor out(in.shape());
    for (std::size_t nc = 0; nc < in.dim(0) * channels_; ++nc) {
      const std::size_t c = nc % channels_;
      const double* x = in.ptr() + nc * m;
      double mean = 0.0;
      for (std::size_t i = 0; i < m; ++i) mean += x[i];
      mean /= static_cast<double>(m);
      double var = 0.0;
      for (std::size_t i = 0; i < m; ++i) var += (x[i] - mean) * (x[i] - mean);
      var /= static_cast<double>(m);
      const double is = 1.0 / std::sqrt(var + eps_);
      inv_std[nc] = is;
      double* xh = xhat.ptr() + nc * m;
      double* y = out.ptr() + nc * m;
      for (std::size_t i = 0; i < m; ++i) {
        xh[i] = (x[i] - mean) * is;
        y[i] = gamma_.value[c] * xh[i] + beta_.value[c];
      }
    }
    cache.saved = {std::move(xhat), std::move(inv_std)};
    cache.children.clear();
    return out;
  }

  Tensor backward(const Tensor& grad_out, const LayerCache& cache, bool accumulate) override {
    const Tensor& xhat = cache.saved.at(0);
    const Tensor& inv_std = cache.saved.at(1);
    const std::size_t m = grad_out.dim(2) * grad_out.dim(3);
    const double inv_m = 1.0 / static_cast<double>(m);
    Tensor grad_in(grad_out.shape());
    for (std::size_t nc = 0; nc < grad_out.dim(0) * channels_; ++nc) {
      const std::size_t c = nc % channels_;
      const double* g = grad_out.ptr() + nc * m;
      const double* xh = xhat.ptr() + nc * m;
      double sum_g = 0.0, sum_gx = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        sum_g += g[i];
        sum_gx += g[i] * xh[i];
      }
      if (accumulate) {
        gamma_.grad[c] += sum_gx;
        beta_.grad[c] += sum_g;
      }
      const double scale = gamma_.value[c] * inv_std[nc];
      double* gi = grad_in.ptr() + nc * m;
      for (std::size_t i = 0; i < m; ++i) {
        gi[i] = scale * (g[i] - sum_g * inv_m - xh[i] * sum_gx * inv_m);
      }
    }
    return grad_in;
  }

  std::vector<Param*> params() override { return {&gamma_, &beta_}; }

 private:
  std::size_t channels_;
  double eps_;
  Param gamma_;
  Param beta_;
};

namespace detail {

/// Elementwise activation; Fn gives (value, derivative-from-input-and-output).
template <typename Derived>
class Elementwise : public Layer {
 public:
  Shape output_shape(const Shape& in) const override { return in; }

  Tensor forward(const Tensor& in, LayerCache& cache) const override {
    Tensor out(in.shape());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = Derived::apply(in[i]);
    if constexpr (Derived::kPiecewise) {
      if (active_branch_trace()) {
        for (std::size_t i = 0; i < in.size(); ++i) record_branch(in[i] > 0.0);
      }
    }
    cache.saved = {in, out};
    cache.children.clear();
    return out;
  }

  Tensor backward(const Tensor& grad_out, const LayerCache& cache, bool) override {
    const Tensor& in = cache.saved.at(0);
    const Tensor& out = cache.saved.at(1);
    Tensor grad_in(grad_out.shape());
    for (std::size_t i = 0; i < grad_out.size(); ++i) {
      grad_in[i] = grad_out[i] * Derived::derivative(in[i], out[i]);
    }
    return grad_in;
  }
};

}  // namespace detail

class ReLU final : public detail::Elementwise<ReLU> {
 public:
  static constexpr bool kPiecewise = true;
  std::string kind() const override { return "relu"; }
  static double apply(double x) { return x > 0.0 ? x : 0.0; }
  static double derivative(double x, double) { return x > 0.0 ? 1.0 : 0.0; }
};

class LeakyReLU final : public detail::Elementwise<LeakyReLU> {
 public:
  static constexpr double kSlope = 0.2;
  static constexpr bool kPiecewise = true;
  std::string kind() const override { return "leaky_relu"; }
  static double apply(double x) { return x > 0.0 ? x : kSlope * x; }
  static double derivative(double x, double) { return x > 0.0 ? 1.0 : kSlope; }
};

class Tanh final : public detail::Elementwise<Tanh> {
 public:
  static constexpr bool kPiecewise = false;
  std::string kind() const override { return "tanh"; }
  static double apply(double x) { return std::tanh(x); }
  static double derivative(double, double y) { return 1.0 - y * y; }
};

class Sigmoid final : public detail::Elementwise<Sigmoid> {
 public:
  static constexpr bool kPiecewise = false;
  std::string kind() const override { return "sigmoid"; }
  static double apply(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  }
  static double derivative(double, double y) { return y * (1.0 - y); }
};

/// y = x + body(x).
class Residual final : public Layer {
 public:
  explicit Residual(std::vector<std::unique_ptr<Layer>> body) : body_(std::move(body)) {}

  std::string kind() const override { return "residual"; }

  Shape output_shape(const Shape& in) const override {
    Shape s = in;
    for (const auto& layer : body_) s = layer->output_shape(s);
    if (s != in) throw ShapeError("residual: body changes shape " + shape_str(in) + " -> " + shape_str(s));
    return s;
  }

  Tensor forward(const Tensor& in, LayerCache& cache) const override {
    output_shape(in.shape());
    cache.saved.clear();
    cache.children.assign(body_.size(), LayerCache{});
    Tensor x = in;
    for (std::size_t i = 0; i < body_.size(); ++i) x = body_[i]->forward(x, cache.children[i]);
    x += in;
    return x;
  }

  Tensor backward(const Tensor& grad_out, const LayerCache& cache, bool accumulate) override {
    Tensor g = grad_out;
    for (std::size_t i = body_.size(); i-- > 0;) g = body_[i]->backward(g, cache.children[i], accumulate);
    g += grad_out;
    return g;
  }

  std::vector<Param*> params() override {
    std::vector<Param*> out;
    for (auto& layer : body_) {
      for (Param* p : layer->params()) out.push_back(p);
    }
    return out;
  }

 private:
  std::vector<std::unique_ptr<Layer>> body_;
};

}  // namespace lidargan
