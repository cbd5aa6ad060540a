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
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "lidargan/error.hpp"
#include "lidargan/grid.hpp"

namespace lidargan {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

/// Dense row-major tensor of doubles. Feature maps are N x C x H x W.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0)
      : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}
  Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_numel(shape_)) {
      throw ShapeError("tensor: " + std::to_string(data_.size()) + " values for shape " +
                       shape_str(shape_));
    }
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  double* ptr() noexcept { return data_.data(); }
  const double* ptr() const noexcept { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  /// Element (n, c, h, w) of a rank-4 tensor.
  double& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }
  double at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  Tensor& operator+=(const Tensor& other) {
    require_same_shape(other, "tensor +=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }

  Tensor& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  void require_same_shape(const Tensor& other, const char* where) const {
    if (shape_ != other.shape_) {
      throw ShapeError(std::string(where) + ": shape " + shape_str(shape_) + " vs " +
                       shape_str(other.shape_));
    }
  }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

inline void require_finite(const Tensor& t, const std::string& where) {
  if (!t.all_finite()) throw NumericFault("non-finite value in " + where);
}

inline void require_finite(double v, const std::string& where) {
  if (!std::isfinite(v)) throw NumericFault("non-finite value in " + where);
}

/// Stacks single-channel grids into an N x 1 x H x W tensor.
inline Tensor stack_grids(std::span<const Grid* const> grids) {
  if (grids.empty()) throw ShapeError("stack_grids: no grids");
  const std::size_t h = grids.front()->rows();
  const std::size_t w = grids.front()->cols();
  Tensor out({grids.size(), 1, h, w});
  for (std::size_t n = 0; n < grids.size(); ++n) {
    if (grids[n]->rows() != h || grids[n]->cols() != w) throw ShapeError("stack_grids: ragged batch");
    const auto src = grids[n]->values();
    std::copy(src.begin(), src.end(), out.ptr() + n * h * w);
  }
  return out;
}

inline Tensor stack_grids(const std::vector<Grid>& grids) {
  std::vector<const Grid*> ptrs;
  for (const Grid& g : grids) ptrs.push_back(&g);
  return stack_grids(ptrs);
}

/// Channel 0 of sample n as a grid, values clamped into [0, 1].
inline Grid tensor_to_grid(const Tensor& t, std::size_t n = 0) {
  if (t.rank() != 4) throw ShapeError("tensor_to_grid: expected rank 4");
  const std::size_t h = t.dim(2), w = t.dim(3);
  Grid g(h, w);
  for (std::size_t i = 0; i < h * w; ++i) {
    g.values()[i] = static_cast<float>(std::clamp(t[n * t.dim(1) * h * w + i], 0.0, 1.0));
  }
  return g;
}

}  // namespace lidargan
