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
#include <numbers>
#include <vector>

#include "lidargan/geometry.hpp"
#include "lidargan/grid.hpp"
#include "lidargan/projection.hpp"
#include "lidargan/rng.hpp"

namespace lidargan {

/// Desk-scale stand-in for the CARLA/KITTI pair. Scenes hold a few oriented
/// boxes on a square BEV extent. The simulated domain sees every box as a
/// dense filled footprint; the real domain sees only jittered, partially
/// dropped box outlines plus ground clutter. Ground truth is the filled
/// footprint mask in both domains.
struct SyntheticTaskConfig {
  std::size_t grid_size = 32;
  double cell_m = 1.0;
  std::size_t frames_per_domain = 256;
  std::size_t heldout_per_domain = 32;
  std::size_t min_objects = 1;
  std::size_t max_objects = 3;
  double min_extent_m = 4.0;
  double max_extent_m = 9.0;
  double outline_dropout = 0.25;
  std::size_t clutter_points = 6;

  BevConfig bev() const {
    const double half = 0.5 * cell_m * static_cast<double>(grid_size);
    BevConfig c;
    c.x_min_m = -half;
    c.x_max_m = half;
    c.y_min_m = -half;
    c.y_max_m = half;
    c.cell_m = cell_m;
    c.mode = BevMode::kBinary;
    return c;
  }
};

struct SyntheticDomain {
  std::vector<Grid> frames;
  std::vector<Grid> ground_truth;
};

struct SyntheticTask {
  SyntheticDomain x;  // simulated
  SyntheticDomain y;  // real
  SyntheticDomain heldout_x;
  SyntheticDomain heldout_y;
};

namespace detail {

inline std::vector<BoundingBox3> random_scene(const SyntheticTaskConfig& cfg, CounterRng& rng) {
  const double half = 0.5 * cfg.cell_m * static_cast<double>(cfg.grid_size);
  const std::size_t count =
      cfg.min_objects + rng.uniform_index(cfg.max_objects - cfg.min_objects + 1);
  std::vector<BoundingBox3> boxes;
  for (std::size_t i = 0; i < count; ++i) {
    const double len = rng.uniform(cfg.min_extent_m, cfg.max_extent_m);
    const double wid = rng.uniform(cfg.min_extent_m, cfg.max_extent_m);
    const double margin = 0.5 * std::max(len, wid);
    const double cx = rng.uniform(-half + margin, half - margin);
    const double cy = rng.uniform(-half + margin, half - margin);
    const double yaw = rng.uniform(-0.5, 0.5) * std::numbers::pi * 0.5;
    boxes.push_back(BoundingBox3::make(Point3{cx, cy, 0.0, std::nullopt}, len, wid, 1.5, yaw));
  }
  return boxes;
}

// Dense lattice over each footprint.
inline PointCloud filled_points(const std::vector<BoundingBox3>& boxes, double spacing) {
  PointCloud cloud;
  for (const auto& b : boxes) {
    const double c = std::cos(b.yaw_rad), s = std::sin(b.yaw_rad);
    for (double u = -0.5 * b.length_m; u <= 0.5 * b.length_m + 1e-9; u += spacing) {
      for (double v = -0.5 * b.width_m; v <= 0.5 * b.width_m + 1e-9; v += spacing) {
        cloud.points.push_back(Point3{b.center.x + c * u - s * v, b.center.y + s * u + c * v, 0.0, std::nullopt});
      }
    }
  }
  return cloud;
}

// Jittered outline samples with dropout.
inline PointCloud outline_points(const std::vector<BoundingBox3>& boxes, double spacing, double dropout,
                                 double jitter, CounterRng& rng) {
  PointCloud cloud;
  for (const auto& b : boxes) {
    const double c = std::cos(b.yaw_rad), s = std::sin(b.yaw_rad);
    const double hl = 0.5 * b.length_m, hw = 0.5 * b.width_m;
    auto emit = [&](double u, double v) {
      if (rng.uniform01() < dropout) return;
      const double ju = rng.uniform(-jitter, jitter), jv = rng.uniform(-jitter, jitter);
      cloud.points.push_back(Point3{b.center.x + c * (u + ju) - s * (v + jv),
                                    b.center.y + s * (u + ju) + c * (v + jv), 0.0, std::nullopt});
    };
    for (double u = -hl; u <= hl + 1e-9; u += spacing) {
      emit(u, -hw);
      emit(u, hw);
    }
    for (double v = -hw; v <= hw + 1e-9; v += spacing) {
      emit(-hl, v);
      emit(hl, v);
    }
  }
  return cloud;
}

}  // namespace detail

inline SyntheticTask make_synthetic_task(const SyntheticTaskConfig& cfg, std::uint64_t seed) {
  const BevConfig bev = cfg.bev();
  const CounterRng root(seed);
  const double spacing = 0.25 * cfg.cell_m;

  auto sim_domain = [&](CounterRng rng, std::size_t n) {
    SyntheticDomain d;
    for (std::size_t i = 0; i < n; ++i) {
      const auto boxes = detail::random_scene(cfg, rng);
      Grid filled = rasterize_bev(detail::filled_points(boxes, spacing), bev).grid;
      d.ground_truth.push_back(filled);
      d.frames.push_back(std::move(filled));
    }
    return d;
  };
  auto real_domain = [&](CounterRng rng, std::size_t n) {
    SyntheticDomain d;
    for (std::size_t i = 0; i < n; ++i) {
      const auto boxes = detail::random_scene(cfg, rng);
      PointCloud cloud = detail::outline_points(boxes, 0.5 * cfg.cell_m, cfg.outline_dropout,
                                                0.3 * cfg.cell_m, rng);
      const double half = 0.5 * cfg.cell_m * static_cast<double>(cfg.grid_size);
      for (std::size_t k = 0; k < cfg.clutter_points; ++k) {
        cloud.points.push_back(Point3{rng.uniform(-half, half), rng.uniform(-half, half), 0.0, std::nullopt});
      }
      d.frames.push_back(rasterize_bev(cloud, bev).grid);
      d.ground_truth.push_back(rasterize_bev(detail::filled_points(boxes, spacing), bev).grid);
    }
    return d;
  };

  return SyntheticTask{sim_domain(root.split("sim"), cfg.frames_per_domain),
                       real_domain(root.split("real"), cfg.frames_per_domain),
                       sim_domain(root.split("sim-heldout"), cfg.heldout_per_domain),
                       real_domain(root.split("real-heldout"), cfg.heldout_per_domain)};
}

}  // namespace lidargan
