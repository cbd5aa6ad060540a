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
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "lidargan/geometry.hpp"
#include "lidargan/grid.hpp"
#include "lidargan/sensor.hpp"

namespace lidargan {

// ---------------------------------------------------------------------------
// Polar grid map
// ---------------------------------------------------------------------------

/// channels x azimuth-steps grid of normalized ranges. Row 0 is the highest
/// beam, column 0 starts at azimuth 0 (the +x axis) and columns advance
/// counterclockwise. A cell value of 0 means "no return".
struct PolarGridMap {
  SensorConfig config;
  Grid grid;

  static PolarGridMap zeros(const SensorConfig& config) {
    config.validate();
    return PolarGridMap{config, Grid(config.channels, config.columns())};
  }

  /// Throws unless the grid matches the config and every cell is in [0, 1].
  void validate() const {
    config.validate();
    if (grid.rows() != config.channels || grid.cols() != config.columns()) {
      throw ShapeError("polar grid map: grid shape does not match sensor config");
    }
    for (float v : grid.values()) {
      if (!(v >= 0.0f && v <= 1.0f)) throw ConfigError("polar grid map: cell outside [0, 1]");
    }
  }
};

namespace detail {

struct PolarBinning {
  std::size_t rows;
  std::size_t cols;
  double el_width;
  double az_width;
  double v_min;
  double v_max;
  double h_fov;

  explicit PolarBinning(const SensorConfig& c)
      : rows(c.channels),
        cols(c.columns()),
        el_width((c.v_fov_max_deg - c.v_fov_min_deg) / static_cast<double>(c.channels)),
        az_width(c.h_fov_deg / static_cast<double>(c.columns())),
        v_min(c.v_fov_min_deg),
        v_max(c.v_fov_max_deg),
        h_fov(c.h_fov_deg) {}

  // Half-open bins; a direction exactly on the upper edge lands in the last bin.
  std::optional<std::size_t> row_of(double elevation_deg) const {
    if (elevation_deg < v_min || elevation_deg > v_max) return std::nullopt;
    auto bin = static_cast<std::size_t>(std::floor((elevation_deg - v_min) / el_width));
    if (bin >= rows) bin = rows - 1;
    return rows - 1 - bin;
  }

  std::optional<std::size_t> col_of(double azimuth_deg) const {
    if (azimuth_deg < 0.0 || azimuth_deg > h_fov) return std::nullopt;
    auto bin = static_cast<std::size_t>(std::floor(azimuth_deg / az_width));
    if (bin >= cols) bin = cols - 1;
    return bin;
  }

  double elevation_center(std::size_t row) const {
    return v_min + (static_cast<double>(rows - 1 - row) + 0.5) * el_width;
  }
  double azimuth_center(std::size_t col) const {
    return (static_cast<double>(col) + 0.5) * az_width;
  }
};

}  // namespace detail

/// Projects a cloud onto the polar grid. Points with zero range, beyond
/// max range, non-finite, or outside the FOV are dropped. When several
/// points share a cell the nearest one wins.
inline PolarGridMap encode_pgm(const PointCloud& cloud, const SensorConfig& config) {
  config.validate();
  const detail::PolarBinning bins(config);
  std::vector<double> nearest(bins.rows * bins.cols, std::numeric_limits<double>::infinity());

  for (const Point3& p : cloud.points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) continue;
    const SphericalCoord s = cartesian_to_spherical(p);
    if (s.range_m <= 0.0 || s.range_m > config.max_range_m) continue;
    const auto row = bins.row_of(s.elevation_deg);
    const auto col = bins.col_of(s.azimuth_deg);
    if (!row || !col) continue;
    double& cell = nearest[*row * bins.cols + *col];
    cell = std::min(cell, s.range_m);
  }

  PolarGridMap out{config, Grid(bins.rows, bins.cols)};
  auto values = out.grid.values();
  for (std::size_t i = 0; i < nearest.size(); ++i) {
    if (std::isfinite(nearest[i])) values[i] = static_cast<float>(nearest[i] / config.max_range_m);
  }
  return out;
}

/// One point per non-zero cell, placed on the cell-center direction.
inline PointCloud decode_pgm(const PolarGridMap& pgm) {
  pgm.validate();
  const detail::PolarBinning bins(pgm.config);
  PointCloud cloud;
  for (std::size_t r = 0; r < bins.rows; ++r) {
    for (std::size_t c = 0; c < bins.cols; ++c) {
      const float v = pgm.grid.at(r, c);
      if (v <= 0.0f) continue;
      SphericalCoord s{static_cast<double>(v) * pgm.config.max_range_m, bins.azimuth_center(c),
                       bins.elevation_center(r)};
      cloud.points.push_back(spherical_to_cartesian(s));
    }
  }
  return cloud;
}

/// Direction of the center of cell (row, col) at the given range.
inline Point3 pgm_cell_center(const SensorConfig& config, std::size_t row, std::size_t col,
                              double range_m) {
  const detail::PolarBinning bins(config);
  return spherical_to_cartesian(
      SphericalCoord{range_m, bins.azimuth_center(col), bins.elevation_center(row)});
}

// ---------------------------------------------------------------------------
// Bird's-eye view
// ---------------------------------------------------------------------------

enum class BevMode { kBinary, kDensity, kMaxHeight };

/// Top-down raster. Row 0 is at x_max (forward is up), column 0 at y_max
/// (left is left).
struct BevConfig {
  double x_min_m = -40.0;
  double x_max_m = 40.0;
  double y_min_m = -40.0;
  double y_max_m = 40.0;
  double cell_m = 0.3125;
  BevMode mode = BevMode::kBinary;
  double z_min_m = -2.5;
  double z_max_m = 1.5;

  std::size_t rows() const {
    return static_cast<std::size_t>(std::llround((x_max_m - x_min_m) / cell_m));
  }
  std::size_t cols() const {
    return static_cast<std::size_t>(std::llround((y_max_m - y_min_m) / cell_m));
  }

  void validate() const {
    const bool finite = std::isfinite(x_min_m) && std::isfinite(x_max_m) &&
                        std::isfinite(y_min_m) && std::isfinite(y_max_m) &&
                        std::isfinite(cell_m) && std::isfinite(z_min_m) && std::isfinite(z_max_m);
    if (!finite) throw ConfigError("bev: non-finite configuration");
    if (!(x_min_m < x_max_m) || !(y_min_m < y_max_m)) throw ConfigError("bev: empty extent");
    if (!(cell_m > 0.0)) throw ConfigError("bev: cell size must be positive");
    if (!(z_min_m < z_max_m)) throw ConfigError("bev: z_min must be below z_max");
    if (rows() < 1 || cols() < 1) throw ConfigError("bev: extent is smaller than one cell");
  }
};

struct BevGrid {
  BevConfig config;
  Grid grid;
};

inline BevGrid rasterize_bev(const PointCloud& cloud, const BevConfig& config) {
  config.validate();
  const std::size_t rows = config.rows();
  const std::size_t cols = config.cols();
  BevGrid out{config, Grid(rows, cols)};
  std::vector<double> acc(rows * cols, 0.0);
  std::vector<bool> hit(rows * cols, false);

  for (const Point3& p : cloud.points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) continue;
    if (p.z < config.z_min_m || p.z > config.z_max_m) continue;
    if (p.x < config.x_min_m || p.x > config.x_max_m) continue;
    if (p.y < config.y_min_m || p.y > config.y_max_m) continue;
    const auto r = std::min(rows - 1, static_cast<std::size_t>((config.x_max_m - p.x) / config.cell_m));
    const auto c = std::min(cols - 1, static_cast<std::size_t>((config.y_max_m - p.y) / config.cell_m));
    const std::size_t i = r * cols + c;
    switch (config.mode) {
      case BevMode::kBinary:
        acc[i] = 1.0;
        break;
      case BevMode::kDensity:
        acc[i] += 1.0;
        break;
      case BevMode::kMaxHeight: {
        const double h = (p.z - config.z_min_m) / (config.z_max_m - config.z_min_m);
        acc[i] = hit[i] ? std::max(acc[i], h) : h;
        break;
      }
    }
    hit[i] = true;
  }

  double scale = 1.0;
  if (config.mode == BevMode::kDensity) {
    const double max_count = acc.empty() ? 0.0 : *std::max_element(acc.begin(), acc.end());
    scale = max_count > 0.0 ? 1.0 / max_count : 0.0;
  }
  auto values = out.grid.values();
  for (std::size_t i = 0; i < acc.size(); ++i) {
    values[i] = static_cast<float>(std::clamp(acc[i] * scale, 0.0, 1.0));
  }
  return out;
}

/// Fractional pixel coordinate on a BEV grid.
struct PixelCoord {
  double row = 0.0;
  double col = 0.0;
};

/// Footprint of a box on the BEV grid. Vertex order: front-left,
/// rear-left, rear-right, front-right relative to the box heading.
struct BoxRect2 {
  std::array<PixelCoord, 4> vertices;
};

inline PixelCoord bev_pixel(const BevConfig& config, double x, double y) {
  return PixelCoord{(config.x_max_m - x) / config.cell_m, (config.y_max_m - y) / config.cell_m};
}

namespace detail {

inline std::array<std::array<double, 2>, 4> box_footprint(const BoundingBox3& box) {
  const double c = std::cos(box.yaw_rad);
  const double s = std::sin(box.yaw_rad);
  const double hl = 0.5 * box.length_m;
  const double hw = 0.5 * box.width_m;
  constexpr std::array<std::array<double, 2>, 4> signs{{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}};
  std::array<std::array<double, 2>, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) {
    const double lx = signs[i][0] * hl;
    const double ly = signs[i][1] * hw;
    out[i] = {box.center.x + c * lx - s * ly, box.center.y + s * lx + c * ly};
  }
  return out;
}

// Separating-axis test between the footprint and the axis-aligned extent.
inline bool footprint_outside(const std::array<std::array<double, 2>, 4>& poly,
                              const BevConfig& config) {
  const std::array<std::array<double, 2>, 4> extent{{{config.x_min_m, config.y_min_m},
                                                     {config.x_max_m, config.y_min_m},
                                                     {config.x_max_m, config.y_max_m},
                                                     {config.x_min_m, config.y_max_m}}};
  auto separated_on = [&](double ax, double ay) {
    double a_lo = std::numeric_limits<double>::infinity(), a_hi = -a_lo;
    double b_lo = a_lo, b_hi = -a_lo;
    for (const auto& v : poly) {
      const double d = v[0] * ax + v[1] * ay;
      a_lo = std::min(a_lo, d);
      a_hi = std::max(a_hi, d);
    }
    for (const auto& v : extent) {
      const double d = v[0] * ax + v[1] * ay;
      b_lo = std::min(b_lo, d);
      b_hi = std::max(b_hi, d);
    }
    return a_hi < b_lo || b_hi < a_lo;
  };
  if (separated_on(1.0, 0.0) || separated_on(0.0, 1.0)) return true;
  for (std::size_t i = 0; i < 2; ++i) {
    const double ex = poly[i + 1][0] - poly[i][0];
    const double ey = poly[i + 1][1] - poly[i][1];
    if (separated_on(-ey, ex)) return true;
  }
  return false;
}

}  // namespace detail

/// Maps each box footprint into BEV pixel space. Boxes entirely outside
/// the extent come back empty; partial overlaps are returned unclipped.
inline std::vector<std::optional<BoxRect2>> transfer_annotations(
    const std::vector<BoundingBox3>& boxes, const BevConfig& config) {
  config.validate();
  std::vector<std::optional<BoxRect2>> out;
  out.reserve(boxes.size());
  for (const BoundingBox3& box : boxes) {
    const auto poly = detail::box_footprint(box);
    if (detail::footprint_outside(poly, config)) {
      out.emplace_back(std::nullopt);
      continue;
    }
    BoxRect2 rect;
    for (std::size_t i = 0; i < 4; ++i) rect.vertices[i] = bev_pixel(config, poly[i][0], poly[i][1]);
    out.emplace_back(rect);
  }
  return out;
}

}  // namespace lidargan
