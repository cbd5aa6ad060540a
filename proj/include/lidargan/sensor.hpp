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
#include <string>
#include <string_view>

#include "lidargan/error.hpp"

namespace lidargan {

/// Default horizontal resolution: 1024 columns over a full revolution.
inline constexpr double kDefaultHorizontalResDeg = 0.3515625;

struct SensorConfig {
  std::size_t channels = 64;
  double h_fov_deg = 360.0;
  double v_fov_min_deg = -24.9;
  double v_fov_max_deg = 2.0;
  double h_res_deg = kDefaultHorizontalResDeg;
  double max_range_m = 120.0;

  double v_fov_span_deg() const { return v_fov_max_deg - v_fov_min_deg; }

  /// Number of azimuth steps, round(h_fov / h_res).
  std::size_t columns() const {
    return static_cast<std::size_t>(std::llround(h_fov_deg / h_res_deg));
  }

  void validate() const {
    if (channels < 1) throw ConfigError("sensor: channels must be >= 1");
    if (!(h_fov_deg > 0.0 && h_fov_deg <= 360.0)) {
      throw ConfigError("sensor: h_fov_deg must lie in (0, 360]");
    }
    if (!(h_res_deg > 0.0) || !std::isfinite(h_res_deg)) {
      throw ConfigError("sensor: h_res_deg must be positive");
    }
    if (!(v_fov_min_deg < v_fov_max_deg) || v_fov_min_deg < -90.0 || v_fov_max_deg > 90.0) {
      throw ConfigError("sensor: vertical FOV must satisfy -90 <= min < max <= 90");
    }
    if (!(max_range_m > 0.0) || !std::isfinite(max_range_m)) {
      throw ConfigError("sensor: max_range_m must be positive");
    }
    if (columns() < 1) throw ConfigError("sensor: h_fov / h_res rounds to zero columns");
  }

  friend bool operator==(const SensorConfig&, const SensorConfig&) = default;
};

enum class SensorPreset { kCarla32, kCarla64, kKitti64 };

/// Sensor rows of the dataset table. KITTI's 26.9 deg span is split as
/// [-24.9, +2.0] (HDL-64E). CARLA only publishes a 44 deg span; it is split
/// symmetrically about zero pitch, [-22, +22].
inline SensorConfig sensor_preset(SensorPreset preset) {
  switch (preset) {
    case SensorPreset::kCarla32:
      return SensorConfig{32, 360.0, -22.0, 22.0, kDefaultHorizontalResDeg, 50.0};
    case SensorPreset::kCarla64:
      return SensorConfig{64, 360.0, -22.0, 22.0, kDefaultHorizontalResDeg, 50.0};
    case SensorPreset::kKitti64:
      return SensorConfig{64, 360.0, -24.9, 2.0, kDefaultHorizontalResDeg, 120.0};
  }
  throw ConfigError("unknown sensor preset");
}

inline SensorConfig sensor_preset(std::string_view name) {
  if (name == "carla32") return sensor_preset(SensorPreset::kCarla32);
  if (name == "carla64") return sensor_preset(SensorPreset::kCarla64);
  if (name == "kitti64") return sensor_preset(SensorPreset::kKitti64);
  throw ConfigError("unknown sensor preset '" + std::string(name) +
                    "' (expected carla32, carla64 or kitti64)");
}

}  // namespace lidargan
