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
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "lidargan/error.hpp"

namespace lidargan {

/// One LiDAR return in the sensor frame (x forward, y left, z up), meters.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  std::optional<double> intensity;  // unitless reflectance in [0, 1]

  friend bool operator==(const Point3&, const Point3&) = default;
};

inline bool is_valid(const Point3& p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) return false;
  if (p.intensity && !(*p.intensity >= 0.0 && *p.intensity <= 1.0)) return false;
  return true;
}

struct PointCloud {
  std::vector<Point3> points;
  std::string frame_id;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

struct SphericalCoord {
  double range_m = 0.0;
  double azimuth_deg = 0.0;    // [0, 360)
  double elevation_deg = 0.0;  // [-90, 90]
};

namespace detail {

inline constexpr long double kPiL = 3.141592653589793238462643383279502884L;
inline constexpr long double kDegPerRad = 180.0L / kPiL;
inline constexpr long double kRadPerDeg = kPiL / 180.0L;

}  // namespace detail

/// The origin maps to (0, 0, 0). Trig runs in extended precision so the
/// round trip stays below a nanometre out to 1000 km.
inline SphericalCoord cartesian_to_spherical(const Point3& p) {
  const long double x = p.x, y = p.y, z = p.z;
  const long double planar = std::hypot(x, y);
  SphericalCoord s;
  s.range_m = static_cast<double>(std::hypot(planar, z));
  if (s.range_m == 0.0) return s;

  long double az = std::atan2(y, x) * detail::kDegPerRad;
  if (az < 0.0L) az += 360.0L;
  double az_d = static_cast<double>(az);
  if (az_d >= 360.0) az_d = 0.0;
  s.azimuth_deg = az_d;
  s.elevation_deg = static_cast<double>(std::atan2(z, planar) * detail::kDegPerRad);
  return s;
}

inline Point3 spherical_to_cartesian(const SphericalCoord& s) {
  long double az = s.azimuth_deg;
  if (az > 180.0L) az -= 360.0L;
  const long double az_r = az * detail::kRadPerDeg;
  const long double el_r = static_cast<long double>(s.elevation_deg) * detail::kRadPerDeg;
  const long double r = s.range_m;
  const long double planar = r * std::cos(el_r);
  return Point3{static_cast<double>(planar * std::cos(az_r)),
                static_cast<double>(planar * std::sin(az_r)),
                static_cast<double>(r * std::sin(el_r)), std::nullopt};
}

/// Wraps an angle into [-pi, pi).
inline double normalize_yaw(double yaw_rad) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double y = std::fmod(yaw_rad + std::numbers::pi, two_pi);
  if (y < 0.0) y += two_pi;
  y -= std::numbers::pi;
  if (y >= std::numbers::pi) y -= two_pi;
  return y;
}

/// Oriented 3D box annotation.
struct BoundingBox3 {
  Point3 center;
  double length_m = 0.0;  // along the heading
  double width_m = 0.0;
  double height_m = 0.0;
  double yaw_rad = 0.0;

  static BoundingBox3 make(Point3 center, double length_m, double width_m, double height_m,
                           double yaw_rad) {
    if (!(length_m > 0.0 && width_m > 0.0 && height_m > 0.0)) {
      throw ConfigError("bounding box extents must be positive");
    }
    if (!is_valid(center) || !std::isfinite(yaw_rad)) {
      throw ConfigError("bounding box center/yaw must be finite");
    }
    return BoundingBox3{center, length_m, width_m, height_m, normalize_yaw(yaw_rad)};
  }
};

}  // namespace lidargan
