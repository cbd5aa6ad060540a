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
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <iterator>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lidargan/error.hpp"
#include "lidargan/geometry.hpp"
#include "lidargan/grid.hpp"

namespace lidargan {

namespace detail {

inline std::uint32_t load_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void store_u32_le(std::uint32_t v, unsigned char* p) {
  p[0] = static_cast<unsigned char>(v);
  p[1] = static_cast<unsigned char>(v >> 8);
  p[2] = static_cast<unsigned char>(v >> 16);
  p[3] = static_cast<unsigned char>(v >> 24);
}

inline float load_f32_le(const unsigned char* p) { return std::bit_cast<float>(load_u32_le(p)); }

inline void store_f32_le(float v, unsigned char* p) { store_u32_le(std::bit_cast<std::uint32_t>(v), p); }

inline void write_bytes(std::ostream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw IoError("write failed");
}

inline void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  store_u32_le(v, b);
  write_bytes(out, b, 4);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// KITTI velodyne .bin
// ---------------------------------------------------------------------------

inline constexpr std::size_t kKittiRecordBytes = 16;

struct KittiFrame {
  PointCloud cloud;
  std::size_t rejected_records = 0;  // records holding a non-finite float
};

/// Decodes back-to-back records of four little-endian f32 values
/// (x, y, z, reflectance). Reflectance is clamped into [0, 1].
inline KittiFrame parse_kitti_bin(std::span<const std::byte> bytes) {
  if (bytes.size() % kKittiRecordBytes != 0) throw MalformedRecordError(bytes.size());
  KittiFrame frame;
  frame.cloud.points.reserve(bytes.size() / kKittiRecordBytes);
  const auto* base = reinterpret_cast<const unsigned char*>(bytes.data());
  for (std::size_t off = 0; off < bytes.size(); off += kKittiRecordBytes) {
    const float x = detail::load_f32_le(base + off);
    const float y = detail::load_f32_le(base + off + 4);
    const float z = detail::load_f32_le(base + off + 8);
    const float r = detail::load_f32_le(base + off + 12);
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z) || !std::isfinite(r)) {
      ++frame.rejected_records;
      continue;
    }
    frame.cloud.points.push_back(
        Point3{x, y, z, std::clamp(static_cast<double>(r), 0.0, 1.0)});
  }
  return frame;
}

/// Inverse of parse_kitti_bin. Missing intensity is written as 0.
inline std::vector<std::byte> serialize_kitti_bin(const PointCloud& cloud) {
  std::vector<std::byte> out(cloud.points.size() * kKittiRecordBytes);
  auto* base = reinterpret_cast<unsigned char*>(out.data());
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Point3& p = cloud.points[i];
    unsigned char* rec = base + i * kKittiRecordBytes;
    detail::store_f32_le(static_cast<float>(p.x), rec);
    detail::store_f32_le(static_cast<float>(p.y), rec + 4);
    detail::store_f32_le(static_cast<float>(p.z), rec + 8);
    detail::store_f32_le(static_cast<float>(p.intensity.value_or(0.0)), rec + 12);
  }
  return out;
}

// ---------------------------------------------------------------------------
// ASCII point lists (CARLA exports)
// ---------------------------------------------------------------------------

/// One "x y z" triple per non-blank line, whitespace separated.
inline PointCloud parse_carla_points(std::string_view text) {
  PointCloud cloud;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    std::array<double, 3> xyz{};
    std::size_t count = 0;
    std::size_t pos = 0;
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; };
    for (;;) {
      while (pos < line.size() && is_space(line[pos])) ++pos;
      if (pos >= line.size()) break;
      std::size_t end = pos;
      while (end < line.size() && !is_space(line[end])) ++end;
      const std::string_view token = line.substr(pos, end - pos);
      pos = end;
      if (count == 3) throw ParseError(line_no, "expected 3 values, found more");
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(v)) {
        throw ParseError(line_no, "not a finite number: '" + std::string(token) + "'");
      }
      xyz[count++] = v;
    }
    if (count == 0) continue;
    if (count != 3) throw ParseError(line_no, "expected 3 values, found " + std::to_string(count));
    cloud.points.push_back(Point3{xyz[0], xyz[1], xyz[2], std::nullopt});
  }
  return cloud;
}

inline std::string format_carla_points(const PointCloud& cloud) {
  std::string out;
  char buf[64];
  for (const Point3& p : cloud.points) {
    for (double v : {p.x, p.y, p.z}) {
      const auto res = std::to_chars(buf, buf + sizeof(buf), v);
      out.append(buf, res.ptr);
      out.push_back(' ');
    }
    out.back() = '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// GridFile container
// ---------------------------------------------------------------------------

/// "LGRID\0v1", then rows and cols as u32 LE, then rows*cols f32 LE.
inline constexpr std::array<char, 8> kGridMagic{'L', 'G', 'R', 'I', 'D', '\0', 'v', '1'};
inline constexpr std::size_t kGridHeaderBytes = 16;

inline void validate_grid_payload(const Grid& grid) {
  if (grid.rows() == 0 || grid.cols() == 0) throw FormatError("grid file: empty grid");
  if (grid.rows() > UINT32_MAX || grid.cols() > UINT32_MAX) {
    throw OverflowError("grid file: dimension exceeds u32");
  }
  for (float v : grid.values()) {
    if (!(v >= 0.0f && v <= 1.0f)) throw FormatError("grid file: value outside [0, 1]");
  }
}

inline void save_grid(const Grid& grid, std::ostream& out) {
  validate_grid_payload(grid);
  detail::write_bytes(out, kGridMagic.data(), kGridMagic.size());
  detail::write_u32(out, static_cast<std::uint32_t>(grid.rows()));
  detail::write_u32(out, static_cast<std::uint32_t>(grid.cols()));
  std::vector<unsigned char> payload(grid.size() * 4);
  for (std::size_t i = 0; i < grid.size(); ++i) detail::store_f32_le(grid.values()[i], &payload[i * 4]);
  detail::write_bytes(out, payload.data(), payload.size());
}

inline Grid load_grid(std::span<const std::byte> bytes) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < kGridHeaderBytes) throw TruncationError("grid file: truncated header");
  if (std::memcmp(p, kGridMagic.data(), kGridMagic.size()) != 0) {
    throw FormatError("grid file: bad magic");
  }
  const std::uint64_t rows = detail::load_u32_le(p + 8);
  const std::uint64_t cols = detail::load_u32_le(p + 12);
  if (rows == 0 || cols == 0) throw FormatError("grid file: empty grid");
  const std::uint64_t count = rows * cols;
  if (count > UINT32_MAX) throw OverflowError("grid file: rows x cols overflows");
  const std::uint64_t payload = count * 4;
  const std::uint64_t available = bytes.size() - kGridHeaderBytes;
  if (available < payload) throw TruncationError("grid file: truncated payload");
  if (available > payload) throw FormatError("grid file: trailing bytes after payload");

  std::vector<float> values(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = detail::load_f32_le(p + kGridHeaderBytes + i * 4);
    if (!(values[i] >= 0.0f && values[i] <= 1.0f)) {
      throw FormatError("grid file: value outside [0, 1]");
    }
  }
  return Grid(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), std::move(values));
}

inline Grid load_grid(std::istream& in) {
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_grid(std::as_bytes(std::span<const char>(raw)));
}

// ---------------------------------------------------------------------------
// Netpbm P5
// ---------------------------------------------------------------------------

/// Binary graymap with maxval 255; pixel = round-half-up(value * 255).
inline void export_graymap(const Grid& grid, std::ostream& out) {
  validate_grid_payload(grid);
  const std::string header =
      "P5\n" + std::to_string(grid.cols()) + " " + std::to_string(grid.rows()) + "\n255\n";
  detail::write_bytes(out, header.data(), header.size());
  std::vector<unsigned char> pixels(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = grid.values()[i];
    pixels[i] = static_cast<unsigned char>(std::floor(v * 255.0 + 0.5));
  }
  detail::write_bytes(out, pixels.data(), pixels.size());
}

}  // namespace lidargan
