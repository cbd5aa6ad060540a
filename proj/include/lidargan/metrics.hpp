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
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lidargan/error.hpp"
#include "lidargan/grid.hpp"
#include "lidargan/losses.hpp"
#include "lidargan/projection.hpp"

namespace lidargan {

/// Mean absolute cell difference; the same quantity cycle_loss reports.
inline double l1_reconstruction(const Grid& a, const Grid& b) {
  if (!a.same_shape(b)) throw ShapeError("l1_reconstruction: grid shapes differ");
  return detail::mean_abs_difference(a.values(), b.values());
}

/// IoU of the two masks binarized at `threshold` (cell >= threshold is
/// set). Two empty masks agree perfectly and score 1.
inline double grid_iou(const Grid& a, const Grid& b, double threshold = 0.5) {
  if (!a.same_shape(b)) throw ShapeError("grid_iou: grid shapes differ");
  if (!(threshold > 0.0 && threshold < 1.0)) throw PreconditionError("grid_iou: threshold must lie in (0, 1)");
  std::size_t inter = 0;
  std::size_t uni = 0;
  const auto va = a.values();
  const auto vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i) {
    const bool pa = va[i] >= threshold;
    const bool pb = vb[i] >= threshold;
    inter += static_cast<std::size_t>(pa && pb);
    uni += static_cast<std::size_t>(pa || pb);
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace detail {

inline void plot(Grid& g, long long r, long long c) {
  if (r < 0 || c < 0) return;
  if (static_cast<std::size_t>(r) >= g.rows() || static_cast<std::size_t>(c) >= g.cols()) return;
  g.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = 1.0f;
}

// Bresenham, all octants; off-grid cells are skipped.
inline void draw_segment(Grid& g, long long r0, long long c0, long long r1, long long c1) {
  const long long dr = std::llabs(r1 - r0);
  const long long dc = -std::llabs(c1 - c0);
  const long long sr = r0 < r1 ? 1 : -1;
  const long long sc = c0 < c1 ? 1 : -1;
  long long err = dr + dc;
  for (;;) {
    plot(g, r0, c0);
    if (r0 == r1 && c0 == c1) return;
    const long long e2 = 2 * err;
    if (e2 >= dc) {
      err += dc;
      r0 += sr;
    }
    if (e2 <= dr) {
      err += dr;
      c0 += sc;
    }
  }
}

inline long long pixel_index(double v) {
  constexpr double kLimit = 1e15;
  if (!std::isfinite(v)) return v > 0 ? static_cast<long long>(kLimit) : -static_cast<long long>(kLimit);
  return static_cast<long long>(std::floor(std::clamp(v, -kLimit, kLimit)));
}

}  // namespace detail

/// Copy of `grid` with each rectangle outline drawn at 1.0. A vertex lands
/// in the cell that contains it; edges are rasterized with Bresenham.
inline Grid overlay_annotations(const Grid& grid, std::span<const BoxRect2> rects) {
  Grid out = grid;
  for (const BoxRect2& rect : rects) {
    for (std::size_t k = 0; k < 4; ++k) {
      const PixelCoord& p = rect.vertices[k];
      const PixelCoord& q = rect.vertices[(k + 1) % 4];
      detail::draw_segment(out, detail::pixel_index(p.row), detail::pixel_index(p.col), detail::pixel_index(q.row),
                           detail::pixel_index(q.col));
    }
  }
  return out;
}

inline Grid overlay_annotations(const Grid& grid, const std::vector<std::optional<BoxRect2>>& rects) {
  std::vector<BoxRect2> present;
  for (const auto& r : rects) {
    if (r) present.push_back(*r);
  }
  return overlay_annotations(grid, std::span<const BoxRect2>(present));
}

struct FrameMetrics {
  std::string frame;
  double l1_reconstruction = 0.0;
  double grid_iou = 0.0;
};

/// Per-frame metrics plus run metadata. Aggregates are recomputed from the
/// rows on demand.
struct MetricReport {
  std::vector<FrameMetrics> frames;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;

  void add(std::string frame, const Grid& produced, const Grid& reference, double threshold = 0.5) {
    frames.push_back(FrameMetrics{std::move(frame), l1_reconstruction(produced, reference),
                                  grid_iou(produced, reference, threshold)});
  }

  std::size_t count() const noexcept { return frames.size(); }

  double mean_l1() const { return mean_of(&FrameMetrics::l1_reconstruction); }
  double mean_iou() const { return mean_of(&FrameMetrics::grid_iou); }

  static std::string csv_header() { return "frame,l1_reconstruction,grid_iou"; }

  /// Header, one row per frame, a `mean` row, then a metadata comment.
  void write_csv(std::ostream& os) const {
    os << csv_header() << '\n';
    for (const FrameMetrics& f : frames) os << f.frame << ',' << num(f.l1_reconstruction) << ',' << num(f.grid_iou) << '\n';
    if (!frames.empty()) os << "mean," << num(mean_l1()) << ',' << num(mean_iou()) << '\n';
    char meta[96];
    std::snprintf(meta, sizeof(meta), "# seed=%llu config_hash=%016llx count=%zu\n",
                  static_cast<unsigned long long>(seed), static_cast<unsigned long long>(config_hash), frames.size());
    os << meta;
  }

 private:
  double mean_of(double FrameMetrics::*field) const {
    if (frames.empty()) throw PreconditionError("metric report is empty");
    double sum = 0.0;
    for (const FrameMetrics& f : frames) sum += f.*field;
    return sum / static_cast<double>(frames.size());
  }

  static std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
  }
};

}  // namespace lidargan
