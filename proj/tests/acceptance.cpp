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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "lidargan/cyclegan.hpp"
#include "lidargan/dataset_io.hpp"
#include "lidargan/metrics.hpp"
#include "lidargan/projection.hpp"
#include "lidargan/selfcheck.hpp"
#include "lidargan/sensor.hpp"
#include "lidargan/supervised.hpp"
#include "lidargan/synthetic.hpp"

namespace {

using namespace lidargan;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

// Criterion 1 -----------------------------------------------------------

Outcome pgm_round_trip() {
  const SensorConfig cfg = sensor_preset("kitti64");
  const detail::PolarBinning bins(cfg);
  const std::size_t cols = cfg.columns();
  CounterRng rng(1);
  double worst = 0.0;
  std::size_t points = 0;
  for (int cloud_i = 0; cloud_i < 1000; ++cloud_i) {
    std::vector<double> truth(cfg.channels * cols, 0.0);
    PointCloud cloud;
    const std::size_t n = 1 + rng.uniform_index(300);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t r = rng.uniform_index(cfg.channels), c = rng.uniform_index(cols);
      if (truth[r * cols + c] != 0.0) continue;
      truth[r * cols + c] = rng.uniform(0.05, cfg.max_range_m);
      cloud.points.push_back(pgm_cell_center(cfg, r, c, truth[r * cols + c]));
    }
    const PointCloud back = decode_pgm(encode_pgm(cloud, cfg));
    if (back.points.size() != cloud.points.size()) return {false, "point count changed"};
    for (const Point3& p : back.points) {
      const SphericalCoord s = cartesian_to_spherical(p);
      const auto r = bins.row_of(s.elevation_deg), c = bins.col_of(s.azimuth_deg);
      if (!r || !c || truth[*r * cols + *c] == 0.0) return {false, "decoded point left its cell"};
      worst = std::max(worst, std::abs(s.range_m / truth[*r * cols + *c] - 1.0));
    }
    points += cloud.points.size();
  }
  for (int g = 0; g < 20; ++g) {
    PolarGridMap pgm = PolarGridMap::zeros(cfg);
    const double density = rng.uniform01();
    for (float& v : pgm.grid.values()) {
      if (rng.uniform01() < density) v = static_cast<float>(rng.uniform01());
    }
    pgm.grid.values()[g] = 1.0f;
    if (!(encode_pgm(decode_pgm(pgm), cfg).grid == pgm.grid)) return {false, "encode(decode(grid)) != grid"};
  }
  return {worst <= 1e-6, std::to_string(points) + " points, max range rel error " + fmt("%.3g", worst) +
                             ", 20 grids bit-exact"};
}

// Criterion 2 -----------------------------------------------------------

Outcome preset_fidelity() {
  struct Row {
    const char* name;
    std::size_t layers;
    double h_fov, v_span, range;
  };
  const Row rows[] = {{"carla32", 32, 360.0, 44.0, 50.0}, {"carla64", 64, 360.0, 44.0, 50.0},
                      {"kitti64", 64, 360.0, 26.9, 120.0}};
  for (const Row& r : rows) {
    const SensorConfig c = sensor_preset(r.name);
    const double span = c.v_fov_max_deg - c.v_fov_min_deg;
    if (c.channels != r.layers || c.h_fov_deg != r.h_fov || std::abs(span - r.v_span) > 1e-12 ||
        c.max_range_m != r.range) {
      return {false, std::string(r.name) + " differs"};
    }
  }
  return {true, "carla32 32/360/44/50, carla64 64/360/44/50, kitti64 64/360/26.9/120"};
}

// Criterion 3 -----------------------------------------------------------

Outcome loss_identities() {
  const Tensor half({4, 1, 4, 4}, 0.5);
  const double d = adversarial_loss(half, half, GenLossMode::kSaturating).d_loss;
  const double adv_err = std::abs(d - 2.0 * std::numbers::ln2);

  CounterRng rng(3);
  double comp_err = 0.0;
  bool scenario_exact = true;
  for (int i = 0; i < 1000; ++i) {
    SupervisedComponents c;
    for (double* v : {&c.adv_g, &c.adv_f, &c.cyc_y, &c.cyc_x, &c.ref_y, &c.ref_x, &c.l_hx, &c.l_hy}) {
      *v = rng.uniform(-5.0, 5.0);
    }
    const double t = total_loss(c.adv_g, c.adv_f, c.cyc_y, c.cyc_x, 50.0);
    comp_err = std::max(comp_err, std::abs(t - (c.adv_g + c.adv_f + 50.0 * (c.cyc_y + c.cyc_x))));
    SupervisedConfig cfg = apply_scenario(SupervisedConfig{}, 1);
    cfg.baseline_x = rng.uniform01();
    cfg.baseline_y = rng.uniform01();
    scenario_exact = scenario_exact && supervised_total_loss(c, cfg) == t;
  }
  const bool pass = adv_err <= 1e-12 && comp_err <= 1e-12 && scenario_exact;
  return {pass, "|d_loss - 2 ln 2| " + fmt("%.3g", adv_err) + ", composition error " + fmt("%.3g", comp_err) +
                    ", scenario 1 " + (scenario_exact ? "bit-exact" : "differs")};
}

// Criterion 4 -----------------------------------------------------------

Outcome gradient_checks() {
  const auto cases = run_gradient_checks(0, 1e-5, 64);
  const double worst = max_relative_error(cases);
  std::size_t coords = 0, exempt = 0;
  std::string worst_case;
  for (const auto& c : cases) {
    coords += c.result.coordinates;
    exempt += c.result.below_resolution + c.result.kinks;
    if (c.result.max_relative_error == worst) worst_case = c.name;
  }
  return {worst < 1e-4, std::to_string(cases.size()) + " cases, " + std::to_string(coords) + " coordinates (" +
                            std::to_string(exempt) + " exempt), max rel error " + fmt("%.3g", worst) + " in " +
                            worst_case};
}

// Criterion 5 -----------------------------------------------------------

struct TrainingRun {
  std::vector<double> cycle;
  std::uint64_t digest = 0;
  double seconds = 0.0;
};

TrainingRun desk_training() {
  const auto t0 = std::chrono::steady_clock::now();
  SyntheticTaskConfig task_cfg;  // 32 x 32 grids
  SyntheticTask task = make_synthetic_task(task_cfg, 7);
  CycleGanConfig cfg;  // lambda 50, batch 4, seed 0
  CycleGanTrainer trainer(cfg, std::move(task.x.frames), std::move(task.y.frames));
  TrainingRun run;
  std::string log;
  trainer.run(2000, [&](const LossReport& r) {
    run.cycle.push_back(0.5 * (r.cyc_x + r.cyc_y));
    log += r.csv_row();
    log += '\n';
  });
  for (Network* n : trainer.state().networks()) {
    for (Param* p : n->params()) {
      log.append(reinterpret_cast<const char*>(p->value.ptr()), p->value.size() * sizeof(double));
    }
  }
  run.digest = fnv1a64(log);
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

Outcome desk_scale_training() {
  const TrainingRun a = desk_training();
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    first += a.cycle[i] / 100.0;
    last += a.cycle[a.cycle.size() - 100 + i] / 100.0;
  }
  const double ratio = last / first;
  const TrainingRun b = desk_training();
  const bool reproducible = a.digest == b.digest;
  char digest[32];
  std::snprintf(digest, sizeof(digest), "%016llx", static_cast<unsigned long long>(a.digest));
  const double slowest = std::max(a.seconds, b.seconds);
  return {ratio <= 0.2 && reproducible && slowest < 600.0,
          "2000 steps in " + fmt("%.0f", slowest) + " s per run, cycle loss first-100 mean " + fmt("%.4f", first) + ", last-100 mean " + fmt("%.4f", last) +
              ", ratio " + fmt("%.3f", ratio) + ", second run " + (reproducible ? "identical" : "DIFFERS") +
              " (digest " + digest + ")"};
}

// Criterion 6 -----------------------------------------------------------

Outcome scenario_matrix() {
  const LambdaPattern expect[6] = {{0, 0, 0}, {0, 1, 0}, {0, 1, 1}, {1, 0, 0}, {1, 1, 0}, {1, 1, 1}};
  for (int s = 1; s <= 6; ++s) {
    if (!(scenario_lambdas(s) == expect[s - 1])) return {false, "scenario " + std::to_string(s) + " pattern"};
  }
  SyntheticTaskConfig task_cfg;
  task_cfg.frames_per_domain = 64;
  task_cfg.heldout_per_domain = 8;
  const SyntheticTask t = make_synthetic_task(task_cfg, 7);
  const SupervisedData data{{t.x.frames, t.x.ground_truth},
                            {t.y.frames, t.y.ground_truth},
                            {t.heldout_x.frames, t.heldout_x.ground_truth},
                            {t.heldout_y.frames, t.heldout_y.ground_truth}};
  const CycleGanConfig gan;
  SupervisedState state = SupervisedState::create(gan, apply_scenario(SupervisedConfig{}, 1));
  const auto reports = alternating_train(state, data, Schedule{20, 2, 30, 10});
  CycleGanTrainer vanilla(gan, t.x.frames, t.y.frames);
  const auto expect_reports = vanilla.run(60);
  std::size_t compared = 0;
  for (const auto& r : reports) {
    if (r.phase != Phase::kTranslate) continue;
    if (compared >= expect_reports.size() || !(*r.gan == expect_reports[compared])) {
      return {false, "trajectory diverges at translate step " + std::to_string(compared)};
    }
    ++compared;
  }
  const bool params_equal = state.core.snapshot().g == vanilla.state().snapshot().g &&
                            state.core.snapshot().d_y == vanilla.state().snapshot().d_y;
  return {compared == 60 && params_equal,
          "6 patterns exact; scenario 1 alternating run (2 rounds x 30 steps) vs vanilla: " +
              std::to_string(compared) + " reports bit-identical, final parameters " +
              (params_equal ? "identical" : "differ")};
}

// Criterion 7 -----------------------------------------------------------

template <typename E, typename F>
bool throws(F&& f) {
  try {
    f();
  } catch (const E&) {
    return true;
  } catch (...) {
    return false;
  }
  return false;
}

std::vector<std::byte> bytes_of(const std::string& s) {
  const auto b = std::as_bytes(std::span<const char>(s.data(), s.size()));
  return {b.begin(), b.end()};
}

Outcome parsers_and_formats() {
  const unsigned char raw[] = {0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x00, 0x40,
                               0x00, 0x00, 0x40, 0x40, 0x00, 0x00, 0x00, 0x3f};
  const auto fixture = std::as_bytes(std::span<const unsigned char>(raw));
  const KittiFrame f = parse_kitti_bin(fixture);
  if (f.cloud.points.size() != 1 || !(f.cloud.points[0] == Point3{1.0, 2.0, 3.0, 0.5})) {
    return {false, "KITTI fixture"};
  }

  CounterRng rng(4);
  Grid g(64, 1024);
  for (float& v : g.values()) v = static_cast<float>(rng.uniform01());
  std::ostringstream a;
  save_grid(g, a);
  std::ostringstream b;
  save_grid(load_grid(bytes_of(a.str())), b);
  if (a.str() != b.str()) return {false, "GridFile round trip"};

  Grid q(32, 48);
  for (float& v : q.values()) v = static_cast<float>(rng.uniform_index(256)) / 255.0f;
  std::ostringstream p1;
  export_graymap(q, p1);
  const std::string header = "P5\n48 32\n255\n";
  const std::string image = p1.str();
  if (image.compare(0, header.size(), header) != 0) return {false, "P5 header"};
  Grid decoded(32, 48);
  for (std::size_t i = 0; i < decoded.size(); ++i) {
    decoded.values()[i] = static_cast<float>(static_cast<unsigned char>(image[header.size() + i])) / 255.0f;
  }
  std::ostringstream p2;
  export_graymap(decoded, p2);
  if (p2.str() != image) return {false, "P5 round trip"};

  const bool errors =
      throws<MalformedRecordError>([] { parse_kitti_bin(std::vector<std::byte>(17)); }) &&
      throws<ParseError>([] { parse_carla_points("1 2 x\n"); }) &&
      throws<TruncationError>([&] { load_grid(bytes_of(a.str().substr(0, 100))); }) &&
      throws<FormatError>([&] { load_grid(bytes_of("XGRID\0v1" + a.str().substr(8))); }) &&
      throws<OverflowError>([] { load_grid(bytes_of(std::string("LGRID\0v1\xff\xff\xff\xff\xff\xff\xff\xff", 16))); });
  return {errors, "KITTI fixture exact, GridFile 64x1024 and P5 32x48 byte-exact, malformed inputs " +
                      std::string(errors ? "raise the expected errors" : "MISCLASSIFIED")};
}

// Criterion 8 -----------------------------------------------------------

Outcome metrics() {
  auto mask = [](std::initializer_list<std::size_t> on) {
    Grid m(4, 4);
    for (std::size_t i : on) m.values()[i] = 1.0f;
    return m;
  };
  const Grid a = mask({0, 1, 2, 3});
  const double e1 = std::abs(grid_iou(a, a) - 1.0);
  const double e2 = std::abs(grid_iou(a, mask({8, 9, 10})) - 0.0);
  const double e3 = std::abs(grid_iou(a, mask({2, 3, 4, 5})) - 1.0 / 3.0);

  CounterRng rng(8);
  double l1_err = 0.0;
  for (int k = 0; k < 100; ++k) {
    Grid p(32, 32), r(32, 32);
    for (float& v : p.values()) v = static_cast<float>(rng.uniform01());
    for (float& v : r.values()) v = static_cast<float>(rng.uniform01());
    long double s = 0.0L;
    for (std::size_t i = 0; i < p.size(); ++i) {
      s += std::fabs(static_cast<long double>(p.values()[i]) - r.values()[i]);
    }
    l1_err = std::max(l1_err, std::abs(l1_reconstruction(p, r) - static_cast<double>(s / p.size())));
  }
  const double iou_err = std::max({e1, e2, e3});
  return {iou_err <= 1e-12 && l1_err <= 1e-12,
          "IoU fixtures error " + fmt("%.3g", iou_err) + ", l1 vs brute force " + fmt("%.3g", l1_err)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
    double budget_s;
  };
  const std::vector<Criterion> criteria{
      {1, "PGM round trip", pgm_round_trip, 10.0},
      {2, "sensor presets", preset_fidelity, 0.0},
      {3, "loss identities", loss_identities, 0.0},
      {4, "gradient checks", gradient_checks, 60.0},
      {5, "desk-scale training", desk_scale_training, 0.0},
      {6, "scenario matrix", scenario_matrix, 0.0},
      {7, "parsers and formats", parsers_and_formats, 0.0},
      {8, "metrics", metrics, 0.0},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0.0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += ", over the " + fmt("%.0f", c.budget_s) + " s budget";
    }
    std::printf("%s criterion %d: %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
