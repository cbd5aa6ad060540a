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
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include "lidargan/checkpoint.hpp"
#include "lidargan/cyclegan.hpp"
#include "lidargan/dataset_io.hpp"
#include "lidargan/error.hpp"
#include "lidargan/metrics.hpp"
#include "lidargan/projection.hpp"
#include "lidargan/selfcheck.hpp"
#include "lidargan/sensor.hpp"
#include "lidargan/supervised.hpp"
#include "lidargan/synthetic.hpp"

namespace lidargan {

namespace cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

namespace fs = std::filesystem;

inline std::vector<std::byte> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  std::vector<std::byte> out(raw.size());
  std::transform(raw.begin(), raw.end(), out.begin(), [](char c) { return static_cast<std::byte>(c); });
  return out;
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  body(out);
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

inline bool has_extension(const fs::path& path, std::string_view ext) { return path.extension() == ext; }

/// KITTI binary for `.bin`, whitespace-separated ASCII points otherwise.
inline PointCloud read_cloud(const fs::path& path, std::ostream& err) {
  if (has_extension(path, ".bin")) {
    const auto bytes = read_bytes(path);
    KittiFrame frame = parse_kitti_bin(bytes);
    if (frame.rejected_records > 0) {
      err << "warning: " << frame.rejected_records << " non-finite records skipped in " << path.string() << '\n';
    }
    return std::move(frame.cloud);
  }
  return parse_carla_points(read_text(path));
}

inline void write_cloud(const fs::path& path, const PointCloud& cloud) {
  write_file(path, [&](std::ostream& out) {
    if (has_extension(path, ".bin")) {
      const auto bytes = serialize_kitti_bin(cloud);
      detail::write_bytes(out, bytes.data(), bytes.size());
    } else {
      out << format_carla_points(cloud);
    }
  });
}

inline Grid read_grid(const fs::path& path) {
  const auto bytes = read_bytes(path);
  return load_grid(bytes);
}

inline void write_grid(const fs::path& path, const Grid& grid) {
  write_file(path, [&](std::ostream& out) { save_grid(grid, out); });
}

struct NamedGrids {
  std::vector<std::string> names;
  std::vector<Grid> grids;
};

/// A single GridFile, or every `*.lgrid` in a directory in name order.
inline NamedGrids read_grids(const fs::path& path) {
  NamedGrids out;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && has_extension(entry.path(), ".lgrid")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("no .lgrid files in " + path.string());
    for (const auto& f : files) {
      out.names.push_back(f.filename().string());
      out.grids.push_back(read_grid(f));
    }
  } else {
    out.names.push_back(path.filename().string());
    out.grids.push_back(read_grid(path));
  }
  return out;
}

/// Boxes file: one `cx cy cz length width height yaw` per line; blank lines
/// and lines starting with '#' are skipped.
inline std::vector<BoundingBox3> parse_boxes(std::string_view text) {
  std::vector<BoundingBox3> boxes;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    double v[7];
    for (double& x : v) {
      if (!(fields >> x)) throw ParseError(number, "expected 7 numbers: cx cy cz length width height yaw");
    }
    std::string extra;
    if (fields >> extra) throw ParseError(number, "unexpected trailing field '" + extra + "'");
    try {
      boxes.push_back(BoundingBox3::make(Point3{v[0], v[1], v[2], std::nullopt}, v[3], v[4], v[5], v[6]));
    } catch (const ConfigError& e) {
      throw ParseError(number, e.what());
    }
  }
  return boxes;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void add_bev_options(CLI::App* app, BevConfig& bev, std::string& mode) {
  app->add_option("--x-min", bev.x_min_m, "Forward extent start (m)")->capture_default_str();
  app->add_option("--x-max", bev.x_max_m, "Forward extent end (m)")->capture_default_str();
  app->add_option("--y-min", bev.y_min_m, "Lateral extent start (m)")->capture_default_str();
  app->add_option("--y-max", bev.y_max_m, "Lateral extent end (m)")->capture_default_str();
  app->add_option("--cell", bev.cell_m, "Cell size (m)")->capture_default_str();
  app->add_option("--z-min", bev.z_min_m, "Height band start (m)")->capture_default_str();
  app->add_option("--z-max", bev.z_max_m, "Height band end (m)")->capture_default_str();
  app->add_option("--mode", mode, "binary | density | max_height")
      ->capture_default_str()
      ->check(CLI::IsMember({"binary", "density", "max_height"}));
}

inline BevMode parse_bev_mode(const std::string& mode) {
  if (mode == "density") return BevMode::kDensity;
  if (mode == "max_height") return BevMode::kMaxHeight;
  return BevMode::kBinary;
}

struct TrainOptions {
  std::size_t steps = 2000;
  std::size_t batch = 4;
  std::uint64_t seed = 0;
  std::uint64_t data_seed = 7;
  double lambda_cyc = 50.0;
  double lr = 2e-4;
  std::size_t channels = 4;
  std::size_t grid = 32;
  std::string gen_loss = "non-saturating";
  std::string csv;
  std::string checkpoint;
  std::string x_dir;
  std::string y_dir;

  CycleGanConfig config() const {
    CycleGanConfig c;
    c.steps = steps;
    c.batch = batch;
    c.seed = seed;
    c.lambda_cyc = lambda_cyc;
    c.lr = lr;
    c.generator_channels = channels;
    c.critic_channels = channels;
    c.gen_loss_mode = gen_loss == "saturating" ? GenLossMode::kSaturating : GenLossMode::kNonSaturating;
    c.validate();
    return c;
  }
};

inline void add_train_options(CLI::App* app, TrainOptions& o) {
  app->add_option("--steps", o.steps, "Training steps")->capture_default_str();
  app->add_option("--batch", o.batch, "Frames per domain per step")->capture_default_str();
  app->add_option("--seed", o.seed, "Initialization and sampling seed")->capture_default_str();
  app->add_option("--data-seed", o.data_seed, "Seed of the synthetic task")->capture_default_str();
  app->add_option("--lambda-cyc", o.lambda_cyc, "Cycle-consistency weight")->capture_default_str();
  app->add_option("--lr", o.lr, "Adam learning rate")->capture_default_str();
  app->add_option("--channels", o.channels, "Base channel width of every network")->capture_default_str();
  app->add_option("--grid", o.grid, "Synthetic grid size (cells)")->capture_default_str();
  app->add_option("--gen-loss", o.gen_loss, "non-saturating | saturating")
      ->capture_default_str()
      ->check(CLI::IsMember({"non-saturating", "saturating"}));
  app->add_option("--csv", o.csv, "Per-step loss CSV");
  app->add_option("--checkpoint", o.checkpoint, "Checkpoint written at the end of the run");
}

inline SyntheticTask synthetic_task(const TrainOptions& o) {
  SyntheticTaskConfig cfg;
  cfg.grid_size = o.grid;
  return make_synthetic_task(cfg, o.data_seed);
}

inline void save_state(const std::string& path, const std::vector<Network*>& nets) {
  if (path.empty()) return;
  write_file(path, [&](std::ostream& out) { save_checkpoint(out, nets); });
}

inline double window_mean(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  double s = 0.0;
  for (std::size_t i = begin; i < end; ++i) s += v[i];
  return s / static_cast<double>(end - begin);
}

inline int run_train(const TrainOptions& o, std::ostream& out) {
  const CycleGanConfig cfg = o.config();
  std::vector<Grid> xs, ys;
  if (!o.x_dir.empty() || !o.y_dir.empty()) {
    if (o.x_dir.empty() || o.y_dir.empty()) throw ConfigError("--x-dir and --y-dir go together");
    xs = read_grids(o.x_dir).grids;
    ys = read_grids(o.y_dir).grids;
  } else {
    SyntheticTask task = synthetic_task(o);
    xs = std::move(task.x.frames);
    ys = std::move(task.y.frames);
  }
  CycleGanTrainer trainer(cfg, std::move(xs), std::move(ys));

  std::optional<std::ofstream> csv;
  if (!o.csv.empty()) {
    csv.emplace(o.csv, std::ios::binary | std::ios::trunc);
    if (!*csv) throw IoError("cannot create " + o.csv);
    *csv << LossReport::csv_header() << '\n';
  }
  std::vector<double> cyc;
  try {
    trainer.run(o.steps, [&](const LossReport& r) {
      cyc.push_back(0.5 * (r.cyc_x + r.cyc_y));
      if (csv) *csv << r.csv_row() << '\n';
    });
  } catch (const NumericFault&) {
    save_state(o.checkpoint, trainer.state().networks());
    throw;
  }
  save_state(o.checkpoint, trainer.state().networks());
  if (csv && !*csv) throw IoError("write failed: " + o.csv);

  out << "steps " << cyc.size() << '\n';
  if (!cyc.empty()) {
    const std::size_t w = std::min<std::size_t>(100, cyc.size());
    const double first = window_mean(cyc, 0, w);
    const double last = window_mean(cyc, cyc.size() - w, cyc.size());
    out << "cycle_loss_first_window " << format_double(first) << '\n';
    out << "cycle_loss_last_window " << format_double(last) << '\n';
    out << "cycle_loss_ratio " << format_double(last / first) << '\n';
  }
  return kExitOk;
}

struct SupervisedOptions {
  TrainOptions train;
  int scenario = 1;
  double lambda_ref = 1.0;
  double lambda_aug = 1.0;
  double lambda_ext = 1.0;
  double reference_lr = 1e-3;
  Schedule schedule;
};

inline int run_train_supervised(const SupervisedOptions& o, std::ostream& out) {
  const CycleGanConfig gan = o.train.config();
  SupervisedConfig sup;
  sup.lambda_cyc = o.train.lambda_cyc;
  sup.reference_lr = o.reference_lr;
  sup.reference_channels = o.train.channels;
  sup = apply_scenario(sup, o.scenario, LambdaPattern{o.lambda_ref, o.lambda_aug, o.lambda_ext});

  const SyntheticTask task = synthetic_task(o.train);
  SupervisedData data{{task.x.frames, task.x.ground_truth},
                      {task.y.frames, task.y.ground_truth},
                      {task.heldout_x.frames, task.heldout_x.ground_truth},
                      {task.heldout_y.frames, task.heldout_y.ground_truth}};
  SupervisedState state = SupervisedState::create(gan, sup);

  std::optional<std::ofstream> csv;
  if (!o.train.csv.empty()) {
    csv.emplace(o.train.csv, std::ios::binary | std::ios::trunc);
    if (!*csv) throw IoError("cannot create " + o.train.csv);
    *csv << SupervisedReport::csv_header() << '\n';
  }
  auto nets = [&] {
    std::vector<Network*> n = state.core.networks();
    n.push_back(&state.h_x.net);
    n.push_back(&state.h_y.net);
    return n;
  };
  std::vector<SupervisedReport> reports;
  try {
    reports = alternating_train(state, data, o.schedule, [&](const SupervisedReport& r) {
      if (csv) *csv << r.csv_row() << '\n';
    });
  } catch (const NumericFault&) {
    save_state(o.train.checkpoint, nets());
    throw;
  }
  save_state(o.train.checkpoint, nets());
  if (csv && !*csv) throw IoError("write failed: " + o.train.csv);

  const LambdaPattern p{sup.lambda_ref, sup.lambda_aug, sup.lambda_ext};
  out << "scenario " << o.scenario << " lambda_ref " << format_double(p.lambda_ref) << " lambda_aug "
      << format_double(p.lambda_aug) << " lambda_ext " << format_double(p.lambda_ext) << '\n';
  out << "baseline_x " << format_double(state.config.baseline_x) << " baseline_y "
      << format_double(state.config.baseline_y) << '\n';
  out << "rows " << reports.size() << '\n';
  const Tensor hx = stack_grids(task.heldout_x.frames), hx_gt = stack_grids(task.heldout_x.ground_truth);
  const Tensor hy = stack_grids(task.heldout_y.frames), hy_gt = stack_grids(task.heldout_y.ground_truth);
  out << "heldout_sim2real " << format_double(eval_sim2real(state.core.translators.G, state.h_y.net, hx, hx_gt))
      << '\n';
  out << "heldout_real2sim " << format_double(eval_real2sim(state.core.translators.F, state.h_x.net, hy, hy_gt))
      << '\n';
  return kExitOk;
}

struct EvalOptions {
  std::string produced;
  std::string reference;
  double threshold = 0.5;
  std::uint64_t seed = 0;
  std::string csv;
  std::string checkpoint;
  std::string direction = "sim2real";
  std::size_t channels = 4;
};

inline int run_eval(const EvalOptions& o, std::ostream& out) {
  NamedGrids produced = read_grids(o.produced);
  const NamedGrids reference = read_grids(o.reference);
  if (produced.grids.size() != reference.grids.size()) {
    throw ShapeError("eval: " + std::to_string(produced.grids.size()) + " produced frames vs " +
                     std::to_string(reference.grids.size()) + " reference frames");
  }
  std::string canonical = "threshold=" + format_double(o.threshold);
  if (!o.checkpoint.empty()) {
    CycleGanConfig cfg;
    cfg.generator_channels = o.channels;
    cfg.critic_channels = o.channels;
    TrainState state = TrainState::create(cfg);
    {
      std::ifstream in(o.checkpoint, std::ios::binary);
      if (!in) throw IoError("cannot open " + o.checkpoint);
      std::vector<Network*> nets{&state.translators.G, &state.translators.F};
      load_checkpoint(in, nets);
    }
    const Network& net = o.direction == "sim2real" ? state.translators.G : state.translators.F;
    for (Grid& g : produced.grids) {
      Trace t;
      g = tensor_to_grid(net.forward(stack_grids(std::vector<Grid>{g}), t), 0);
    }
    canonical += ";direction=" + o.direction + ";channels=" + std::to_string(o.channels);
  }
  MetricReport report;
  report.seed = o.seed;
  report.config_hash = fnv1a64(canonical);
  for (std::size_t i = 0; i < produced.grids.size(); ++i) {
    report.add(produced.names[i], produced.grids[i], reference.grids[i], o.threshold);
  }
  if (o.csv.empty()) {
    report.write_csv(out);
  } else {
    write_file(o.csv, [&](std::ostream& f) { report.write_csv(f); });
    out << "frames " << report.count() << " mean_l1 " << format_double(report.mean_l1()) << " mean_iou "
        << format_double(report.mean_iou()) << '\n';
  }
  return kExitOk;
}

inline int run_gradcheck(std::uint64_t seed, double epsilon, std::size_t samples, std::ostream& out) {
  const auto cases = run_gradient_checks(seed, epsilon, samples);
  for (const auto& c : cases) {
    char line[200];
    std::snprintf(line, sizeof(line), "%-32s max_rel %.3e raw %.3e coords %zu below_resolution %zu kinks %zu\n",
                  c.name.c_str(), c.result.max_relative_error, c.result.max_raw_relative_error, c.result.coordinates,
                  c.result.below_resolution, c.result.kinks);
    out << line;
  }
  const double worst = max_relative_error(cases);
  out << "max_relative_error " << format_double(worst) << '\n';
  return worst < 1e-4 ? kExitOk : kExitFailure;
}

}  // namespace cli

/// Entry point of the `lidargan` tool. argv[0] is the program name.
inline int cli_dispatch(const std::vector<std::string>& argv, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
  using namespace cli;
  CLI::App app{"LiDAR sim2real toolkit: projections, dataset formats, CycleGAN training and evaluation",
               argv.empty() ? "lidargan" : argv.front()};
  app.require_subcommand(1);

  std::string preset, in_path, out_path, aux_path;
  std::string bev_mode = "binary";
  BevConfig bev;

  auto* enc = app.add_subcommand("encode-pgm", "Point cloud (.bin KITTI or ASCII) to a polar GridFile");
  enc->add_option("--preset", preset, "carla32 | carla64 | kitti64")->required();
  enc->add_option("input", in_path)->required();
  enc->add_option("output", out_path)->required();

  auto* dec = app.add_subcommand("decode-pgm", "Polar GridFile to points (.bin KITTI or ASCII)");
  dec->add_option("--preset", preset, "carla32 | carla64 | kitti64")->required();
  dec->add_option("input", in_path)->required();
  dec->add_option("output", out_path)->required();

  auto* bev_cmd = app.add_subcommand("bev", "Point cloud to a bird's-eye-view GridFile");
  bev_cmd->add_option("input", in_path)->required();
  bev_cmd->add_option("output", out_path)->required();
  add_bev_options(bev_cmd, bev, bev_mode);

  auto* p5 = app.add_subcommand("export-p5", "GridFile to an 8-bit binary PGM image");
  p5->add_option("input", in_path)->required();
  p5->add_option("output", out_path)->required();

  auto* ann = app.add_subcommand("annotate", "Draw 3D box footprints onto a BEV GridFile");
  ann->add_option("input", in_path)->required();
  ann->add_option("boxes", aux_path, "Lines of: cx cy cz length width height yaw")->required();
  ann->add_option("output", out_path)->required();
  add_bev_options(ann, bev, bev_mode);

  TrainOptions train;
  auto* tr = app.add_subcommand("train", "Train the vanilla CycleGAN");
  add_train_options(tr, train);
  tr->add_option("--x-dir", train.x_dir, "Directory of simulated .lgrid frames");
  tr->add_option("--y-dir", train.y_dir, "Directory of real .lgrid frames");

  SupervisedOptions sup;
  auto* ts = app.add_subcommand("train-supervised", "Train the supervised CycleGAN with reference models");
  add_train_options(ts, sup.train);
  ts->add_option("--scenario", sup.scenario, "Lambda pattern 1-6")->required();
  ts->add_option("--lambda-ref", sup.lambda_ref, "lambda_ref when active")->capture_default_str();
  ts->add_option("--lambda-aug", sup.lambda_aug, "lambda_aug when active")->capture_default_str();
  ts->add_option("--lambda-ext", sup.lambda_ext, "lambda_ext when active")->capture_default_str();
  ts->add_option("--reference-lr", sup.reference_lr, "Adam learning rate of H_X, H_Y")->capture_default_str();
  ts->add_option("--pretrain-steps", sup.schedule.pretrain_steps, "Phase 1 steps")->capture_default_str();
  ts->add_option("--rounds", sup.schedule.rounds, "Repetitions of phases 2 and 3")->capture_default_str();
  ts->add_option("--translate-steps", sup.schedule.translate_steps, "Phase 2 steps per round")
      ->capture_default_str();
  ts->add_option("--adapt-steps", sup.schedule.adapt_steps, "Phase 3 steps per round")->capture_default_str();

  EvalOptions ev;
  auto* eval = app.add_subcommand("eval", "Reconstruction error and IoU of produced vs reference grids");
  eval->add_option("produced", ev.produced, "GridFile or directory")->required();
  eval->add_option("reference", ev.reference, "GridFile or directory")->required();
  eval->add_option("--threshold", ev.threshold, "Mask binarization threshold")->capture_default_str();
  eval->add_option("--seed", ev.seed, "Seed recorded in the report")->capture_default_str();
  eval->add_option("--csv", ev.csv, "Report path (stdout when omitted)");
  eval->add_option("--checkpoint", ev.checkpoint, "Translate the produced grids with this checkpoint first");
  eval->add_option("--direction", ev.direction, "sim2real (G) | real2sim (F)")
      ->capture_default_str()
      ->check(CLI::IsMember({"sim2real", "real2sim"}));
  eval->add_option("--channels", ev.channels, "Base channel width of the checkpoint")->capture_default_str();

  std::uint64_t gc_seed = 0;
  double gc_eps = 1e-5;
  std::size_t gc_samples = 64;
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of every layer and objective");
  gc->add_option("--seed", gc_seed)->capture_default_str();
  gc->add_option("--epsilon", gc_eps)->capture_default_str();
  gc->add_option("--samples", gc_samples, "Coordinates per parameter tensor")->capture_default_str();

  std::vector<std::string> args(argv.size() > 1 ? argv.begin() + 1 : argv.end(), argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*enc) {
      const SensorConfig cfg = sensor_preset(preset);
      const PolarGridMap pgm = encode_pgm(read_cloud(in_path, err), cfg);
      write_grid(out_path, pgm.grid);
      out << "grid " << pgm.grid.rows() << " x " << pgm.grid.cols() << '\n';
    } else if (*dec) {
      const SensorConfig cfg = sensor_preset(preset);
      const PolarGridMap pgm{cfg, read_grid(in_path)};
      pgm.validate();
      const PointCloud cloud = decode_pgm(pgm);
      write_cloud(out_path, cloud);
      out << "points " << cloud.points.size() << '\n';
    } else if (*bev_cmd) {
      bev.mode = parse_bev_mode(bev_mode);
      const BevGrid grid = rasterize_bev(read_cloud(in_path, err), bev);
      write_grid(out_path, grid.grid);
      out << "grid " << grid.grid.rows() << " x " << grid.grid.cols() << '\n';
    } else if (*p5) {
      const Grid grid = read_grid(in_path);
      write_file(out_path, [&](std::ostream& o) { export_graymap(grid, o); });
    } else if (*ann) {
      bev.mode = parse_bev_mode(bev_mode);
      bev.validate();
      const Grid grid = read_grid(in_path);
      if (grid.rows() != bev.rows() || grid.cols() != bev.cols()) {
        throw FormatError("annotate: grid is " + std::to_string(grid.rows()) + " x " + std::to_string(grid.cols()) +
                          " but the BEV extent gives " + std::to_string(bev.rows()) + " x " +
                          std::to_string(bev.cols()));
      }
      const auto rects = transfer_annotations(parse_boxes(read_text(aux_path)), bev);
      write_grid(out_path, overlay_annotations(grid, rects));
      const auto drawn = std::count_if(rects.begin(), rects.end(), [](const auto& r) { return r.has_value(); });
      out << "boxes " << rects.size() << " drawn " << drawn << '\n';
    } else if (*tr) {
      return run_train(train, out);
    } else if (*ts) {
      return run_train_supervised(sup, out);
    } else if (*eval) {
      return run_eval(ev, out);
    } else if (*gc) {
      return run_gradcheck(gc_seed, gc_eps, gc_samples, out);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

inline int cli_dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
  return cli_dispatch(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace lidargan
