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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lidargan/cli.hpp"
#include "lidargan/metrics.hpp"

namespace lidargan {
namespace {

namespace fs = std::filesystem;

Grid random_grid(std::size_t r, std::size_t c, std::uint64_t seed) {
  CounterRng rng(seed);
  Grid g(r, c);
  for (float& v : g.values()) v = static_cast<float>(rng.uniform01());
  return g;
}

Grid mask(std::size_t r, std::size_t c, std::initializer_list<std::size_t> on) {
  Grid g(r, c);
  for (std::size_t i : on) g.values()[i] = 1.0f;
  return g;
}

// Metrics

TEST(L1Reconstruction, Examples) {
  const Grid a = random_grid(8, 8, 1);
  EXPECT_EQ(l1_reconstruction(a, a), 0.0);
  EXPECT_NEAR(l1_reconstruction(Grid(4, 4, 0.0f), Grid(4, 4, 0.25f)), 0.25, 1e-12);
  EXPECT_THROW(l1_reconstruction(Grid(4, 4), Grid(4, 5)), ShapeError);
}

TEST(L1Reconstruction, MatchesBruteForce) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Grid a = random_grid(17, 23, 2 * s), b = random_grid(17, 23, 2 * s + 1);
    long double sum = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) {
      sum += std::fabs(static_cast<long double>(a.values()[i]) - static_cast<long double>(b.values()[i]));
    }
    EXPECT_NEAR(l1_reconstruction(a, b), static_cast<double>(sum / a.size()), 1e-12);
  }
}

TEST(GridIou, CountingFixtures) {
  const Grid a = mask(3, 3, {0, 1, 2, 3});
  EXPECT_NEAR(grid_iou(a, a), 1.0, 1e-12);
  EXPECT_NEAR(grid_iou(a, mask(3, 3, {4, 5, 6})), 0.0, 1e-12);
  EXPECT_NEAR(grid_iou(a, mask(3, 3, {2, 3, 4, 5})), 1.0 / 3.0, 1e-12);
  EXPECT_EQ(grid_iou(Grid(3, 3), Grid(3, 3)), 1.0);
}

TEST(GridIou, ThresholdAndSymmetry) {
  Grid a(1, 3), b(1, 3);
  a.values()[0] = 0.5f;  // on the threshold counts as set
  b.values()[0] = 0.49f;
  EXPECT_EQ(grid_iou(a, b), 0.0);
  EXPECT_EQ(grid_iou(a, b, 0.4), 1.0);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Grid p = random_grid(9, 9, 3 * s), q = random_grid(9, 9, 3 * s + 1);
    const double iou = grid_iou(p, q);
    EXPECT_EQ(iou, grid_iou(q, p));
    EXPECT_GE(iou, 0.0);
    EXPECT_LE(iou, 1.0);
  }
  EXPECT_THROW(grid_iou(a, b, 0.0), PreconditionError);
  EXPECT_THROW(grid_iou(a, b, 1.0), PreconditionError);
  EXPECT_THROW(grid_iou(a, Grid(3, 1)), ShapeError);
}

TEST(OverlayAnnotations, EmptyListIsIdentity) {
  const Grid g = random_grid(10, 10, 4);
  EXPECT_EQ(overlay_annotations(g, std::span<const BoxRect2>{}), g);
}

TEST(OverlayAnnotations, AxisAlignedOutline) {
  const BoxRect2 rect{{PixelCoord{1.2, 1.7}, PixelCoord{4.5, 1.0}, PixelCoord{4.0, 4.9}, PixelCoord{1.0, 4.0}}};
  const Grid out = overlay_annotations(Grid(6, 6), std::span<const BoxRect2>(&rect, 1));
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t c = 0; c < 6; ++c) {
      const bool border = r >= 1 && r <= 4 && c >= 1 && c <= 4 && (r == 1 || r == 4 || c == 1 || c == 4);
      EXPECT_EQ(out.at(r, c), border ? 1.0f : 0.0f) << r << "," << c;
    }
  }
}

TEST(OverlayAnnotations, IdempotentAndClipped) {
  BevConfig cfg;
  cfg.cell_m = 0.5;
  const auto rects = transfer_annotations({BoundingBox3::make({3, 4, 0, std::nullopt}, 6, 3, 1, 0.7),
                                           BoundingBox3::make({39.5, 0, 0, std::nullopt}, 8, 3, 1, 0.2),
                                           BoundingBox3::make({500, 0, 0, std::nullopt}, 8, 3, 1, 0.2)},
                                          cfg);
  const Grid base = random_grid(cfg.rows(), cfg.cols(), 5);
  const Grid once = overlay_annotations(base, rects);
  EXPECT_EQ(overlay_annotations(once, rects), once);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (once.values()[i] != base.values()[i]) {
      ++changed;
      EXPECT_EQ(once.values()[i], 1.0f);
    }
  }
  EXPECT_GT(changed, 20u);
}

TEST(MetricReport, AggregatesAndCsv) {
  MetricReport report;
  report.seed = 3;
  report.config_hash = 0xabcdef;
  EXPECT_THROW(report.mean_l1(), PreconditionError);
  report.add("a", mask(3, 3, {0, 1, 2, 3}), mask(3, 3, {2, 3, 4, 5}));
  report.add("b", Grid(3, 3), Grid(3, 3));
  EXPECT_EQ(report.count(), 2u);
  EXPECT_NEAR(report.mean_iou(), (1.0 / 3.0 + 1.0) / 2.0, 1e-12);
  EXPECT_NEAR(report.mean_l1(), (4.0 / 9.0) / 2.0, 1e-12);
  std::ostringstream csv;
  report.write_csv(csv);
  std::istringstream lines(csv.str());
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], "frame,l1_reconstruction,grid_iou");
  EXPECT_EQ(rows[2], "b,0,1");
  EXPECT_EQ(rows[3].rfind("mean,", 0), 0u);
  EXPECT_EQ(rows[4], "# seed=3 config_hash=0000000000abcdef count=2");
}

// Command line

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("lidargan_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "lidargan");
    out_.str("");
    err_.str("");
    return cli_dispatch(args, out_, err_);
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  void write(const std::string& p, const std::string& bytes) {
    std::ofstream(p, std::ios::binary) << bytes;
  }

  void write_grid_file(const std::string& p, const Grid& g) {
    std::ofstream o(p, std::ios::binary);
    save_grid(g, o);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, EncodeDecodeRoundTrip) {
  const SensorConfig cfg = sensor_preset("kitti64");
  PointCloud cloud;
  for (std::size_t i = 0; i < 50; ++i) cloud.points.push_back(pgm_cell_center(cfg, i, 7 * i, 1.0 + i));
  write(path("cloud.txt"), format_carla_points(cloud));
  ASSERT_EQ(run({"encode-pgm", "--preset", "kitti64", path("cloud.txt"), path("pgm.lgrid")}), 0) << err_.str();
  EXPECT_EQ(out_.str(), "grid 64 x 1024\n");
  const std::string bytes = slurp(path("pgm.lgrid"));
  const Grid g = load_grid(std::as_bytes(std::span<const char>(bytes.data(), bytes.size())));
  EXPECT_EQ(g, encode_pgm(cloud, cfg).grid);

  ASSERT_EQ(run({"decode-pgm", "--preset", "kitti64", path("pgm.lgrid"), path("back.bin")}), 0) << err_.str();
  EXPECT_EQ(out_.str(), "points 50\n");
  ASSERT_EQ(run({"encode-pgm", "--preset", "kitti64", path("back.bin"), path("again.lgrid")}), 0);
  // KITTI stores f32 coordinates, so compare at grid level after one more pass.
  EXPECT_EQ(run({"eval", path("again.lgrid"), path("pgm.lgrid")}), 0);
}

TEST_F(CliTest, BevAnnotateAndExport) {
  write(path("cloud.txt"), "1 1 0\n-3 2 0.5\n100 0 0\n");
  ASSERT_EQ(run({"bev", "--cell", "0.5", path("cloud.txt"), path("bev.lgrid")}), 0) << err_.str();
  EXPECT_EQ(out_.str(), "grid 160 x 160\n");
  write(path("boxes.txt"), "# cx cy cz l w h yaw\n0 0 0 4 2 1.5 0.3\n1000 0 0 4 2 1.5 0\n");
  ASSERT_EQ(run({"annotate", "--cell", "0.5", path("bev.lgrid"), path("boxes.txt"), path("ann.lgrid")}), 0)
      << err_.str();
  EXPECT_EQ(out_.str(), "boxes 2 drawn 1\n");
  ASSERT_EQ(run({"export-p5", path("ann.lgrid"), path("ann.pgm")}), 0);
  EXPECT_EQ(slurp(path("ann.pgm")).rfind("P5\n160 160\n255\n", 0), 0u);
  EXPECT_EQ(run({"annotate", path("bev.lgrid"), path("boxes.txt"), path("x.lgrid")}), 1);  // extent mismatch
}

TEST_F(CliTest, TrainDefaultLambdaIsFifty) {
  ASSERT_EQ(run({"train", "--steps", "3", "--channels", "2", "--grid", "16", "--csv", path("a.csv")}), 0)
      << err_.str();
  const std::string summary = out_.str();
  ASSERT_EQ(run({"train", "--steps", "3", "--channels", "2", "--grid", "16", "--lambda-cyc", "50", "--csv",
                 path("b.csv")}),
            0);
  EXPECT_EQ(out_.str(), summary);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  ASSERT_EQ(run({"train", "--steps", "3", "--channels", "2", "--grid", "16", "--lambda-cyc", "10", "--csv",
                 path("c.csv")}),
            0);
  EXPECT_NE(slurp(path("a.csv")), slurp(path("c.csv")));
  EXPECT_EQ(slurp(path("a.csv")).rfind("step,d_x,d_y,g_adv,f_adv,cyc_x,cyc_y,total\n0,", 0), 0u);
}

TEST_F(CliTest, TrainIsByteReproducibleAndCheckpointsLoad) {
  const std::vector<std::string> args{"train", "--steps", "4", "--channels", "2", "--grid", "16", "--seed", "5"};
  auto with = [&](const std::string& tag) {
    auto a = args;
    a.insert(a.end(), {"--csv", path(tag + ".csv"), "--checkpoint", path(tag + ".ckpt")});
    return a;
  };
  ASSERT_EQ(run(with("r1")), 0) << err_.str();
  ASSERT_EQ(run(with("r2")), 0);
  EXPECT_EQ(slurp(path("r1.csv")), slurp(path("r2.csv")));
  EXPECT_EQ(slurp(path("r1.ckpt")), slurp(path("r2.ckpt")));

  write_grid_file(path("x.lgrid"), random_grid(16, 16, 1));
  ASSERT_EQ(run({"eval", path("x.lgrid"), path("x.lgrid"), "--checkpoint", path("r1.ckpt"), "--channels", "2",
                 "--csv", path("eval.csv")}),
            0)
      << err_.str();
  EXPECT_NE(slurp(path("eval.csv")).find("# seed=0 config_hash="), std::string::npos);
}

TEST_F(CliTest, TrainSupervisedScenarioOneMatchesTrain) {
  ASSERT_EQ(run({"train-supervised", "--scenario", "1", "--steps", "3", "--channels", "2", "--grid", "16",
                 "--pretrain-steps", "2", "--translate-steps", "3", "--csv", path("s.csv")}),
            0)
      << err_.str();
  EXPECT_NE(out_.str().find("scenario 1 lambda_ref 0"), std::string::npos);
  ASSERT_EQ(run({"train", "--steps", "3", "--channels", "2", "--grid", "16", "--csv", path("t.csv")}), 0);
  std::istringstream s(slurp(path("s.csv"))), t(slurp(path("t.csv")));
  std::string sl, tl;
  std::getline(t, tl);
  std::vector<std::string> translate_rows;
  while (std::getline(s, sl)) {
    if (sl.rfind("2,", 0) == 0) translate_rows.push_back(sl);
  }
  ASSERT_EQ(translate_rows.size(), 3u);
  for (const std::string& row : translate_rows) {
    ASSERT_TRUE(std::getline(t, tl));
    // phase,step,d_x,...,cyc_y match step,d_x,...,cyc_y of the vanilla CSV.
    const std::string gan_fields = row.substr(2);
    const std::string vanilla = tl.substr(0, tl.rfind(','));
    EXPECT_EQ(gan_fields.substr(0, vanilla.size()), vanilla);
  }
}

TEST_F(CliTest, EvalDirectoriesAndIdenticalInputs) {
  fs::create_directories(path("p"));
  fs::create_directories(path("r"));
  for (int i = 0; i < 3; ++i) {
    const Grid g = random_grid(8, 8, i);
    write_grid_file(path("p/f" + std::to_string(i) + ".lgrid"), g);
    write_grid_file(path("r/f" + std::to_string(i) + ".lgrid"), g);
  }
  ASSERT_EQ(run({"eval", path("p"), path("r"), "--seed", "9"}), 0) << err_.str();
  EXPECT_NE(out_.str().find("f1.lgrid,0,1"), std::string::npos);
  EXPECT_NE(out_.str().find("mean,0,1"), std::string::npos);
  EXPECT_NE(out_.str().find("# seed=9"), std::string::npos);
}

TEST_F(CliTest, GradcheckReportsEveryCase) {
  ASSERT_EQ(run({"gradcheck", "--samples", "4"}), 0) << out_.str();
  EXPECT_NE(out_.str().find("supervised_translator_objective"), std::string::npos);
  EXPECT_NE(out_.str().find("max_relative_error "), std::string::npos);
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"frobnicate"}), 2);
  EXPECT_EQ(run({"encode-pgm", "in", "out"}), 2);  // missing --preset
  EXPECT_EQ(run({"train", "--steps", "ten"}), 2);
  EXPECT_EQ(run({"train-supervised", "--scenario", "7", "--steps", "1"}), 2);
  EXPECT_EQ(run({"bev", "--mode", "fancy", "a", "b"}), 2);
  write(path("c.txt"), "1 2 3\n");
  EXPECT_EQ(run({"encode-pgm", "--preset", "vlp16", path("c.txt"), path("o")}), 2);
  EXPECT_EQ(run({"--help"}), 0);
}

TEST_F(CliTest, InputErrorsExitOne) {
  EXPECT_EQ(run({"export-p5", path("missing.lgrid"), path("o.pgm")}), 1);
  write(path("bad.lgrid"), "LGRIDxv1");
  EXPECT_EQ(run({"export-p5", path("bad.lgrid"), path("o.pgm")}), 1);
  write(path("odd.bin"), std::string(17, '\0'));
  EXPECT_EQ(run({"encode-pgm", "--preset", "kitti64", path("odd.bin"), path("o.lgrid")}), 1);
  EXPECT_NE(err_.str().find("17 bytes"), std::string::npos);
  write(path("bad.txt"), "1 2 3\n4 five 6\n");
  EXPECT_EQ(run({"bev", path("bad.txt"), path("o.lgrid")}), 1);
  EXPECT_NE(err_.str().find("line 2"), std::string::npos);
}

TEST_F(CliTest, InstalledBinaryRuns) {
  const std::string cmd = std::string("\"") + LIDARGAN_CLI_PATH + "\" export-p5 \"" + path("nope") + "\" \"" +
                          path("o.pgm") + "\" 2> \"" + path("err.txt") + "\"";
  const int status = std::system(cmd.c_str());
  ASSERT_NE(status, -1);
  EXPECT_EQ(WEXITSTATUS(status), 1);
  EXPECT_EQ(slurp(path("err.txt")).rfind("error: ", 0), 0u);
}

}  // namespace
}  // namespace lidargan
