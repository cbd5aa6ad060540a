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

#include <array>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "lidargan/checkpoint.hpp"
#include "lidargan/dataset_io.hpp"
#include "lidargan/models.hpp"
#include "lidargan/sampler.hpp"
#include "lidargan/synthetic.hpp"

namespace lidargan {
namespace {

std::vector<std::byte> le_floats(std::initializer_list<float> values) {
  std::vector<std::byte> out;
  for (float f : values) {
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((u >> (8 * i)) & 0xffu));
  }
  return out;
}

std::vector<std::byte> to_bytes(const std::string& s) {
  const auto b = std::as_bytes(std::span<const char>(s.data(), s.size()));
  return {b.begin(), b.end()};
}

std::string grid_file(const Grid& g) {
  std::ostringstream out;
  save_grid(g, out);
  return out.str();
}

// KITTI

TEST(KittiBin, HandEncodedRecord) {
  const std::vector<std::byte> raw{
      std::byte{0x00}, std::byte{0x00}, std::byte{0x80}, std::byte{0x3f},   // 1.0
      std::byte{0x00}, std::byte{0x00}, std::byte{0x00}, std::byte{0x40},   // 2.0
      std::byte{0x00}, std::byte{0x00}, std::byte{0x40}, std::byte{0x40},   // 3.0
      std::byte{0x00}, std::byte{0x00}, std::byte{0x00}, std::byte{0x3f}};  // 0.5
  const KittiFrame f = parse_kitti_bin(raw);
  ASSERT_EQ(f.cloud.points.size(), 1u);
  EXPECT_EQ(f.cloud.points[0], (Point3{1.0, 2.0, 3.0, 0.5}));
  EXPECT_EQ(f.rejected_records, 0u);
}

TEST(KittiBin, EmptyBufferIsEmptyCloud) {
  const KittiFrame f = parse_kitti_bin({});
  EXPECT_TRUE(f.cloud.points.empty());
}

TEST(KittiBin, LengthNotMultipleOf16Throws) {
  const std::vector<std::byte> raw(17);
  try {
    parse_kitti_bin(raw);
    FAIL() << "expected MalformedRecordError";
  } catch (const MalformedRecordError& e) {
    EXPECT_EQ(e.byte_count(), 17u);
  }
  EXPECT_THROW(parse_kitti_bin(std::vector<std::byte>(15)), MalformedRecordError);
}

TEST(KittiBin, NonFiniteRecordsRejectedAndCounted) {
  const float nan = std::numeric_limits<float>::quiet_NaN();
  const float inf = std::numeric_limits<float>::infinity();
  const auto raw = le_floats({1, 1, 1, 0.1f, nan, 0, 0, 0, 0, inf, 0, 0, 2, 2, 2, nan, 3, 3, 3, 0.3f});
  const KittiFrame f = parse_kitti_bin(raw);
  EXPECT_EQ(f.rejected_records, 3u);
  ASSERT_EQ(f.cloud.points.size(), 2u);
  EXPECT_EQ(f.cloud.points[1].x, 3.0);
}

TEST(KittiBin, ReflectanceClampedIntoUnitInterval) {
  const KittiFrame f = parse_kitti_bin(le_floats({0, 0, 0, -0.5f, 0, 0, 0, 7.0f}));
  EXPECT_EQ(*f.cloud.points[0].intensity, 0.0);
  EXPECT_EQ(*f.cloud.points[1].intensity, 1.0);
}

TEST(KittiBin, SerializeRoundTrip) {
  CounterRng rng(3);
  PointCloud cloud;
  for (int i = 0; i < 257; ++i) {
    cloud.points.push_back({static_cast<float>(rng.uniform(-80, 80)), static_cast<float>(rng.uniform(-80, 80)),
                            static_cast<float>(rng.uniform(-3, 3)), static_cast<float>(rng.uniform01())});
  }
  const auto bytes = serialize_kitti_bin(cloud);
  EXPECT_EQ(bytes.size(), 257u * 16u);
  EXPECT_EQ(parse_kitti_bin(bytes).cloud, cloud);
}

// CARLA ASCII

TEST(CarlaPoints, Examples) {
  EXPECT_TRUE(parse_carla_points("").points.empty());
  const PointCloud c = parse_carla_points("1.5 -2.0 0.25\n");
  ASSERT_EQ(c.points.size(), 1u);
  EXPECT_EQ(c.points[0], (Point3{1.5, -2.0, 0.25, std::nullopt}));
  try {
    parse_carla_points("1 2 x\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
}

TEST(CarlaPoints, BlankLinesTabsAndCrlf) {
  const PointCloud c = parse_carla_points("\n  1\t2 3\r\n\n4 5 6");
  ASSERT_EQ(c.points.size(), 2u);
  EXPECT_EQ(c.points[1].z, 6.0);
}

TEST(CarlaPoints, ErrorsCarryLineNumber) {
  for (const auto& [text, line] : std::vector<std::pair<std::string, std::size_t>>{
           {"1 2 3\n1 2\n", 2}, {"1 2 3\n\n1 2 3 4\n", 3}, {"nan 0 0\n", 1}, {"1 2 3\n1e999 0 0", 2}}) {
    try {
      parse_carla_points(text);
      ADD_FAILURE() << text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), line) << text;
    }
  }
}

TEST(CarlaPoints, FormatRoundTripsExactly) {
  CounterRng rng(21);
  PointCloud cloud;
  for (int i = 0; i < 300; ++i) {
    cloud.points.push_back({rng.uniform(-1e3, 1e3), rng.uniform(-1e-3, 1e-3), rng.uniform(-5, 5), std::nullopt});
  }
  EXPECT_EQ(parse_carla_points(format_carla_points(cloud)), cloud);
}

// GridFile

TEST(GridFile, RoundTripIsBitExact) {
  CounterRng rng(1);
  Grid g(64, 1024);
  for (float& v : g.values()) v = static_cast<float>(rng.uniform01());
  g.at(0, 0) = 1.0f;
  g.at(0, 1) = 0.0f;
  const std::string bytes = grid_file(g);
  EXPECT_EQ(bytes.size(), 16u + 64u * 1024u * 4u);
  EXPECT_EQ(bytes.substr(0, 8), std::string("LGRID\0v1", 8));
  EXPECT_EQ(load_grid(to_bytes(bytes)), g);
  std::istringstream in(bytes);
  EXPECT_EQ(load_grid(in), g);
}

TEST(GridFile, HeaderLayout) {
  const std::string bytes = grid_file(Grid(2, 3, 0.5f));
  const std::string header("LGRID\0v1\x02\0\0\0\x03\0\0\0", 16);
  EXPECT_EQ(bytes.substr(0, 16), header);
}

TEST(GridFile, TruncationAndTrailingBytes) {
  const std::string bytes = grid_file(Grid(4, 4, 0.25f));
  EXPECT_THROW(load_grid(to_bytes(bytes.substr(0, 10))), TruncationError);
  EXPECT_THROW(load_grid(to_bytes(bytes.substr(0, bytes.size() - 1))), TruncationError);
  EXPECT_THROW(load_grid(to_bytes(bytes + "x")), FormatError);
}

TEST(GridFile, BadMagicEmptyAndOverflow) {
  std::string bytes = grid_file(Grid(1, 1, 0.0f));
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(load_grid(to_bytes(bad)), FormatError);

  std::string empty("LGRID\0v1\0\0\0\0\x05\0\0\0", 16);
  EXPECT_THROW(load_grid(to_bytes(empty)), FormatError);
  EXPECT_THROW(grid_file(Grid()), FormatError);

  std::string huge("LGRID\0v1\xff\xff\xff\xff\xff\xff\xff\xff", 16);
  EXPECT_THROW(load_grid(to_bytes(huge)), OverflowError);
}

TEST(GridFile, OutOfRangeValuesRejected) {
  EXPECT_THROW(grid_file(Grid(1, 2, 1.5f)), FormatError);
  std::string bytes = grid_file(Grid(1, 1, 0.0f));
  const float nan = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(bytes.data() + 16, &nan, 4);
  EXPECT_THROW(load_grid(to_bytes(bytes)), FormatError);
}

// P5

TEST(Graymap, HeaderAndPixelValues) {
  Grid g(2, 3);
  g.at(0, 1) = 1.0f;
  g.at(0, 2) = 0.5f;
  g.at(1, 0) = 1.0f / 255.0f;
  std::ostringstream out;
  export_graymap(g, out);
  const std::string expect = std::string("P5\n3 2\n255\n") + std::string("\x00\xff\x80\x01\x00\x00", 6);
  EXPECT_EQ(out.str(), expect);
}

TEST(Graymap, ZerosAndOnes) {
  for (float v : {0.0f, 1.0f}) {
    std::ostringstream out;
    export_graymap(Grid(4, 5, v), out);
    const std::string s = out.str();
    ASSERT_EQ(s.size(), std::string("P5\n5 4\n255\n").size() + 20);
    for (std::size_t i = s.size() - 20; i < s.size(); ++i) {
      EXPECT_EQ(static_cast<unsigned char>(s[i]), v == 0.0f ? 0 : 255);
    }
  }
}

// Sampler

TEST(UnpairedSampler, DeterministicPerSeed) {
  const std::vector<int> x{0, 1, 2, 3, 4, 5, 6, 7}, y{10, 11, 12};
  UnpairedSampler<int> a(x, y, 42, 5), b(x, y, 42, 5), c(x, y, 43, 5);
  bool differs = false;
  for (int i = 0; i < 20; ++i) {
    const auto ba = a.sample_batch(), bb = b.sample_batch(), bc = c.sample_batch();
    EXPECT_EQ(ba, bb);
    differs = differs || ba != bc;
    EXPECT_EQ(ba.first.size(), 5u);
    for (int v : ba.second) EXPECT_TRUE(v >= 10 && v <= 12);
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(a.calls(), 20u);
}

TEST(UnpairedSampler, SingleFrameDomains) {
  UnpairedSampler<int> s({7}, {9}, 0, 3);
  const auto [bx, by] = s.sample_batch();
  EXPECT_EQ(bx, (std::vector<int>{7, 7, 7}));
  EXPECT_EQ(by, (std::vector<int>{9, 9, 9}));
}

TEST(UnpairedSampler, RejectsEmptyDomainOrBatch) {
  EXPECT_THROW(UnpairedSampler<int>({}, {1}, 0, 1), ConfigError);
  EXPECT_THROW(UnpairedSampler<int>({1}, {}, 0, 1), ConfigError);
  EXPECT_THROW(UnpairedSampler<int>({1}, {1}, 0, 0), ConfigError);
}

TEST(UnpairedSampler, UniformChiSquare) {
  std::vector<int> frames(16);
  for (int i = 0; i < 16; ++i) frames[i] = i;
  UnpairedSampler<int> s(frames, frames, 2026, 100);
  std::array<double, 16> cx{}, cy{};
  for (int call = 0; call < 1000; ++call) {
    const auto [bx, by] = s.sample_batch();
    for (int v : bx) cx[v] += 1;
    for (int v : by) cy[v] += 1;
  }
  for (const auto* counts : {&cx, &cy}) {
    const double expected = 1e5 / 16.0;
    double chi2 = 0.0;
    for (double c : *counts) chi2 += (c - expected) * (c - expected) / expected;
    EXPECT_GT(chi2, 4.6009);
    EXPECT_LT(chi2, 32.8013);
  }
}

TEST(UnpairedSampler, DomainsUseIndependentStreams) {
  std::vector<int> frames(64);
  for (int i = 0; i < 64; ++i) frames[i] = i;
  UnpairedSampler<int> s(frames, frames, 5, 64);
  int same = 0;
  for (int call = 0; call < 50; ++call) {
    const auto [bx, by] = s.sample_batch();
    for (std::size_t i = 0; i < bx.size(); ++i) same += bx[i] == by[i];
  }
  // 3200 pairs, expected 50 coincidences.
  EXPECT_LT(same, 100);
}

// Synthetic task

TEST(SyntheticTask, ShapesAndDeterminism) {
  SyntheticTaskConfig cfg;
  cfg.frames_per_domain = 8;
  cfg.heldout_per_domain = 3;
  const SyntheticTask a = make_synthetic_task(cfg, 7), b = make_synthetic_task(cfg, 7);
  EXPECT_EQ(a.x.frames, b.x.frames);
  EXPECT_EQ(a.y.frames, b.y.frames);
  EXPECT_EQ(a.x.frames.size(), 8u);
  EXPECT_EQ(a.heldout_y.ground_truth.size(), 3u);
  for (const Grid& g : a.y.frames) {
    EXPECT_EQ(g.rows(), 32u);
    EXPECT_EQ(g.cols(), 32u);
  }
  EXPECT_EQ(a.x.frames, a.x.ground_truth);
  EXPECT_NE(a.y.frames, a.y.ground_truth);
  EXPECT_NE(make_synthetic_task(cfg, 8).x.frames, a.x.frames);
}

// Checkpoint

TEST(Checkpoint, RoundTripNarrowsToFloat) {
  Network g = make_generator("G", 2, CounterRng(1));
  Network d = make_discriminator("D_X", 2, CounterRng(2));
  std::array<Network*, 2> nets{&g, &d};
  std::stringstream buf;
  save_checkpoint(buf, nets);

  Network g2 = make_generator("G", 2, CounterRng(9));
  Network d2 = make_discriminator("D_X", 2, CounterRng(9));
  std::array<Network*, 2> nets2{&g2, &d2};
  std::istringstream in(buf.str());
  load_checkpoint(in, nets2);
  const auto p1 = g.params(), p2 = g2.params();
  for (std::size_t i = 0; i < p1.size(); ++i) {
    for (std::size_t j = 0; j < p1[i]->value.size(); ++j) {
      EXPECT_EQ(p2[i]->value[j], static_cast<double>(static_cast<float>(p1[i]->value[j])));
    }
  }
  std::istringstream again(buf.str());
  EXPECT_EQ(read_checkpoint(again).size(), p1.size() + d.params().size());
}

TEST(Checkpoint, Errors) {
  Network g = make_generator("G", 2, CounterRng(1));
  std::array<Network*, 1> nets{&g};
  std::stringstream buf;
  save_checkpoint(buf, nets);
  const std::string bytes = buf.str();

  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(read_checkpoint(truncated), TruncationError);
  std::string bad = bytes;
  bad[1] = '?';
  std::istringstream bad_magic(bad);
  EXPECT_THROW(read_checkpoint(bad_magic), FormatError);

  Network wide = make_generator("G", 3, CounterRng(1));
  std::array<Network*, 1> wide_nets{&wide};
  std::istringstream mismatch(bytes);
  EXPECT_THROW(load_checkpoint(mismatch, wide_nets), FormatError);

  Network other = make_generator("F", 2, CounterRng(1));
  std::array<Network*, 1> other_nets{&other};
  std::istringstream missing(bytes);
  EXPECT_THROW(load_checkpoint(missing, other_nets), FormatError);
}

}  // namespace
}  // namespace lidargan
