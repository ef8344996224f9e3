// Copyright 2026 The drrscore Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "drrscore/error.hpp"
#include "drrscore/phantom.hpp"
#include "drrscore/severity.hpp"
#include "drrscore/textio.hpp"
#include "drrscore/volume.hpp"
#include "test_util.hpp"

namespace drrscore::volume {
namespace {

using testing::TempDir;

Grid SmallGrid(int n) { return Grid::Centered({n, n, n}, {1.0, 1.0, 1.0}); }

CtVolume RandomVolume(std::mt19937_64& rng, Dims dims) {
  std::uniform_int_distribution<int> hu(-1024, 3071);
  std::uniform_real_distribution<double> sp(0.2, 3.0);
  Grid g{dims, {sp(rng), sp(rng), sp(rng)}, {sp(rng) - 10.0, sp(rng), -sp(rng)}};
  std::vector<std::int16_t> v(dims.count());
  for (auto& x : v) x = static_cast<std::int16_t>(hu(rng));
  return CtVolume(g, std::move(v));
}

TEST(TextIo, KeyValueParsesCommentsAndRepeats) {
  const auto doc = textio::ParseKeyValue("# c\n a = 1 \nb=two words\na = 3\n", "mem");
  EXPECT_EQ(doc.Get("b"), "two words");
  EXPECT_EQ(doc.GetAll("a").size(), 2u);
  EXPECT_THROW(textio::ParseKeyValue("novalue\n", "mem"), DataError);
}

TEST(TextIo, StrictNumbers) {
  EXPECT_DOUBLE_EQ(textio::ParseDouble("+2.5", "x"), 2.5);
  EXPECT_EQ(textio::ParseInt("-7", "x"), -7);
  EXPECT_THROW(textio::ParseDouble("2.5x", "x"), DataError);
  EXPECT_THROW(textio::ParseInt("1.0", "x"), DataError);
  EXPECT_THROW(textio::ParseDouble("", "x"), DataError);
}

TEST(TextIo, LittleEndianCodecs) {
  const std::vector<std::int16_t> v{-1024, 3071, 0, -1};
  const auto bytes = textio::EncodeInt16LE(v);
  ASSERT_EQ(bytes.size(), 8u);
  EXPECT_EQ(bytes[0], 0x00);
  EXPECT_EQ(bytes[1], 0xFC);  // -1024 = 0xFC00
  EXPECT_EQ(textio::DecodeInt16LE(bytes), v);
  const std::vector<float> f{1.0f, -0.5f};
  EXPECT_EQ(textio::DecodeFloat32LE(textio::EncodeFloat32LE(f)), f);
}

TEST(Volume, AllAirTwoCubedRoundTrip) {
  TempDir dir;
  const CtVolume v(SmallGrid(2), static_cast<std::int16_t>(-1000));
  SaveVolume(v, dir / "air");
  const CtVolume back = LoadVolume(dir / "air");
  ASSERT_EQ(back.values().size(), 8u);
  for (auto x : back.values()) EXPECT_EQ(x, -1000);
  EXPECT_EQ(back, v);
}

TEST(Volume, ExtremeValuesPreserved) {
  TempDir dir;
  CtVolume v(SmallGrid(3), static_cast<std::int16_t>(0));
  v.at(0, 0, 0) = -1024;
  v.at(2, 2, 2) = 3071;
  v.at(1, 2, 0) = -32768;
  v.at(2, 0, 1) = 32767;
  SaveVolume(v, dir / "x");
  EXPECT_EQ(LoadVolume(dir / "x"), v);
}

TEST(Volume, RandomRoundTripsAreBitExact) {
  TempDir dir;
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> n(1, 16);
  for (int trial = 0; trial < 100; ++trial) {
    const Dims d = trial == 0 ? Dims{16, 16, 16} : Dims{n(rng), n(rng), n(rng)};
    const CtVolume v = RandomVolume(rng, d);
    SaveVolume(v, dir / "r");
    ASSERT_EQ(LoadVolume(dir / "r"), v) << "trial " << trial;
  }
}

TEST(Volume, ShortPayloadIsSizeMismatch) {
  TempDir dir;
  const CtVolume v(Grid::Centered({64, 64, 64}, {1, 1, 1}), static_cast<std::int16_t>(5));
  SaveVolume(v, dir / "big");
  auto bytes = textio::ReadBytes(dir / "big.raw");
  bytes.resize(bytes.size() - 2);
  textio::WriteBytes(dir / "big.raw", bytes);
  EXPECT_THROW(LoadVolume(dir / "big"), DataError);
}

TEST(Volume, MissingFileAndBadSpacing) {
  TempDir dir;
  EXPECT_THROW(LoadVolume(dir / "nothing"), DataError);
  const CtVolume v(SmallGrid(2), static_cast<std::int16_t>(0));
  SaveVolume(v, dir / "v");
  testing::Spit(dir / "v.meta", "dims = 2 2 2\nspacing_mm = 1 0 1\norigin_mm = 0 0 0\ndtype = int16le\n");
  EXPECT_THROW(LoadVolume(dir / "v"), DataError);
  EXPECT_THROW(CtVolume(Grid{{2, 2, 2}, {1, -1, 1}, {}}, static_cast<std::int16_t>(0)),
               std::invalid_argument);
}

TEST(Volume, MaskRoundTrip) {
  TempDir dir;
  std::mt19937_64 rng(5);
  VoxelMask m(Grid::Centered({7, 5, 3}, {0.5, 1, 2}));
  for (std::size_t i = 0; i < m.bits().size(); ++i) m.set(i, rng() & 1);
  SaveMask(m, dir / "m");
  EXPECT_TRUE(std::filesystem::exists(dir / "m.mask.raw"));
  EXPECT_EQ(LoadMask(dir / "m"), m);
}

TEST(Volume, CenteredGridBounds) {
  const Grid g = Grid::Centered({4, 2, 1}, {2, 1, 3});
  EXPECT_DOUBLE_EQ(g.BoundsMin().x, -4.0);
  EXPECT_DOUBLE_EQ(g.BoundsMax().x, 4.0);
  EXPECT_DOUBLE_EQ(g.BoundsMin().z, -1.5);
  EXPECT_DOUBLE_EQ(g.VoxelCenter(0, 0, 0).x, -3.0);
}

PhantomSpec SmallSpec() {
  PhantomSpec s;
  s.grid = Grid::Centered({64, 64, 64}, {1, 1, 1});
  s.body = {{0, 0, 0}, {30, 24, 30}};
  s.lungs = {Ellipsoid{{-12, 0, 0}, {9, 14, 20}}, Ellipsoid{{12, 0, 0}, {9, 14, 20}}};
  s.bones.push_back({BoneShape::Kind::kCylinder, {0, 18, 0}, {3, 3, 28}, 2, kBoneHu});
  s.time_points = 4;
  return s;
}

TEST(Phantom, NoLesionsGivesEmptyLesionMaskAndZeroRatio) {
  const auto f = GeneratePhantom(SmallSpec(), 0);
  EXPECT_TRUE(f.lesion.empty());
  EXPECT_GT(f.lungs.count(), 0u);
  EXPECT_DOUBLE_EQ(severity::VolumeRatio(f.lesion, f.lungs), 0.0);
}

TEST(Phantom, PrecedenceAndValues) {
  PhantomSpec s = SmallSpec();
  s.lesions.push_back({{-12, 0, 0}, 4.0, kLesionHu, 1.0});
  s.bed = Bed{{-30, 26, -30}, {30, 29, 30}, 100};
  const auto f = GeneratePhantom(s, 0);
  const Grid& g = s.grid;
  const auto at = [&](double x, double y, double z) {
    const int i = static_cast<int>(std::lround(x - g.origin.x));
    const int j = static_cast<int>(std::lround(y - g.origin.y));
    const int k = static_cast<int>(std::lround(z - g.origin.z));
    return f.volume.at(i, j, k);
  };
  EXPECT_EQ(at(-12.5, 0.5, 0.5), kLesionHu);
  EXPECT_EQ(at(-12.5, 8.5, 0.5), kLungHu);
  EXPECT_EQ(at(0.5, 18.5, 0.5), kBoneHu);
  EXPECT_EQ(at(0.5, -20.5, 0.5), kSoftTissueHu);
  EXPECT_EQ(at(0.5, 27.5, 0.5), 100);
  EXPECT_EQ(at(-31.5, -31.5, -31.5), kAirHu);
  EXPECT_TRUE(f.lesion.SubsetOf(f.lungs));
}

// Voxel counts against the analytic sphere volume for g = 1.26 (volume
// doubling per step).
TEST(Phantom, LesionVolumeDoublesWithGrowth126) {
  PhantomSpec s = SmallSpec();
  const double r0 = 5.0;
  s.lesions.push_back({{-12, 0, 0}, r0, kLesionHu, 1.26});
  const auto f0 = GeneratePhantom(s, 0);
  const auto f1 = GeneratePhantom(s, 1);
  const double n0 = static_cast<double>(f0.lesion.count());
  const double n1 = static_cast<double>(f1.lesion.count());
  const auto sphere = [](double r) { return 4.0 / 3.0 * std::numbers::pi * r * r * r; };
  EXPECT_NEAR(n0, sphere(r0), 0.10 * sphere(r0));
  EXPECT_NEAR(n1, sphere(r0 * 1.26), 0.10 * sphere(r0 * 1.26));
  EXPECT_NEAR(n1 / n0, 2.0, 0.2);
  EXPECT_TRUE(f1.lesion.SubsetOf(f1.lungs));
}

TEST(Phantom, LesionCountNonDecreasingAndContained) {
  PhantomSpec s = SmallSpec();
  s.lesions.push_back({{-12, 2, 3}, 3.0, kLesionHu, 1.3});
  s.lesions.push_back({{13, -3, -5}, 2.0, kLesionHu, 1.5});
  std::size_t prev = 0;
  for (int t = 0; t < s.time_points; ++t) {
    const auto f = GeneratePhantom(s, t);
    EXPECT_GE(f.lesion.count(), prev);
    prev = f.lesion.count();
    EXPECT_TRUE(f.lesion.SubsetOf(f.lungs));
  }
}

TEST(Phantom, InvalidSpecsAndTimes) {
  PhantomSpec s = SmallSpec();
  EXPECT_THROW(GeneratePhantom(s, 4), std::invalid_argument);
  EXPECT_THROW(GeneratePhantom(s, -1), std::invalid_argument);

  PhantomSpec outside = SmallSpec();
  outside.lungs[0].semi_axes = {9, 30, 20};
  EXPECT_THROW(outside.Validate(), std::invalid_argument);

  PhantomSpec off_lung = SmallSpec();
  off_lung.lesions.push_back({{0, -20, 0}, 2.0, kLesionHu, 1.1});
  EXPECT_THROW(off_lung.Validate(), std::invalid_argument);

  PhantomSpec bad_growth = SmallSpec();
  bad_growth.lesions.push_back({{-12, 0, 0}, 2.0, kLesionHu, 0.0});
  EXPECT_THROW(bad_growth.Validate(), std::invalid_argument);

  PhantomSpec bed_in_body = SmallSpec();
  bed_in_body.bed = Bed{{-5, 20, -5}, {5, 28, 5}, 100};
  EXPECT_THROW(bed_in_body.Validate(), std::invalid_argument);
}

TEST(Phantom, SpecTextRoundTrip) {
  PhantomSpec s = SmallSpec();
  s.lesions.push_back({{-12, 0, 0}, 4.0, -150, 1.2});
  s.bed = Bed{{-30, 26, -30}, {30, 29, 30}, 90};
  const std::string text = FormatPhantomSpec(s);
  const PhantomSpec back = ParsePhantomSpec(textio::ParseKeyValue(text, "mem"));
  EXPECT_EQ(FormatPhantomSpec(back), text);
  EXPECT_EQ(GeneratePhantom(back, 2).volume, GeneratePhantom(s, 2).volume);
  EXPECT_THROW(ParsePhantomSpec(textio::ParseKeyValue(text + "colour = red\n", "mem")), DataError);
}

}  // namespace
}  // namespace drrscore::volume
