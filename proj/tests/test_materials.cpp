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

#include <random>

#include "drrscore/materials.hpp"
#include "drrscore/phantom.hpp"

namespace drrscore::materials {
namespace {

using volume::Grid;

volume::PhantomSpec BodyWithBed() {
  volume::PhantomSpec s;
  s.grid = Grid::Centered({48, 48, 40}, {1, 1, 1});
  s.body = {{0, -3, 0}, {20, 15, 17}};
  s.lungs = {volume::Ellipsoid{{-8, -3, 0}, {6, 9, 12}}, volume::Ellipsoid{{8, -3, 0}, {6, 9, 12}}};
  s.bones.push_back({volume::BoneShape::Kind::kCylinder, {0, 8, 0}, {2, 2, 8}, 2, volume::kBoneHu});
  s.bed = volume::Bed{{-22, 15, -19}, {22, 19, 19}, 100};
  return s;
}

TEST(Decompose, UniformAirIsAllAir) {
  const CtVolume v(Grid::Centered({4, 4, 4}, {1, 1, 1}), static_cast<std::int16_t>(-1000));
  const auto m = Decompose(v, -500, 300);
  EXPECT_EQ(m.air.count(), 64u);
  EXPECT_TRUE(m.soft.empty());
  EXPECT_TRUE(m.bone.empty());
}

TEST(Decompose, OneVoxelPerBand) {
  const CtVolume v(Grid::Centered({3, 1, 1}, {1, 1, 1}), std::vector<std::int16_t>{-1000, 0, 700});
  const auto m = Decompose(v);
  EXPECT_EQ(m.At(0), Material::kAir);
  EXPECT_EQ(m.At(1), Material::kSoft);
  EXPECT_EQ(m.At(2), Material::kBone);
}

TEST(Decompose, BoundariesAreInclusive) {
  const CtVolume v(Grid::Centered({4, 1, 1}, {1, 1, 1}),
                   std::vector<std::int16_t>{-500, -499, 299, 300});
  const auto m = Decompose(v, -500, 300);
  EXPECT_EQ(m.At(0), Material::kAir);
  EXPECT_EQ(m.At(1), Material::kSoft);
  EXPECT_EQ(m.At(2), Material::kSoft);
  EXPECT_EQ(m.At(3), Material::kBone);
  EXPECT_THROW(Decompose(v, 300, 300), std::invalid_argument);
}

TEST(Decompose, RandomVolumesArePartitions) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> hu(-1024, 3071);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::int16_t> vals(10 * 9 * 8);
    for (auto& x : vals) x = static_cast<std::int16_t>(hu(rng));
    const CtVolume v(Grid::Centered({10, 9, 8}, {1, 1, 1}), vals);
    const auto m = Decompose(v);
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const int n = m.air.test(i) + m.soft.test(i) + m.bone.test(i);
      ASSERT_EQ(n, 1);
      const Material want = vals[i] <= -500 ? Material::kAir
                            : vals[i] >= 300 ? Material::kBone
                                             : Material::kSoft;
      ASSERT_EQ(m.At(i), want);
    }
    EXPECT_TRUE(m.IsPartition());
  }
}

TEST(ChestMask, FillsLungCavitiesAndDropsBed) {
  const auto spec = BodyWithBed();
  const auto f = volume::GeneratePhantom(spec, 0);
  const auto chest = ChestMask(Decompose(f.volume));
  const Grid& g = spec.grid;
  std::size_t mismatches = 0;
  for (int k = 0; k < g.dims.nz; ++k) {
    for (int j = 0; j < g.dims.ny; ++j) {
      for (int i = 0; i < g.dims.nx; ++i) {
        const bool body = spec.body.Contains(g.VoxelCenter(i, j, k));
        mismatches += body != chest.test(i, j, k) ? 1 : 0;
      }
    }
  }
  EXPECT_EQ(mismatches, 0u);
  EXPECT_TRUE(f.lungs.SubsetOf(chest));
}

TEST(ChestMask, AllAirIsEmpty) {
  const CtVolume v(Grid::Centered({5, 5, 5}, {1, 1, 1}), static_cast<std::int16_t>(-1000));
  EXPECT_TRUE(ChestMask(Decompose(v)).empty());
}

TEST(ApplyChestMask, FullEmptyAndBedRemoval) {
  const auto spec = BodyWithBed();
  const auto f = volume::GeneratePhantom(spec, 0);
  VoxelMask full(spec.grid);
  for (std::size_t i = 0; i < full.bits().size(); ++i) full.set(i);
  EXPECT_EQ(ApplyChestMask(f.volume, full), f.volume);
  const auto none = ApplyChestMask(f.volume, VoxelMask(spec.grid));
  for (auto v : none.values()) ASSERT_EQ(v, -1000);

  const auto chest = ChestMask(Decompose(f.volume));
  const auto out = ApplyChestMask(f.volume, chest);
  const Grid& g = spec.grid;
  for (int k = 0; k < g.dims.nz; ++k) {
    for (int j = 0; j < g.dims.ny; ++j) {
      for (int i = 0; i < g.dims.nx; ++i) {
        const auto p = g.VoxelCenter(i, j, k);
        if (spec.bed->Contains(p)) ASSERT_EQ(out.at(i, j, k), -1000);
        if (spec.body.Contains(p)) ASSERT_EQ(out.at(i, j, k), f.volume.at(i, j, k));
      }
    }
  }
  // Re-deriving from the masked volume keeps the same region.
  EXPECT_TRUE(chest.SubsetOf(ChestMask(Decompose(out))));
  EXPECT_THROW(ApplyChestMask(f.volume, VoxelMask(Grid::Centered({2, 2, 2}, {1, 1, 1}))),
               std::invalid_argument);
}

TEST(FillHoles, SupersetOnRandomMasks) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    VoxelMask m(Grid::Centered({9, 8, 7}, {1, 1, 1}));
    for (std::size_t i = 0; i < m.bits().size(); ++i) m.set(i, (rng() % 3) == 0);
    EXPECT_TRUE(m.SubsetOf(FillHoles(m)));
  }
}

TEST(FillHoles, ClosedShellIsFilled) {
  VoxelMask m(Grid::Centered({5, 5, 5}, {1, 1, 1}));
  const auto& g = m.grid();
  for (int k = 1; k <= 3; ++k) {
    for (int j = 1; j <= 3; ++j) {
      for (int i = 1; i <= 3; ++i) {
        if (i == 2 && j == 2 && k == 2) continue;
        m.set(g.Index(i, j, k));
      }
    }
  }
  const auto filled = FillHoles(m);
  EXPECT_TRUE(filled.test(2, 2, 2));
  EXPECT_EQ(filled.count(), 27u);
}

TEST(LargestComponent, KeepsBiggestSixConnectedPiece) {
  VoxelMask m(Grid::Centered({6, 3, 3}, {1, 1, 1}));
  const auto& g = m.grid();
  m.set(g.Index(0, 0, 0));
  m.set(g.Index(1, 1, 1));  // diagonal to (0,0,0): separate under 6-connectivity
  m.set(g.Index(2, 1, 1));
  m.set(g.Index(3, 1, 1));
  const auto big = LargestComponent(m);
  EXPECT_EQ(big.count(), 3u);
  EXPECT_FALSE(big.test(0, 0, 0));
}

}  // namespace
}  // namespace drrscore::materials
