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
#include <random>

#include "drrscore/error.hpp"
#include "drrscore/projector.hpp"
#include "drrscore/siddon.hpp"
#include "test_util.hpp"

#ifndef DRRSCORE_DATA_DIR
#error "DRRSCORE_DATA_DIR must point at the bundled tables"
#endif

namespace drrscore::projector {
namespace {

using materials::Decompose;
using materials::Material;
using volume::CtVolume;
using volume::Grid;

// Energies 10 and 200 keV with flat coefficients: soft 0.02 cm^2/g at
// 1 g/cm^3 gives 0.02 1/cm; air has zero density.
AttenuationTable FlatTable() {
  return AttenuationTable({10.0, 200.0}, {std::vector<double>{1.0, 1.0}, {0.02, 0.02}, {0.5, 0.5}},
                          {0.0, 1.0, 1.9});
}

Spectrum Mono60() { return Spectrum({{60.0, 1e5}}); }

// 200 mm cube of 5 mm voxels; soft tissue for |y| < thickness_mm / 2.
CtVolume Slab(double thickness_mm) {
  const Grid g = Grid::Centered({40, 40, 40}, {5, 5, 5});
  CtVolume v(g, static_cast<std::int16_t>(-1000));
  for (int k = 0; k < 40; ++k) {
    for (int j = 0; j < 40; ++j) {
      for (int i = 0; i < 40; ++i) {
        if (std::abs(g.VoxelCenter(i, j, k).y) < thickness_mm / 2) v.at(i, j, k) = 40;
      }
    }
  }
  return v;
}

DetectorGeometry Parallel(int n, double pitch, View view = View::kPA) {
  DetectorGeometry d;
  d.width = n;
  d.height = n;
  d.pixel_mm = pitch;
  d.mode = BeamMode::kParallel;
  d.view = view;
  return d;
}

TEST(Siddon, AxisAlignedRayThroughSoftCube) {
  const CtVolume v(Grid::Centered({100, 100, 100}, {1, 1, 1}), static_cast<std::int16_t>(40));
  const auto masks = Decompose(v);
  const auto l = TraceRay(masks, {{-80.0, 0.3, -0.2}, {1.0, 0.0, 0.0}});
  EXPECT_NEAR(l.cm[1], 10.0, 1e-12);
  EXPECT_EQ(l.cm[0], 0.0);
  EXPECT_EQ(l.cm[2], 0.0);
}

TEST(Siddon, MissingRayIsZero) {
  const CtVolume v(Grid::Centered({8, 8, 8}, {1, 1, 1}), static_cast<std::int16_t>(40));
  const auto masks = Decompose(v);
  const auto l = TraceRay(masks, {{-20.0, 10.0, 0.0}, {1.0, 0.0, 0.0}});
  EXPECT_EQ(l.total(), 0.0);
  const auto away = TraceRay(masks, {{-20.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}});
  EXPECT_EQ(away.total(), 0.0);
}

// Dense midpoint sampling of the chord as an independent oracle.
std::array<double, 3> SampleOracle(const materials::MaterialMasks& m, const Vec3& o, const Vec3& d,
                                   int samples) {
  double t0 = 0.0;
  double t1 = 0.0;
  std::array<double, 3> out{};
  if (!ClipToBox(m.grid(), o, d, t0, t1)) return out;
  const Grid& g = m.grid();
  const Vec3 lo = g.BoundsMin();
  const double dt = (t1 - t0) / samples;
  for (int s = 0; s < samples; ++s) {
    const double t = t0 + (s + 0.5) * dt;
    const double p[3] = {o.x + t * d.x, o.y + t * d.y, o.z + t * d.z};
    int ijk[3];
    for (int a = 0; a < 3; ++a) {
      ijk[a] = std::clamp(static_cast<int>(std::floor((p[a] - lo[a]) / g.spacing[a])), 0, g.dims[a] - 1);
    }
    out[static_cast<int>(m.At(g.Index(ijk[0], ijk[1], ijk[2])))] += 0.1 * dt;
  }
  return out;
}

TEST(Siddon, RandomRaysMatchSamplingAndConserveLength) {
  std::mt19937_64 rng(21);
  const Grid g{{24, 20, 16}, {1.3, 0.9, 2.1}, {-7.0, 3.0, 1.5}};
  std::uniform_int_distribution<int> mat(0, 2);
  std::vector<std::int16_t> hu(g.dims.count());
  for (auto& x : hu) x = static_cast<std::int16_t>(std::array{-1000, 40, 700}[mat(rng)]);
  const auto masks = Decompose(CtVolume(g, hu));
  const Vec3 lo = g.BoundsMin();
  const Vec3 hi = g.BoundsMax();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int r = 0; r < 30; ++r) {
    const Vec3 target{lo.x + (hi.x - lo.x) * u(rng), lo.y + (hi.y - lo.y) * u(rng),
                      lo.z + (hi.z - lo.z) * u(rng)};
    Vec3 d{n(rng), n(rng), n(rng)};
    const double norm = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
    d = {d.x / norm, d.y / norm, d.z / norm};
    const Vec3 o{target.x - 100 * d.x, target.y - 100 * d.y, target.z - 100 * d.z};
    const auto l = TraceRay(masks, {o, d});
    const double chord_cm = 0.1 * ChordLength(g, o, d);
    EXPECT_NEAR(l.total(), chord_cm, 1e-9 * chord_cm);
    const auto oracle = SampleOracle(masks, o, d, 100000);
    for (int m = 0; m < 3; ++m) EXPECT_NEAR(l.cm[m], oracle[m], 2e-3 * chord_cm + 1e-9);
  }
}

TEST(Attenuation, LogLogInterpolation) {
  const AttenuationTable t({20.0, 80.0}, {std::vector<double>{1.0, 0.25}, {2.0, 0.5}, {8.0, 0.5}},
                           {0.001, 1.0, 2.0});
  // Geometric-mean energy gives the geometric mean coefficient.
  EXPECT_NEAR(t.MassAttenuation(Material::kAir, 40.0), 0.5, 1e-12);
  EXPECT_NEAR(t.MassAttenuation(Material::kBone, 40.0), 2.0, 1e-12);
  EXPECT_NEAR(t.LinearAttenuation(Material::kSoft, 40.0), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(t.MassAttenuation(Material::kSoft, 20.0), 2.0);
  EXPECT_TRUE(t.Covers(80.0));
  EXPECT_FALSE(t.Covers(81.0));
  EXPECT_THROW(AttenuationTable({20.0, 10.0}, {std::vector<double>{1, 1}, {1, 1}, {1, 1}}, {1, 1, 1}),
               std::invalid_argument);
}

TEST(Spectrum, InvariantsAndScaling) {
  EXPECT_THROW(Spectrum({{60.0, 1.0}, {50.0, 1.0}}), std::invalid_argument);
  EXPECT_THROW(Spectrum({{60.0, -1.0}}), std::invalid_argument);
  EXPECT_THROW(Spectrum({{60.0, 0.0}}), std::invalid_argument);
  EXPECT_THROW(Spectrum({{0.0, 1.0}}), std::invalid_argument);
  const Spectrum s({{50.0, 1.0}, {70.0, 3.0}});
  EXPECT_DOUBLE_EQ(s.unattenuated_signal(), 260.0);
  EXPECT_DOUBLE_EQ(s.ScaledTo(8.0).total_photons(), 8.0);
}

TEST(Spectrum, BundledTablesLoad) {
  const std::filesystem::path dir(DRRSCORE_DATA_DIR);
  const Spectrum s = ReadSpectrum(dir / "spectrum_120kV_4.3mmAl.tsv");
  EXPECT_NEAR(s.total_photons(), 1e5, 1e-6);
  EXPECT_EQ(s.bins().front().energy_kev, 20.0);
  EXPECT_EQ(s.bins().back().energy_kev, 120.0);
  const AttenuationTable t = ReadAttenuationTable(dir / "attenuation_nist.tsv");
  for (const auto& b : s.bins()) EXPECT_TRUE(t.Covers(b.energy_kev));
  EXPECT_GT(t.LinearAttenuation(Material::kBone, 60.0), t.LinearAttenuation(Material::kSoft, 60.0));

  testing::TempDir tmp;
  testing::Spit(tmp / "bad.tsv", "energy\tphotons\n60\t1\n");
  EXPECT_THROW(ReadSpectrum(tmp / "bad.tsv"), DataError);
  testing::Spit(tmp / "nod.tsv", "energy_keV\tair\tsoft\tbone\n20\t1\t1\t1\n40\t1\t1\t1\n");
  EXPECT_THROW(ReadAttenuationTable(tmp / "nod.tsv"), DataError);
}

TEST(Project, SlabMatchesBeerLambert) {
  const auto masks = Decompose(Slab(100.0));
  const auto img = Project(masks, Parallel(64, 4.0), Mono60(), FlatTable());
  const double i0 = Mono60().unattenuated_signal();
  int covered = 0;
  for (int row = 0; row < 64; ++row) {
    for (int col = 0; col < 64; ++col) {
      const double u = (col - 31.5) * 4.0;
      const double v = (row - 31.5) * 4.0;
      if (std::abs(u) < 100 && std::abs(v) < 100) {
        EXPECT_NEAR(img.at(col, row) / i0, std::exp(-0.2), 1e-6);
        ++covered;
      } else {
        EXPECT_DOUBLE_EQ(img.at(col, row), i0);
      }
    }
  }
  EXPECT_EQ(covered, 50 * 50);
}

TEST(Project, ThickerSlabIsDarker) {
  const auto det = Parallel(8, 4.0);
  const auto thin = Project(Decompose(Slab(50.0)), det, Mono60(), FlatTable());
  const auto thick = Project(Decompose(Slab(100.0)), det, Mono60(), FlatTable());
  EXPECT_LT(thick.at(4, 4), thin.at(4, 4));
}

TEST(Project, EmptyVolumeIsUnattenuatedEverywhere) {
  const CtVolume air(Grid::Centered({10, 10, 10}, {2, 2, 2}), static_cast<std::int16_t>(-1000));
  const Spectrum s({{30.0, 10.0}, {60.0, 20.0}});
  DetectorGeometry cone;
  cone.width = 16;
  cone.height = 12;
  cone.pixel_mm = 3.0;
  const auto img = Project(Decompose(air), cone, s, FlatTable());
  for (double v : img.values) EXPECT_DOUBLE_EQ(v, s.unattenuated_signal());
}

TEST(Project, ThreadCountDoesNotChangeOutput) {
  std::mt19937_64 rng(4);
  const Grid g = Grid::Centered({20, 20, 20}, {2, 2, 2});
  std::vector<std::int16_t> hu(g.dims.count());
  std::uniform_int_distribution<int> d(-1000, 1000);
  for (auto& x : hu) x = static_cast<std::int16_t>(d(rng));
  const auto masks = Decompose(CtVolume(g, hu));
  DetectorGeometry det;
  det.width = 40;
  det.height = 30;
  det.pixel_mm = 1.5;
  const AttenuationTable t = ReadAttenuationTable(std::filesystem::path(DRRSCORE_DATA_DIR) / "attenuation_nist.tsv");
  const Spectrum s({{40.0, 100.0}, {80.0, 50.0}});
  const auto one = Project(masks, det, s, t, 1);
  EXPECT_EQ(Project(masks, det, s, t, 3).values, one.values);
  EXPECT_EQ(Project(masks, det, s, t, 8).values, one.values);
}

TEST(Project, ParallelApIsMirroredPa) {
  const Grid g = Grid::Centered({24, 16, 20}, {2, 2, 2});
  CtVolume v(g, static_cast<std::int16_t>(-1000));
  for (int k = 2; k < 18; ++k) {
    for (int j = 3; j < 13; ++j) {
      for (int i = 1; i < 22; ++i) v.at(i, j, k) = 40;
    }
  }
  for (int k = 4; k < 9; ++k) {
    for (int j = 5; j < 9; ++j) {
      for (int i = 3; i < 8; ++i) v.at(i, j, k) = 700;  // off-centre block
    }
  }
  const auto masks = Decompose(v);
  const auto t = ReadAttenuationTable(std::filesystem::path(DRRSCORE_DATA_DIR) / "attenuation_nist.tsv");
  const Spectrum s({{60.0, 1e5}});
  const auto pa = Project(masks, Parallel(30, 1.7, View::kPA), s, t);
  const auto ap = Project(masks, Parallel(30, 1.7, View::kAP), s, t);
  bool asymmetric = false;
  for (int row = 0; row < 30; ++row) {
    for (int col = 0; col < 30; ++col) {
      EXPECT_NEAR(ap.at(col, row), pa.at(29 - col, row), 1e-9 * pa.at(29 - col, row));
      asymmetric |= std::abs(pa.at(col, row) - pa.at(29 - col, row)) > 1.0;
    }
  }
  EXPECT_TRUE(asymmetric);
}

TEST(Project, RejectsUncoveredEnergies) {
  const auto masks = Decompose(Slab(10.0));
  EXPECT_THROW(Project(masks, Parallel(4, 1.0), Spectrum({{300.0, 1.0}}), FlatTable()),
               std::invalid_argument);
}

TEST(MaskThickness, SlabThicknessInCm) {
  const auto masks = Decompose(Slab(100.0));
  const auto th = MaskThickness(masks.soft, Parallel(16, 16.0));
  EXPECT_NEAR(th.at(8, 8), 10.0, 1e-12);
  EXPECT_EQ(th.at(0, 0), 0.0);
  const auto fp = MaskFootprint(masks.soft, Parallel(16, 16.0));
  EXPECT_EQ(fp.at(8, 8), 1);
  EXPECT_EQ(fp.at(0, 0), 0);
}

Radiograph RandomImage(std::mt19937_64& rng, int w, int h) {
  DetectorGeometry g;
  g.width = w;
  g.height = h;
  Radiograph r{g, std::vector<double>(static_cast<std::size_t>(w) * h)};
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (auto& v : r.values) v = u(rng);
  return r;
}

TEST(Scatter, FractionZeroAndConstantAndEnergy) {
  std::mt19937_64 rng(9);
  Radiograph flat = RandomImage(rng, 200, 180);
  for (auto& v : flat.values) v = 7.0;
  const auto zero = EstimateScatter(flat, 0.0, 10.0);
  for (double v : zero.values) EXPECT_EQ(v, 0.0);
  const auto sc = EstimateScatter(flat, 0.1, 10.0);
  // Away from the zero-padded border the kernel sees only the constant.
  EXPECT_NEAR(sc.at(100, 90), 0.7, 1e-12);
  for (int trial = 0; trial < 10; ++trial) {
    const auto img = RandomImage(rng, 60, 50);
    const auto s = EstimateScatter(img, 0.25, 6.0);
    double a = 0.0;
    double b = 0.0;
    for (std::size_t i = 0; i < img.values.size(); ++i) {
      a += s.values[i];
      b += img.values[i];
    }
    EXPECT_LE(a, 0.25 * b * (1 + 1e-12));
  }
  EXPECT_THROW(EstimateScatter(flat, 1.0, 10.0), std::invalid_argument);
  EXPECT_THROW(EstimateScatter(flat, 0.1, 0.5), std::invalid_argument);
}

TEST(Noise, ZeroStaysZeroAndSeedDeterminism) {
  std::mt19937_64 rng(2);
  auto img = RandomImage(rng, 64, 48);
  img.values[5] = 0.0;
  const Spectrum s({{60.0, 1e4}});
  const double scale = s.unattenuated_signal() / 100.0;
  for (auto& v : img.values) v *= scale;
  const auto a = AddNoise(img, s, 77, 1);
  EXPECT_EQ(a.values[5], 0.0);
  EXPECT_EQ(AddNoise(img, s, 77, 2).values, a.values);
  EXPECT_EQ(AddNoise(img, s, 77, 5).values, a.values);
  EXPECT_NE(AddNoise(img, s, 78, 1).values, a.values);
  img.values[0] = -1.0;
  EXPECT_THROW(AddNoise(img, s, 1), std::invalid_argument);
}

TEST(Postprocess, ConstantInvertAndGamma) {
  DetectorGeometry g;
  g.width = 4;
  g.height = 1;
  const auto flat = Postprocess(Radiograph{g, {3.0, 3.0, 3.0, 3.0}});
  for (auto v : flat.values()) EXPECT_EQ(v, 128);
  // Mean after inversion is low, so no gamma: bright input -> dark output.
  const auto out = Postprocess(Radiograph{g, {0.0, 10.0, 10.0, 10.0}});
  EXPECT_EQ(out.at(0, 0), 255);
  EXPECT_EQ(out.at(1, 0), 0);
}

TEST(Postprocess, GammaAppliesOnlyAboveMean220) {
  // 100 pixels with means exactly 219 and 221.
  image::Image8 low(100, 1, 219);
  low.at(0, 0) = 219 - 36;
  low.at(1, 0) = 219 + 36;
  image::Image8 high(100, 1, 221);
  high.at(0, 0) = 221 - 34;
  high.at(1, 0) = 221 + 34;
  EXPECT_EQ(ApplyBrightGamma(low), low);
  const auto g = ApplyBrightGamma(high);
  EXPECT_EQ(g.at(1, 0), 255);
  EXPECT_EQ(g.at(5, 0), static_cast<int>(std::lround(255.0 * std::pow(221.0 / 255.0, 0.2))));
  EXPECT_LE(g.at(0, 0), g.at(5, 0));
  EXPECT_LE(g.at(5, 0), g.at(1, 0));
}

TEST(Radiograph, FileRoundTrip) {
  testing::TempDir dir;
  std::mt19937_64 rng(6);
  auto img = RandomImage(rng, 9, 7);
  img.geometry.view = View::kAP;
  img.geometry.mode = BeamMode::kParallel;
  WriteRadiograph(img, dir / "r");
  const auto back = ReadRadiograph(dir / "r");
  EXPECT_EQ(back.geometry, img.geometry);
  for (std::size_t i = 0; i < img.values.size(); ++i) {
    EXPECT_EQ(back.values[i], static_cast<double>(static_cast<float>(img.values[i])));
  }
}

}  // namespace
}  // namespace drrscore::projector
