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

// Synthetic longitudinal chest phantoms built from ellipsoids, cylinders and
// growing spherical lesions, with voxel-level ground-truth masks.

#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "drrscore/textio.hpp"
#include "drrscore/volume.hpp"

namespace drrscore::volume {

inline constexpr int kAirHu = -1000;
inline constexpr int kSoftTissueHu = 40;
inline constexpr int kLungHu = -800;
inline constexpr int kBoneHu = 700;
inline constexpr int kLesionHu = -100;

struct Ellipsoid {
  Vec3 center;
  Vec3 semi_axes;

  bool Contains(const Vec3& p) const;
};

// An ellipsoid, or an elliptic cylinder whose axis runs along `axis`
// (0=x, 1=y, 2=z) with half-length semi_axes[axis].
struct BoneShape {
  enum class Kind { kEllipsoid, kCylinder };
  Kind kind = Kind::kEllipsoid;
  Vec3 center;
  Vec3 semi_axes;
  int axis = 2;
  int hu = kBoneHu;

  bool Contains(const Vec3& p) const;
};

struct Lesion {
  Vec3 center;
  double radius_mm = 0.0;
  int hu = kLesionHu;
  // Radius multiplier applied once per time step.
  double growth = 1.0;

  double RadiusAt(int t) const;
};

struct Bed {
  Vec3 min_corner;
  Vec3 max_corner;
  int hu = 100;

  bool Contains(const Vec3& p) const;
};

struct PhantomSpec {
  Grid grid;
  Ellipsoid body;
  int body_hu = kSoftTissueHu;
  std::array<Ellipsoid, 2> lungs;
  int lung_hu = kLungHu;
  std::vector<BoneShape> bones;
  std::vector<Lesion> lesions;
  std::optional<Bed> bed;
  int time_points = 1;

  // Throws std::invalid_argument naming the first violated constraint.
  void Validate() const;
};

struct PhantomFrame {
  CtVolume volume;
  VoxelMask lungs;
  VoxelMask lesion;
};

// Voxelizes the phantom at time index t. A voxel takes the value of the
// highest-precedence shape containing its centre:
// lesion > lung > bone > body > bed > air.
// Lesions only paint voxels inside the lungs.
PhantomFrame GeneratePhantom(const PhantomSpec& spec, int t);

PhantomSpec ParsePhantomSpec(const textio::KeyValueDoc& doc);
PhantomSpec ReadPhantomSpec(const std::filesystem::path& path);
std::string FormatPhantomSpec(const PhantomSpec& spec);

}  // namespace drrscore::volume
