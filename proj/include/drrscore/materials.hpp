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

#pragma once

#include "drrscore/volume.hpp"

namespace drrscore::materials {

using volume::CtVolume;
using volume::VoxelMask;

inline constexpr int kDefaultAirMaxHu = -500;
inline constexpr int kDefaultBoneMinHu = 300;

enum class Material : std::uint8_t { kAir = 0, kSoft = 1, kBone = 2 };
inline constexpr int kMaterialCount = 3;

// Air, soft tissue and bone occupancy. Every voxel is in exactly one mask.
struct MaterialMasks {
  VoxelMask air;
  VoxelMask soft;
  VoxelMask bone;

  const volume::Grid& grid() const { return air.grid(); }
  Material At(std::size_t idx) const {
    return air.test(idx) ? Material::kAir : soft.test(idx) ? Material::kSoft : Material::kBone;
  }
  bool IsPartition() const;
};

// HU <= air_max -> air, HU >= bone_min -> bone, soft otherwise.
MaterialMasks Decompose(const CtVolume& v, int air_max = kDefaultAirMaxHu,
                        int bone_min = kDefaultBoneMinHu);

// Fills every region of `m` not reachable from the volume boundary through
// 6-connected unset voxels. The result is always a superset of `m`.
VoxelMask FillHoles(const VoxelMask& m);

// Largest 6-connected component (ties go to the component found first in
// x-fastest scan order). Empty input gives an empty mask.
VoxelMask LargestComponent(const VoxelMask& m);

// Body region: NOT(air) OR soft OR bone, hole-filled, reduced to its largest
// connected component so detached objects such as a scanner bed drop out.
VoxelMask ChestMask(const MaterialMasks& m);

// Sets every voxel outside `chest` to air (-1000 HU).
CtVolume ApplyChestMask(const CtVolume& v, const VoxelMask& chest);

}  // namespace drrscore::materials
