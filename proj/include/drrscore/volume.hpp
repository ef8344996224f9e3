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

// CT volumes and voxel masks on a regular grid, plus their on-disk form:
// `<name>.raw` (int16 little-endian, x fastest) with a `<name>.meta`
// sidecar, and `<name>.mask.raw` (uint8 0/1) with `<name>.mask.meta`.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace drrscore::volume {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
  double operator[](int axis) const { return axis == 0 ? x : axis == 1 ? y : z; }
};

struct Dims {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  friend bool operator==(const Dims&, const Dims&) = default;
  std::size_t count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
           static_cast<std::size_t>(nz);
  }
  int operator[](int axis) const { return axis == 0 ? nx : axis == 1 ? ny : nz; }
};

// Sampling grid shared by a volume and its masks. `origin` is the world
// position (mm) of the centre of voxel (0,0,0); `spacing` is mm per voxel.
struct Grid {
  Dims dims;
  Vec3 spacing{1.0, 1.0, 1.0};
  Vec3 origin;

  friend bool operator==(const Grid&, const Grid&) = default;

  // Throws std::invalid_argument on non-positive dims or spacing.
  void Validate() const;

  std::size_t Index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * dims.ny + j) * dims.nx + i;
  }
  Vec3 VoxelCenter(int i, int j, int k) const {
    return {origin.x + i * spacing.x, origin.y + j * spacing.y,
            origin.z + k * spacing.z};
  }
  // Axis-aligned bounds of the voxel boxes, in mm.
  Vec3 BoundsMin() const;
  Vec3 BoundsMax() const;
  // Grid whose centre sits at the world origin.
  static Grid Centered(Dims dims, Vec3 spacing);
};

class CtVolume {
 public:
  CtVolume(Grid grid, std::vector<std::int16_t> hu);
  // Volume filled with a single value.
  CtVolume(Grid grid, std::int16_t fill);

  const Grid& grid() const { return grid_; }
  const Dims& dims() const { return grid_.dims; }
  std::span<const std::int16_t> values() const { return hu_; }
  std::span<std::int16_t> mutable_values() { return hu_; }

  std::int16_t at(int i, int j, int k) const { return hu_[grid_.Index(i, j, k)]; }
  std::int16_t& at(int i, int j, int k) { return hu_[grid_.Index(i, j, k)]; }

  friend bool operator==(const CtVolume&, const CtVolume&) = default;

 private:
  Grid grid_;
  std::vector<std::int16_t> hu_;
};

class VoxelMask {
 public:
  explicit VoxelMask(Grid grid);
  VoxelMask(Grid grid, std::vector<std::uint8_t> bits);

  const Grid& grid() const { return grid_; }
  const Dims& dims() const { return grid_.dims; }
  std::span<const std::uint8_t> bits() const { return bits_; }
  std::span<std::uint8_t> mutable_bits() { return bits_; }

  bool test(std::size_t idx) const { return bits_[idx] != 0; }
  bool test(int i, int j, int k) const { return bits_[grid_.Index(i, j, k)] != 0; }
  void set(std::size_t idx, bool on = true) { bits_[idx] = on ? 1 : 0; }

  std::size_t count() const;
  bool empty() const { return count() == 0; }
  // Voxelwise inclusion; grids must have equal dims.
  bool SubsetOf(const VoxelMask& other) const;

  friend bool operator==(const VoxelMask&, const VoxelMask&) = default;

 private:
  Grid grid_;
  std::vector<std::uint8_t> bits_;
};

// `base` is the path without extension: writes base.raw and base.meta.
void SaveVolume(const CtVolume& v, const std::filesystem::path& base);
CtVolume LoadVolume(const std::filesystem::path& base);

// Writes base.mask.raw and base.mask.meta.
void SaveMask(const VoxelMask& m, const std::filesystem::path& base);
VoxelMask LoadMask(const std::filesystem::path& base);

}  // namespace drrscore::volume
