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

#include "drrscore/materials.hpp"

#include <fmt/format.h>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "drrscore/phantom.hpp"

namespace drrscore::materials {

using volume::Dims;

bool MaterialMasks::IsPartition() const {
  const std::size_t n = air.bits().size();
  if (soft.bits().size() != n || bone.bits().size() != n) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (air.test(i) + soft.test(i) + bone.test(i) != 1) return false;
  }
  return true;
}

MaterialMasks Decompose(const CtVolume& v, int air_max, int bone_min) {
  if (!(air_max < bone_min)) {
    throw std::invalid_argument(
        fmt::format("air_max ({}) must be below bone_min ({})", air_max, bone_min));
  }
  MaterialMasks m{VoxelMask(v.grid()), VoxelMask(v.grid()), VoxelMask(v.grid())};
  const auto hu = v.values();
  for (std::size_t i = 0; i < hu.size(); ++i) {
    if (hu[i] <= air_max) {
      m.air.set(i);
    } else if (hu[i] >= bone_min) {
      m.bone.set(i);
    } else {
      m.soft.set(i);
    }
  }
  return m;
}

namespace {

// Visits the 6-neighbourhood of voxel `idx`.
template <typename Fn>
void ForEachNeighbor(const Dims& d, std::size_t idx, Fn&& fn) {
  const std::size_t nx = d.nx;
  const std::size_t nxy = nx * d.ny;
  const int i = static_cast<int>(idx % nx);
  const int j = static_cast<int>((idx / nx) % d.ny);
  const int k = static_cast<int>(idx / nxy);
  if (i > 0) fn(idx - 1);
  if (i + 1 < d.nx) fn(idx + 1);
  if (j > 0) fn(idx - nx);
  if (j + 1 < d.ny) fn(idx + nx);
  if (k > 0) fn(idx - nxy);
  if (k + 1 < d.nz) fn(idx + nxy);
}

bool OnBoundary(const Dims& d, std::size_t idx) {
  const std::size_t nx = d.nx;
  const int i = static_cast<int>(idx % nx);
  const int j = static_cast<int>((idx / nx) % d.ny);
  const int k = static_cast<int>(idx / (nx * d.ny));
  return i == 0 || j == 0 || k == 0 || i == d.nx - 1 || j == d.ny - 1 || k == d.nz - 1;
}

}  // namespace

VoxelMask FillHoles(const VoxelMask& m) {
  const Dims& d = m.dims();
  const std::size_t n = d.count();
  std::vector<std::uint8_t> outside(n, 0);
  std::vector<std::size_t> queue;
  for (std::size_t idx = 0; idx < n; ++idx) {
    if (!m.test(idx) && OnBoundary(d, idx)) {
      outside[idx] = 1;
      queue.push_back(idx);
    }
  }
  while (!queue.empty()) {
    const std::size_t idx = queue.back();
    queue.pop_back();
    ForEachNeighbor(d, idx, [&](std::size_t nb) {
      if (!outside[nb] && !m.test(nb)) {
        outside[nb] = 1;
        queue.push_back(nb);
      }
    });
  }
  VoxelMask filled(m.grid());
  for (std::size_t idx = 0; idx < n; ++idx) filled.set(idx, outside[idx] == 0);
  return filled;
}

VoxelMask LargestComponent(const VoxelMask& m) {
  const Dims& d = m.dims();
  const std::size_t n = d.count();
  std::vector<std::int32_t> label(n, -1);
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> queue;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!m.test(seed) || label[seed] >= 0) continue;
    const auto id = static_cast<std::int32_t>(sizes.size());
    std::size_t size = 0;
    label[seed] = id;
    queue.push_back(seed);
    while (!queue.empty()) {
      const std::size_t idx = queue.back();
      queue.pop_back();
      ++size;
      ForEachNeighbor(d, idx, [&](std::size_t nb) {
        if (m.test(nb) && label[nb] < 0) {
          label[nb] = id;
          queue.push_back(nb);
        }
      });
    }
    sizes.push_back(size);
  }
  VoxelMask out(m.grid());
  if (sizes.empty()) return out;
  std::int32_t best = 0;
  for (std::size_t c = 1; c < sizes.size(); ++c) {
    if (sizes[c] > sizes[best]) best = static_cast<std::int32_t>(c);
  }
  for (std::size_t idx = 0; idx < n; ++idx) out.set(idx, label[idx] == best);
  return out;
}

VoxelMask ChestMask(const MaterialMasks& m) {
  if (!m.IsPartition()) {
    throw std::invalid_argument("material masks do not partition the volume");
  }
  VoxelMask body(m.grid());
  for (std::size_t idx = 0; idx < body.bits().size(); ++idx) {
    body.set(idx, !m.air.test(idx) || m.soft.test(idx) || m.bone.test(idx));
  }
  return LargestComponent(FillHoles(body));
}

CtVolume ApplyChestMask(const CtVolume& v, const VoxelMask& chest) {
  if (v.dims() != chest.dims()) {
    throw std::invalid_argument("chest mask dims differ from the volume");
  }
  CtVolume out = v;
  auto hu = out.mutable_values();
  for (std::size_t idx = 0; idx < hu.size(); ++idx) {
    if (!chest.test(idx)) hu[idx] = static_cast<std::int16_t>(volume::kAirHu);
  }
  return out;
}

}  // namespace drrscore::materials
