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

// Incremental (Siddon / Amanatides-Woo) voxel traversal. Visits every voxel a
// ray crosses together with the exact length of the ray inside it.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "drrscore/volume.hpp"

namespace drrscore::projector {

using volume::Grid;
using volume::Vec3;

// Parameter interval [t_enter, t_exit] (mm, t >= 0) where origin + t * dir is
// inside the grid's bounding box. Returns false on a miss.
inline bool ClipToBox(const Grid& g, const Vec3& origin, const Vec3& dir, double& t_enter,
                      double& t_exit) {
  const Vec3 lo = g.BoundsMin();
  const Vec3 hi = g.BoundsMax();
  t_enter = 0.0;
  t_exit = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (dir[a] == 0.0) {
      if (origin[a] < lo[a] || origin[a] > hi[a]) return false;
      continue;
    }
    const double ta = (lo[a] - origin[a]) / dir[a];
    const double tb = (hi[a] - origin[a]) / dir[a];
    t_enter = std::max(t_enter, std::min(ta, tb));
    t_exit = std::min(t_exit, std::max(ta, tb));
  }
  return t_enter < t_exit;
}

// Chord length (mm) of the ray through the grid's bounding box.
inline double ChordLength(const Grid& g, const Vec3& origin, const Vec3& dir) {
  double t0 = 0.0;
  double t1 = 0.0;
  return ClipToBox(g, origin, dir, t0, t1) ? t1 - t0 : 0.0;
}

// Calls visit(voxel_index, length_mm) for each voxel segment in ray order.
// `dir` must be a unit vector. Returns the traversed length in mm.
template <typename Visit>
double TraverseVoxels(const Grid& g, const Vec3& origin, const Vec3& dir, Visit&& visit) {
  double t_enter = 0.0;
  double t_exit = 0.0;
  if (!ClipToBox(g, origin, dir, t_enter, t_exit)) return 0.0;

  const Vec3 lo = g.BoundsMin();
  int idx[3];
  int step[3];
  double t_next[3];
  const auto boundary_t = [&](int a) {
    const int plane = idx[a] + (step[a] > 0 ? 1 : 0);
    return (lo[a] + plane * g.spacing[a] - origin[a]) / dir[a];
  };
  for (int a = 0; a < 3; ++a) {
    const double p = origin[a] + t_enter * dir[a];
    const int n = g.dims[a];
    idx[a] = std::clamp(static_cast<int>(std::floor((p - lo[a]) / g.spacing[a])), 0, n - 1);
    if (dir[a] > 0.0) {
      step[a] = 1;
    } else if (dir[a] < 0.0) {
      step[a] = -1;
    } else {
      step[a] = 0;
    }
    t_next[a] = step[a] == 0 ? std::numeric_limits<double>::infinity() : boundary_t(a);
  }

  double t = t_enter;
  double total = 0.0;
  while (true) {
    int axis = 0;
    if (t_next[1] < t_next[axis]) axis = 1;
    if (t_next[2] < t_next[axis]) axis = 2;
    const double seg_end = std::min(t_next[axis], t_exit);
    if (seg_end > t) {
      visit(g.Index(idx[0], idx[1], idx[2]), seg_end - t);
      total += seg_end - t;
      t = seg_end;
    }
    if (t >= t_exit) break;
    idx[axis] += step[axis];
    if (idx[axis] < 0 || idx[axis] >= g.dims[axis]) break;
    t_next[axis] = boundary_t(axis);
  }
  return total;
}

}  // namespace drrscore::projector
