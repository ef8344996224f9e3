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

#include "drrscore/phantom.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "drrscore/error.hpp"

namespace drrscore::volume {

namespace {

double Sq(double v) { return v * v; }

bool InRange16(int hu) { return hu >= -32768 && hu <= 32767; }

}  // namespace

bool Ellipsoid::Contains(const Vec3& p) const {
  return Sq((p.x - center.x) / semi_axes.x) + Sq((p.y - center.y) / semi_axes.y) +
             Sq((p.z - center.z) / semi_axes.z) <=
         1.0;
}

bool BoneShape::Contains(const Vec3& p) const {
  if (kind == Kind::kEllipsoid) return Ellipsoid{center, semi_axes}.Contains(p);
  double r = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double d = (p[a] - center[a]) / semi_axes[a];
    if (a == axis) {
      if (std::abs(d) > 1.0) return false;
    } else {
      r += d * d;
    }
  }
  return r <= 1.0;
}

double Lesion::RadiusAt(int t) const { return radius_mm * std::pow(growth, t); }

bool Bed::Contains(const Vec3& p) const {
  return p.x >= min_corner.x && p.x <= max_corner.x && p.y >= min_corner.y &&
         p.y <= max_corner.y && p.z >= min_corner.z && p.z <= max_corner.z;
}

void PhantomSpec::Validate() const {
  grid.Validate();
  const auto positive = [](const Vec3& v) { return v.x > 0 && v.y > 0 && v.z > 0; };
  if (time_points < 1) throw std::invalid_argument("time_points must be >= 1");
  if (!positive(body.semi_axes)) {
    throw std::invalid_argument("body semi-axes must be positive");
  }
  for (int hu : {body_hu, lung_hu}) {
    if (!InRange16(hu)) throw std::invalid_argument("HU value outside int16 range");
  }

  for (std::size_t l = 0; l < lungs.size(); ++l) {
    const auto& lung = lungs[l];
    if (!positive(lung.semi_axes)) {
      throw std::invalid_argument("lung semi-axes must be positive");
    }
    // Containment is checked on a dense set of surface points.
    constexpr int kPolar = 48;
    constexpr int kAzimuth = 96;
    for (int a = 0; a <= kPolar; ++a) {
      const double theta = std::numbers::pi * a / kPolar;
      for (int b = 0; b < kAzimuth; ++b) {
        const double phi = 2.0 * std::numbers::pi * b / kAzimuth;
        const Vec3 p{lung.center.x + lung.semi_axes.x * std::sin(theta) * std::cos(phi),
                     lung.center.y + lung.semi_axes.y * std::sin(theta) * std::sin(phi),
                     lung.center.z + lung.semi_axes.z * std::cos(theta)};
        if (!body.Contains(p)) {
          throw std::invalid_argument(fmt::format("lung {} extends outside the body", l));
        }
      }
    }
  }

  for (const auto& bone : bones) {
    if (!positive(bone.semi_axes)) {
      throw std::invalid_argument("bone semi-axes must be positive");
    }
    if (bone.axis < 0 || bone.axis > 2) throw std::invalid_argument("bone axis must be 0..2");
    if (!InRange16(bone.hu)) throw std::invalid_argument("HU value outside int16 range");
  }

  for (std::size_t i = 0; i < lesions.size(); ++i) {
    const auto& lesion = lesions[i];
    if (!(lesion.radius_mm > 0)) {
      throw std::invalid_argument(fmt::format("lesion {} radius must be positive", i));
    }
    if (!(lesion.growth > 0)) {
      throw std::invalid_argument(fmt::format("lesion {} growth factor must be > 0", i));
    }
    if (!InRange16(lesion.hu)) throw std::invalid_argument("HU value outside int16 range");
    if (!lungs[0].Contains(lesion.center) && !lungs[1].Contains(lesion.center)) {
      throw std::invalid_argument(fmt::format("lesion {} centre is not inside a lung", i));
    }
  }

  if (bed) {
    if (!(bed->min_corner.x <= bed->max_corner.x && bed->min_corner.y <= bed->max_corner.y &&
          bed->min_corner.z <= bed->max_corner.z)) {
      throw std::invalid_argument("bed corners are not ordered");
    }
    if (!InRange16(bed->hu)) throw std::invalid_argument("HU value outside int16 range");
    // In coordinates scaled by the body semi-axes the body is the unit ball
    // and the bed stays a box; disjoint iff the box's closest point is outside.
    double d2 = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double lo = (bed->min_corner[a] - body.center[a]) / body.semi_axes[a];
      const double hi = (bed->max_corner[a] - body.center[a]) / body.semi_axes[a];
      d2 += Sq(std::clamp(0.0, lo, hi));
    }
    if (d2 <= 1.0) throw std::invalid_argument("bed intersects the body");
  }
}

PhantomFrame GeneratePhantom(const PhantomSpec& spec, int t) {
  spec.Validate();
  if (t < 0 || t >= spec.time_points) {
    throw std::invalid_argument(
        fmt::format("time index {} outside [0, {})", t, spec.time_points));
  }
  const Grid& g = spec.grid;
  CtVolume vol(g, static_cast<std::int16_t>(kAirHu));
  VoxelMask lungs(g);
  VoxelMask lesion(g);

  std::vector<Ellipsoid> spheres;
  spheres.reserve(spec.lesions.size());
  for (const auto& l : spec.lesions) {
    const double r = l.RadiusAt(t);
    spheres.push_back({l.center, {r, r, r}});
  }

  auto hu = vol.mutable_values();
  for (int k = 0; k < g.dims.nz; ++k) {
    for (int j = 0; j < g.dims.ny; ++j) {
      for (int i = 0; i < g.dims.nx; ++i) {
        const Vec3 p = g.VoxelCenter(i, j, k);
        const std::size_t idx = g.Index(i, j, k);
        int value = kAirHu;
        if (spec.bed && spec.bed->Contains(p)) value = spec.bed->hu;
        if (spec.body.Contains(p)) value = spec.body_hu;
        for (const auto& bone : spec.bones) {
          if (bone.Contains(p)) value = bone.hu;
        }
        if (spec.lungs[0].Contains(p) || spec.lungs[1].Contains(p)) {
          value = spec.lung_hu;
          lungs.set(idx);
          for (std::size_t s = 0; s < spheres.size(); ++s) {
            if (spheres[s].Contains(p)) {
              value = spec.lesions[s].hu;
              lesion.set(idx);
            }
          }
        }
        hu[idx] = static_cast<std::int16_t>(value);
      }
    }
  }
  return {std::move(vol), std::move(lungs), std::move(lesion)};
}

namespace {

std::vector<double> Numbers(const std::string& s, std::size_t min_n, std::size_t max_n,
                            const char* key) {
  auto v = textio::ParseDoubles(s, key);
  if (v.size() < min_n || v.size() > max_n) {
    throw DataError(fmt::format("'{}' expects {}..{} numbers, got '{}'", key, min_n,
                                max_n, s));
  }
  return v;
}

int ToHu(double v, const char* key) {
  if (v != std::floor(v) || !InRange16(static_cast<int>(v))) {
    throw DataError(fmt::format("'{}' HU must be an int16 integer", key));
  }
  return static_cast<int>(v);
}

}  // namespace

PhantomSpec ParsePhantomSpec(const textio::KeyValueDoc& doc) {
  static const char* const kKnown[] = {"dims",  "spacing_mm", "origin_mm", "time_points",
                                       "body",  "lung",       "lung_hu",   "bone",
                                       "lesion", "bed"};
  for (const auto& [k, v] : doc.entries) {
    if (std::find_if(std::begin(kKnown), std::end(kKnown),
                     [&](const char* n) { return k == n; }) == std::end(kKnown)) {
      throw DataError(fmt::format("unknown phantom key '{}'", k));
    }
  }

  PhantomSpec spec;
  const auto dims = Numbers(doc.Get("dims"), 3, 3, "dims");
  for (double d : dims) {
    if (d != std::floor(d) || d < 1 || d > 4096) throw DataError("'dims' must be integers >= 1");
  }
  Dims n{static_cast<int>(dims[0]), static_cast<int>(dims[1]), static_cast<int>(dims[2])};
  Vec3 spacing{1.0, 1.0, 1.0};
  if (const auto* s = doc.Find("spacing_mm")) {
    const auto v = Numbers(*s, 3, 3, "spacing_mm");
    spacing = {v[0], v[1], v[2]};
  }
  spec.grid = Grid::Centered(n, spacing);
  if (const auto* o = doc.Find("origin_mm")) {
    const auto v = Numbers(*o, 3, 3, "origin_mm");
    spec.grid.origin = {v[0], v[1], v[2]};
  }
  if (const auto* tp = doc.Find("time_points")) {
    spec.time_points = static_cast<int>(textio::ParseInt(*tp, "time_points"));
  }

  const auto body = Numbers(doc.Get("body"), 6, 7, "body");
  spec.body = {{body[0], body[1], body[2]}, {body[3], body[4], body[5]}};
  if (body.size() == 7) spec.body_hu = ToHu(body[6], "body");

  const auto lungs = doc.GetAll("lung");
  if (lungs.size() != 2) throw DataError("phantom needs exactly two 'lung' entries");
  for (std::size_t l = 0; l < 2; ++l) {
    const auto v = Numbers(lungs[l], 6, 6, "lung");
    spec.lungs[l] = {{v[0], v[1], v[2]}, {v[3], v[4], v[5]}};
  }
  if (const auto* hu = doc.Find("lung_hu")) {
    spec.lung_hu = ToHu(textio::ParseDouble(*hu, "lung_hu"), "lung_hu");
  }

  for (const auto& entry : doc.GetAll("bone")) {
    const auto parts = textio::SplitWhitespace(entry);
    if (parts.empty()) throw DataError("empty 'bone' entry");
    BoneShape bone;
    const std::string& kind = parts.front();
    if (kind == "ellipsoid") {
      bone.kind = BoneShape::Kind::kEllipsoid;
    } else if (kind.rfind("cylinder_", 0) == 0 && kind.size() == 10 &&
               kind[9] >= 'x' && kind[9] <= 'z') {
      bone.kind = BoneShape::Kind::kCylinder;
      bone.axis = kind[9] - 'x';
    } else {
      throw DataError(fmt::format("unknown bone kind '{}'", kind));
    }
    const auto v = Numbers(entry.substr(entry.find(kind) + kind.size()), 6, 7, "bone");
    bone.center = {v[0], v[1], v[2]};
    bone.semi_axes = {v[3], v[4], v[5]};
    if (v.size() == 7) bone.hu = ToHu(v[6], "bone");
    spec.bones.push_back(bone);
  }

  for (const auto& entry : doc.GetAll("lesion")) {
    const auto v = Numbers(entry, 4, 6, "lesion");
    Lesion lesion;
    lesion.center = {v[0], v[1], v[2]};
    lesion.radius_mm = v[3];
    if (v.size() >= 5) lesion.hu = ToHu(v[4], "lesion");
    if (v.size() >= 6) lesion.growth = v[5];
    spec.lesions.push_back(lesion);
  }

  if (const auto* b = doc.Find("bed")) {
    const auto v = Numbers(*b, 6, 7, "bed");
    Bed bed;
    bed.min_corner = {v[0], v[1], v[2]};
    bed.max_corner = {v[3], v[4], v[5]};
    if (v.size() == 7) bed.hu = ToHu(v[6], "bed");
    spec.bed = bed;
  }
  return spec;
}

PhantomSpec ReadPhantomSpec(const std::filesystem::path& path) {
  return ParsePhantomSpec(textio::ReadKeyValueFile(path));
}

std::string FormatPhantomSpec(const PhantomSpec& spec) {
  using textio::FormatExact;
  const auto v3 = [](const Vec3& v) {
    return fmt::format("{} {} {}", FormatExact(v.x), FormatExact(v.y), FormatExact(v.z));
  };
  const Grid& g = spec.grid;
  std::string out;
  out += fmt::format("dims = {} {} {}\n", g.dims.nx, g.dims.ny, g.dims.nz);
  out += fmt::format("spacing_mm = {}\n", v3(g.spacing));
  out += fmt::format("origin_mm = {}\n", v3(g.origin));
  out += fmt::format("time_points = {}\n", spec.time_points);
  out += fmt::format("body = {} {} {}\n", v3(spec.body.center), v3(spec.body.semi_axes),
                     spec.body_hu);
  for (const auto& lung : spec.lungs) {
    out += fmt::format("lung = {} {}\n", v3(lung.center), v3(lung.semi_axes));
  }
  out += fmt::format("lung_hu = {}\n", spec.lung_hu);
  for (const auto& b : spec.bones) {
    const std::string kind = b.kind == BoneShape::Kind::kEllipsoid
                                 ? std::string("ellipsoid")
                                 : fmt::format("cylinder_{}", static_cast<char>('x' + b.axis));
    out += fmt::format("bone = {} {} {} {}\n", kind, v3(b.center), v3(b.semi_axes), b.hu);
  }
  for (const auto& l : spec.lesions) {
    out += fmt::format("lesion = {} {} {} {}\n", v3(l.center), FormatExact(l.radius_mm),
                       l.hu, FormatExact(l.growth));
  }
  if (spec.bed) {
    out += fmt::format("bed = {} {} {}\n", v3(spec.bed->min_corner),
                       v3(spec.bed->max_corner), spec.bed->hu);
  }
  return out;
}

}  // namespace drrscore::volume
