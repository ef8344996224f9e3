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

#include "drrscore/volume.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>
#include <string>

#include "drrscore/error.hpp"
#include "drrscore/textio.hpp"

namespace drrscore::volume {

namespace fs = std::filesystem;

void Grid::Validate() const {
  if (dims.nx < 1 || dims.ny < 1 || dims.nz < 1) {
    throw std::invalid_argument(fmt::format(
        "grid dims must be >= 1, got {}x{}x{}", dims.nx, dims.ny, dims.nz));
  }
  if (!(spacing.x > 0.0) || !(spacing.y > 0.0) || !(spacing.z > 0.0)) {
    throw std::invalid_argument("grid spacing must be > 0");
  }
}

Vec3 Grid::BoundsMin() const {
  return {origin.x - 0.5 * spacing.x, origin.y - 0.5 * spacing.y,
          origin.z - 0.5 * spacing.z};
}

Vec3 Grid::BoundsMax() const {
  return {origin.x + (dims.nx - 0.5) * spacing.x,
          origin.y + (dims.ny - 0.5) * spacing.y,
          origin.z + (dims.nz - 0.5) * spacing.z};
}

Grid Grid::Centered(Dims dims, Vec3 spacing) {
  Grid g{dims, spacing, {}};
  g.origin = {-0.5 * (dims.nx - 1) * spacing.x, -0.5 * (dims.ny - 1) * spacing.y,
              -0.5 * (dims.nz - 1) * spacing.z};
  return g;
}

CtVolume::CtVolume(Grid grid, std::vector<std::int16_t> hu)
    : grid_(grid), hu_(std::move(hu)) {
  grid_.Validate();
  if (hu_.size() != grid_.dims.count()) {
    throw std::invalid_argument(fmt::format(
        "volume holds {} values, dims require {}", hu_.size(), grid_.dims.count()));
  }
}

CtVolume::CtVolume(Grid grid, std::int16_t fill)
    : CtVolume(grid, std::vector<std::int16_t>(grid.dims.count(), fill)) {}

VoxelMask::VoxelMask(Grid grid)
    : VoxelMask(grid, std::vector<std::uint8_t>(grid.dims.count(), 0)) {}

VoxelMask::VoxelMask(Grid grid, std::vector<std::uint8_t> bits)
    : grid_(grid), bits_(std::move(bits)) {
  grid_.Validate();
  if (bits_.size() != grid_.dims.count()) {
    throw std::invalid_argument(fmt::format(
        "mask holds {} values, dims require {}", bits_.size(), grid_.dims.count()));
  }
  for (auto& b : bits_) b = b != 0 ? 1 : 0;
}

std::size_t VoxelMask::count() const {
  return static_cast<std::size_t>(
      std::count_if(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b != 0; }));
}

bool VoxelMask::SubsetOf(const VoxelMask& other) const {
  if (grid_.dims != other.grid_.dims) {
    throw std::invalid_argument("mask dims differ");
  }
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] && !other.bits_[i]) return false;
  }
  return true;
}

namespace {

fs::path WithSuffix(const fs::path& base, const char* suffix) {
  return fs::path(base.string() + suffix);
}

textio::KeyValueDoc GridDoc(const Grid& g, const char* dtype) {
  using textio::FormatExact;
  textio::KeyValueDoc doc;
  doc.entries.emplace_back("dims", fmt::format("{} {} {}", g.dims.nx, g.dims.ny,
                                               g.dims.nz));
  doc.entries.emplace_back("spacing_mm",
                           fmt::format("{} {} {}", FormatExact(g.spacing.x),
                                       FormatExact(g.spacing.y),
                                       FormatExact(g.spacing.z)));
  doc.entries.emplace_back("origin_mm",
                           fmt::format("{} {} {}", FormatExact(g.origin.x),
                                       FormatExact(g.origin.y),
                                       FormatExact(g.origin.z)));
  doc.entries.emplace_back("dtype", dtype);
  return doc;
}

Vec3 ParseTriple(const std::string& s, const char* what) {
  const auto v = textio::ParseDoubles(s, what);
  if (v.size() != 3) {
    throw DataError(fmt::format("'{}' needs three values, got '{}'", what, s));
  }
  return {v[0], v[1], v[2]};
}

Grid ReadGrid(const fs::path& meta_path, const char* expected_dtype) {
  const auto doc = textio::ReadKeyValueFile(meta_path);
  Grid g;
  const auto dims = textio::SplitWhitespace(doc.Get("dims"));
  if (dims.size() != 3) throw DataError("'dims' needs three integers");
  const auto dim = [&](int a) {
    const long long d = textio::ParseInt(dims[a], "dims");
    if (d < 1 || d > (1 << 20)) {
      throw DataError(fmt::format("{}: dims must be >= 1", meta_path.string()));
    }
    return static_cast<int>(d);
  };
  g.dims = {dim(0), dim(1), dim(2)};
  g.spacing = ParseTriple(doc.Get("spacing_mm"), "spacing_mm");
  if (!(g.spacing.x > 0) || !(g.spacing.y > 0) || !(g.spacing.z > 0)) {
    throw DataError(fmt::format("{}: spacing must be positive", meta_path.string()));
  }
  if (const auto* o = doc.Find("origin_mm")) g.origin = ParseTriple(*o, "origin_mm");
  if (const auto* dt = doc.Find("dtype"); dt != nullptr && *dt != expected_dtype) {
    throw DataError(fmt::format("{}: dtype '{}' where '{}' expected",
                                meta_path.string(), *dt, expected_dtype));
  }
  return g;
}

void RequireFile(const fs::path& p) {
  if (!fs::is_regular_file(p)) {
    throw DataError(fmt::format("missing file '{}'", p.string()));
  }
}

}  // namespace

void SaveVolume(const CtVolume& v, const fs::path& base) {
  textio::WriteBytes(WithSuffix(base, ".raw"), textio::EncodeInt16LE(v.values()));
  textio::WriteKeyValueFile(WithSuffix(base, ".meta"), GridDoc(v.grid(), "int16le"));
}

CtVolume LoadVolume(const fs::path& base) {
  const auto meta = WithSuffix(base, ".meta");
  const auto raw = WithSuffix(base, ".raw");
  RequireFile(meta);
  RequireFile(raw);
  const Grid g = ReadGrid(meta, "int16le");
  const auto bytes = textio::ReadBytes(raw);
  if (bytes.size() != g.dims.count() * sizeof(std::int16_t)) {
    throw DataError(fmt::format("'{}' holds {} bytes, metadata declares {}",
                                raw.string(), bytes.size(),
                                g.dims.count() * sizeof(std::int16_t)));
  }
  return CtVolume(g, textio::DecodeInt16LE(bytes));
}

void SaveMask(const VoxelMask& m, const fs::path& base) {
  const auto bits = m.bits();
  textio::WriteBytes(WithSuffix(base, ".mask.raw"), bits);
  textio::WriteKeyValueFile(WithSuffix(base, ".mask.meta"), GridDoc(m.grid(), "uint8"));
}

VoxelMask LoadMask(const fs::path& base) {
  const auto meta = WithSuffix(base, ".mask.meta");
  const auto raw = WithSuffix(base, ".mask.raw");
  RequireFile(meta);
  RequireFile(raw);
  const Grid g = ReadGrid(meta, "uint8");
  auto bytes = textio::ReadBytes(raw);
  if (bytes.size() != g.dims.count()) {
    throw DataError(fmt::format("'{}' holds {} bytes, metadata declares {}",
                                raw.string(), bytes.size(), g.dims.count()));
  }
  for (auto b : bytes) {
    if (b > 1) throw DataError(fmt::format("'{}' is not a 0/1 mask", raw.string()));
  }
  return VoxelMask(g, std::move(bytes));
}

}  // namespace drrscore::volume
