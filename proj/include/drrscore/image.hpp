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

// 2-D raster types: real-valued heat maps, binary masks and 8-bit images,
// plus PGM and float-stack file I/O.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace drrscore::image {

struct HeatTag {};
struct MaskTag {};
struct GrayTag {};

// Row-major width x height raster. The tag keeps heat maps, masks and
// 8-bit images apart at the type level.
template <typename T, typename Tag>
class Plane {
 public:
  Plane() = default;
  Plane(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    CheckDims();
    data_.assign(static_cast<std::size_t>(width) * height, Canon(fill));
  }
  Plane(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    CheckDims();
    if (data_.size() != static_cast<std::size_t>(width) * height) {
      throw std::invalid_argument("plane data size does not match dimensions");
    }
    for (auto& v : data_) v = Canon(v);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool SameShape(const Plane& o) const {
    return width_ == o.width_ && height_ == o.height_;
  }

  T at(int x, int y) const { return data_[Index(x, y)]; }
  T& at(int x, int y) { return data_[Index(x, y)]; }
  T operator[](std::size_t i) const { return data_[i]; }
  T& operator[](std::size_t i) { return data_[i]; }
  std::span<const T> values() const { return data_; }
  std::span<T> mutable_values() { return data_; }

  // Number of nonzero pixels.
  std::size_t count() const {
    std::size_t c = 0;
    for (const auto& v : data_) c += v != T{} ? 1 : 0;
    return c;
  }

  friend bool operator==(const Plane&, const Plane&) = default;

 private:
  std::size_t Index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }
  void CheckDims() const {
    if (width_ < 1 || height_ < 1) {
      throw std::invalid_argument("plane dimensions must be >= 1");
    }
  }
  static T Canon(T v) {
    if constexpr (std::is_same_v<Tag, MaskTag>) {
      return v != T{} ? T{1} : T{0};
    } else {
      return v;
    }
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using HeatMap = Plane<double, HeatTag>;
using BinaryMask2D = Plane<std::uint8_t, MaskTag>;
using Image8 = Plane<std::uint8_t, GrayTag>;

// Axis-aligned pixel box: covers columns [x, x+w) and rows [y, y+h).
struct BBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  long long area() const { return static_cast<long long>(w) * h; }
  bool Valid() const { return w > 0 && h > 0; }
  bool Within(int width, int height) const {
    return Valid() && x >= 0 && y >= 0 && x + w <= width && y + h <= height;
  }
  friend bool operator==(const BBox&, const BBox&) = default;
};

// Binary PGM (P5, maxval 255).
void WritePgm(const Image8& img, const std::filesystem::path& path);
Image8 ReadPgm(const std::filesystem::path& path);
// Masks are stored as 0/255 PGMs; any nonzero pixel reads back as set.
void WriteMaskPgm(const BinaryMask2D& m, const std::filesystem::path& path);
BinaryMask2D ReadMaskPgm(const std::filesystem::path& path);

// Heat-map stack: `<base>.f32.raw` (float32 little-endian, maps stored
// consecutively) with `<base>.meta` holding count, width, height.
void WriteHeatMapStack(std::span<const HeatMap> maps, const std::filesystem::path& base);
std::vector<HeatMap> ReadHeatMapStack(const std::filesystem::path& base);

}  // namespace drrscore::image
