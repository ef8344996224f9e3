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

#include "drrscore/image.hpp"

#include <fmt/format.h>

#include <cctype>

#include "drrscore/error.hpp"
#include "drrscore/textio.hpp"

namespace drrscore::image {

namespace fs = std::filesystem;

void WritePgm(const Image8& img, const fs::path& path) {
  const std::string header = fmt::format("P5\n{} {}\n255\n", img.width(), img.height());
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), img.values().begin(), img.values().end());
  textio::WriteBytes(path, bytes);
}

Image8 ReadPgm(const fs::path& path) {
  const auto bytes = textio::ReadBytes(path);
  std::size_t pos = 0;
  const auto fail = [&](const char* why) {
    return DataError(fmt::format("'{}': {}", path.string(), why));
  };
  // Header tokens are separated by whitespace; '#' starts a comment.
  const auto token = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    std::string t;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) t += static_cast<char>(bytes[pos++]);
    return t;
  };
  if (token() != "P5") throw fail("not a binary PGM (P5)");
  const long long w = textio::ParseInt(token(), "PGM width");
  const long long h = textio::ParseInt(token(), "PGM height");
  const long long maxval = textio::ParseInt(token(), "PGM maxval");
  if (w < 1 || h < 1 || w > 65536 || h > 65536) throw fail("bad dimensions");
  if (maxval != 255) throw fail("only maxval 255 is supported");
  ++pos;  // single whitespace byte after maxval
  const std::size_t n = static_cast<std::size_t>(w * h);
  if (bytes.size() < pos || bytes.size() - pos != n) throw fail("payload size mismatch");
  return Image8(static_cast<int>(w), static_cast<int>(h),
                std::vector<std::uint8_t>(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                          bytes.end()));
}

void WriteMaskPgm(const BinaryMask2D& m, const fs::path& path) {
  Image8 img(m.width(), m.height());
  for (std::size_t i = 0; i < m.size(); ++i) img[i] = m[i] ? 255 : 0;
  WritePgm(img, path);
}

BinaryMask2D ReadMaskPgm(const fs::path& path) {
  const Image8 img = ReadPgm(path);
  return BinaryMask2D(img.width(), img.height(),
                      std::vector<std::uint8_t>(img.values().begin(), img.values().end()));
}

void WriteHeatMapStack(std::span<const HeatMap> maps, const fs::path& base) {
  if (maps.empty()) throw std::invalid_argument("empty heat-map stack");
  std::vector<float> flat;
  flat.reserve(maps.size() * maps.front().size());
  for (const auto& m : maps) {
    if (!m.SameShape(maps.front())) throw std::invalid_argument("heat-map shapes differ");
    for (double v : m.values()) flat.push_back(static_cast<float>(v));
  }
  textio::WriteBytes(fs::path(base.string() + ".f32.raw"), textio::EncodeFloat32LE(flat));
  textio::KeyValueDoc doc;
  doc.entries = {{"count", std::to_string(maps.size())},
                 {"width", std::to_string(maps.front().width())},
                 {"height", std::to_string(maps.front().height())},
                 {"dtype", "float32le"}};
  textio::WriteKeyValueFile(fs::path(base.string() + ".meta"), doc);
}

std::vector<HeatMap> ReadHeatMapStack(const fs::path& base) {
  const fs::path meta(base.string() + ".meta");
  const fs::path raw(base.string() + ".f32.raw");
  const auto doc = textio::ReadKeyValueFile(meta);
  const long long count = textio::ParseInt(doc.Get("count"), "count");
  const long long w = textio::ParseInt(doc.Get("width"), "width");
  const long long h = textio::ParseInt(doc.Get("height"), "height");
  if (count < 1 || w < 1 || h < 1 || w > 65536 || h > 65536) {
    throw DataError(fmt::format("'{}': count/width/height must be >= 1", meta.string()));
  }
  if (const auto* dt = doc.Find("dtype"); dt != nullptr && *dt != "float32le") {
    throw DataError(fmt::format("'{}': unsupported dtype '{}'", meta.string(), *dt));
  }
  const auto bytes = textio::ReadBytes(raw);
  const std::size_t per_map = static_cast<std::size_t>(w * h);
  if (bytes.size() != per_map * static_cast<std::size_t>(count) * sizeof(float)) {
    throw DataError(fmt::format("'{}' size does not match its metadata", raw.string()));
  }
  const auto flat = textio::DecodeFloat32LE(bytes);
  std::vector<HeatMap> maps;
  maps.reserve(static_cast<std::size_t>(count));
  for (long long c = 0; c < count; ++c) {
    std::vector<double> v(flat.begin() + static_cast<std::ptrdiff_t>(c * per_map),
                          flat.begin() + static_cast<std::ptrdiff_t>((c + 1) * per_map));
    maps.emplace_back(static_cast<int>(w), static_cast<int>(h), std::move(v));
  }
  return maps;
}

}  // namespace drrscore::image
