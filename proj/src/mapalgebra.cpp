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

#include "drrscore/mapalgebra.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <tuple>

namespace drrscore::mapalgebra {

namespace {

template <typename A, typename B>
void RequireSameShape(const A& a, const B& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw std::invalid_argument(fmt::format("{}: dimension mismatch ({}x{} vs {}x{})", what,
                                            a.width(), a.height(), b.width(), b.height()));
  }
}

std::uint8_t ClampByte(double v) {
  return static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
}

}  // namespace

HeatMap PixelMax(const HeatMap& a, const HeatMap& b) {
  RequireSameShape(a, b, "PixelMax");
  HeatMap out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(a[i], b[i]);
  return out;
}

HeatMap StackMax(std::span<const HeatMap> maps) {
  if (maps.empty()) throw std::invalid_argument("StackMax: empty stack");
  HeatMap out = maps.front();
  for (const auto& m : maps.subspan(1)) out = PixelMax(out, m);
  return out;
}

HeatMap Normalize01(const HeatMap& m) {
  const auto [lo, hi] = std::minmax_element(m.values().begin(), m.values().end());
  const double min = *lo;
  const double range = *hi - *lo;
  HeatMap out(m.width(), m.height(), 0.0);
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = (m[i] - min) / range;
  return out;
}

std::vector<double> GaussianKernel(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("Gaussian sigma must be > 0");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += k[i + radius];
  }
  for (auto& v : k) v /= sum;
  return k;
}

HeatMap GaussianBlur(const HeatMap& m, double sigma) {
  const auto k = GaussianKernel(sigma);
  const int r = static_cast<int>(k.size() / 2);
  const int w = m.width();
  const int h = m.height();
  HeatMap tmp(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int d = -r; d <= r; ++d) acc += k[d + r] * m.at(std::clamp(x + d, 0, w - 1), y);
      tmp.at(x, y) = acc;
    }
  }
  HeatMap out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int d = -r; d <= r; ++d) acc += k[d + r] * tmp.at(x, std::clamp(y + d, 0, h - 1));
      out.at(x, y) = acc;
    }
  }
  return out;
}

HeatMap FusePair(const HeatMap& a, const HeatMap& b, double sigma) {
  return Normalize01(GaussianBlur(PixelMax(a, b), sigma));
}

HeatMap ResizeMap(const HeatMap& m, int width, int height) {
  if (width < 1 || height < 1) throw std::invalid_argument("ResizeMap: target dims must be >= 1");
  const auto source_coord = [](int i, int n_out, int n_in) {
    return n_out == 1 ? 0.0 : static_cast<double>(i) * (n_in - 1) / (n_out - 1);
  };
  HeatMap out(width, height);
  for (int y = 0; y < height; ++y) {
    const double sy = source_coord(y, height, m.height());
    const int y0 = std::min(static_cast<int>(sy), m.height() - 1);
    const int y1 = std::min(y0 + 1, m.height() - 1);
    const double fy = sy - y0;
    for (int x = 0; x < width; ++x) {
      const double sx = source_coord(x, width, m.width());
      const int x0 = std::min(static_cast<int>(sx), m.width() - 1);
      const int x1 = std::min(x0 + 1, m.width() - 1);
      const double fx = sx - x0;
      const double top = m.at(x0, y0) + fx * (m.at(x1, y0) - m.at(x0, y0));
      const double bottom = m.at(x0, y1) + fx * (m.at(x1, y1) - m.at(x0, y1));
      out.at(x, y) = top + fy * (bottom - top);
    }
  }
  return out;
}

BinaryMask2D Dilate(const BinaryMask2D& m, int radius) {
  if (radius < 0) throw std::invalid_argument("Dilate: negative radius");
  const int w = m.width();
  const int h = m.height();
  // A square structuring element separates into a row pass and a column pass.
  BinaryMask2D rows(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!m.at(x, y)) continue;
      for (int d = std::max(0, x - radius); d <= std::min(w - 1, x + radius); ++d) rows.at(d, y) = 1;
    }
  }
  BinaryMask2D out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!rows.at(x, y)) continue;
      for (int d = std::max(0, y - radius); d <= std::min(h - 1, y + radius); ++d) out.at(x, d) = 1;
    }
  }
  return out;
}

BinaryMask2D ThresholdMask(const HeatMap& m, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::invalid_argument(fmt::format("threshold {} outside [0,1]", t));
  }
  BinaryMask2D out(m.width(), m.height());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] >= t ? 1 : 0;
  return out;
}

BinaryMask2D MaskIntersect(const BinaryMask2D& a, const BinaryMask2D& b) {
  RequireSameShape(a, b, "MaskIntersect");
  BinaryMask2D out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] && b[i]) ? 1 : 0;
  return out;
}

HeatMap ToHeatMap(const BinaryMask2D& m) {
  HeatMap out(m.width(), m.height());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] ? 1.0 : 0.0;
  return out;
}

BinaryMask2D RasterizeBoxes(std::span<const BBox> boxes, int width, int height) {
  BinaryMask2D out(width, height);
  for (const auto& b : boxes) {
    if (!b.Within(width, height)) {
      throw std::invalid_argument(fmt::format("box ({},{},{},{}) outside {}x{} image", b.x, b.y,
                                              b.w, b.h, width, height));
    }
    for (int y = b.y; y < b.y + b.h; ++y) {
      for (int x = b.x; x < b.x + b.w; ++x) out.at(x, y) = 1;
    }
  }
  return out;
}

HeatMap BoxesToTarget(std::span<const BBox> boxes, int width, int height, double sigma) {
  const HeatMap blurred = GaussianBlur(ToHeatMap(Dilate(RasterizeBoxes(boxes, width, height))), sigma);
  HeatMap out = blurred;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], 0.0, 1.0);
  return out;
}

HeatMap RefineProposal(const HeatMap& fused, std::span<const BBox> gt_boxes, double threshold,
                       double sigma) {
  const BinaryMask2D inside = RasterizeBoxes(gt_boxes, fused.width(), fused.height());
  return GaussianBlur(ToHeatMap(MaskIntersect(ThresholdMask(fused, threshold), inside)), sigma);
}

ComponentLabels LabelComponents(const BinaryMask2D& m) {
  const int w = m.width();
  const int h = m.height();
  ComponentLabels out{std::vector<int>(m.size(), -1), 0};
  std::vector<std::pair<int, int>> stack;
  for (int sy = 0; sy < h; ++sy) {
    for (int sx = 0; sx < w; ++sx) {
      const std::size_t s = static_cast<std::size_t>(sy) * w + sx;
      if (!m[s] || out.label[s] >= 0) continue;
      const int id = out.count++;
      out.label[s] = id;
      stack.emplace_back(sx, sy);
      while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx;
            const int ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const std::size_t n = static_cast<std::size_t>(ny) * w + nx;
            if (m[n] && out.label[n] < 0) {
              out.label[n] = id;
              stack.emplace_back(nx, ny);
            }
          }
        }
      }
    }
  }
  return out;
}

std::vector<BBox> ComponentsToBBoxes(const BinaryMask2D& m) {
  const auto comps = LabelComponents(m);
  const int w = m.width();
  struct Extent {
    int x0, y0, x1, y1;
  };
  std::vector<Extent> ext(comps.count, Extent{w, m.height(), -1, -1});
  for (std::size_t i = 0; i < comps.label.size(); ++i) {
    const int id = comps.label[i];
    if (id < 0) continue;
    const int x = static_cast<int>(i % w);
    const int y = static_cast<int>(i / w);
    auto& e = ext[id];
    e.x0 = std::min(e.x0, x);
    e.y0 = std::min(e.y0, y);
    e.x1 = std::max(e.x1, x);
    e.y1 = std::max(e.y1, y);
  }
  std::vector<BBox> boxes;
  boxes.reserve(ext.size());
  for (const auto& e : ext) boxes.push_back({e.x0, e.y0, e.x1 - e.x0 + 1, e.y1 - e.y0 + 1});
  std::stable_sort(boxes.begin(), boxes.end(), [](const BBox& a, const BBox& b) {
    return std::make_tuple(-a.area(), a.y, a.x) < std::make_tuple(-b.area(), b.y, b.x);
  });
  return boxes;
}

Image8 Clahe(const Image8& img, double clip_limit, int tiles_x, int tiles_y) {
  if (!(clip_limit >= 1.0)) throw std::invalid_argument("CLAHE clip limit must be >= 1");
  if (tiles_x < 1 || tiles_y < 1) throw std::invalid_argument("CLAHE tile grid must be >= 1x1");
  const int w = img.width();
  const int h = img.height();
  if (w < tiles_x || h < tiles_y) {
    throw std::invalid_argument(
        fmt::format("CLAHE: {}x{} image is smaller than the {}x{} tile grid", w, h, tiles_x, tiles_y));
  }
  // Tiles share one size; the image is extended by mirror reflection (edge
  // pixel not repeated) up to tiles * tile size.
  const int tw = (w + tiles_x - 1) / tiles_x;
  const int th = (h + tiles_y - 1) / tiles_y;
  const auto reflect = [](int p, int n) { return p < n ? p : std::max(0, 2 * (n - 1) - p); };

  constexpr int kBins = 256;
  const long long area = static_cast<long long>(tw) * th;
  const double scaled = clip_limit * static_cast<double>(area) / kBins;
  const long long limit = std::max<long long>(
      1, scaled >= 9.0e18 ? static_cast<long long>(9.0e18) : static_cast<long long>(scaled));
  std::vector<std::array<std::uint8_t, kBins>> luts(static_cast<std::size_t>(tiles_x) * tiles_y);
  for (int ty = 0; ty < tiles_y; ++ty) {
    for (int tx = 0; tx < tiles_x; ++tx) {
      std::array<long long, kBins> hist{};
      for (int y = ty * th; y < (ty + 1) * th; ++y) {
        for (int x = tx * tw; x < (tx + 1) * tw; ++x) ++hist[img.at(reflect(x, w), reflect(y, h))];
      }
      long long excess = 0;
      for (auto& c : hist) {
        if (c > limit) {
          excess += c - limit;
          c = limit;
        }
      }
      const long long batch = excess / kBins;
      long long residual = excess - batch * kBins;
      for (auto& c : hist) c += batch;
      if (residual > 0) {
        const long long step = std::max<long long>(kBins / residual, 1);
        for (long long i = 0; i < kBins && residual > 0; i += step, --residual) ++hist[i];
      }
      auto& lut = luts[static_cast<std::size_t>(ty) * tiles_x + tx];
      long long cdf = 0;
      for (int b = 0; b < kBins; ++b) {
        cdf += hist[b];
        lut[b] = ClampByte(255.0 * static_cast<double>(cdf) / static_cast<double>(area));
      }
    }
  }

  // Tile centres; pixels between two centres blend the neighbouring LUTs.
  const auto locate = [](int size, int tiles, int p, int& lo, int& hi, double& frac) {
    const auto centre = [&](int t) { return t * size + 0.5 * (size - 1); };
    if (p <= centre(0)) {
      lo = hi = 0;
      frac = 0.0;
      return;
    }
    if (p >= centre(tiles - 1)) {
      lo = hi = tiles - 1;
      frac = 0.0;
      return;
    }
    lo = static_cast<int>((p - centre(0)) / size);
    hi = lo + 1;
    frac = (p - centre(lo)) / size;
  };

  Image8 out(w, h);
  for (int y = 0; y < h; ++y) {
    int ty0, ty1;
    double fy;
    locate(th, tiles_y, y, ty0, ty1, fy);
    for (int x = 0; x < w; ++x) {
      int tx0, tx1;
      double fx;
      locate(tw, tiles_x, x, tx0, tx1, fx);
      const std::uint8_t v = img.at(x, y);
      const auto lut = [&](int tx, int ty) {
        return static_cast<double>(luts[static_cast<std::size_t>(ty) * tiles_x + tx][v]);
      };
      const double top = (1.0 - fx) * lut(tx0, ty0) + fx * lut(tx1, ty0);
      const double bottom = (1.0 - fx) * lut(tx0, ty1) + fx * lut(tx1, ty1);
      out.at(x, y) = ClampByte((1.0 - fy) * top + fy * bottom);
    }
  }
  return out;
}

Image8 GammaAdjust(const Image8& img, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
  std::array<std::uint8_t, 256> lut{};
  for (int v = 0; v < 256; ++v) lut[v] = ClampByte(255.0 * std::pow(v / 255.0, gamma));
  Image8 out = img;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = lut[img[i]];
  return out;
}

Image8 ImplantBlob(const Image8& img, const BlobParams& blob) {
  if (!(blob.radius > 0.0)) throw std::invalid_argument("blob radius must be > 0");
  if (!(blob.center_x >= 0.0 && blob.center_y >= 0.0 && blob.center_x <= img.width() - 1 &&
        blob.center_y <= img.height() - 1)) {
    throw std::invalid_argument("blob centre outside the image");
  }
  if (blob.intensity < 0 || blob.intensity > 255) {
    throw std::invalid_argument("blob intensity must be in 0..255");
  }
  if (!(blob.jitter >= 0.0 && blob.jitter < 1.0)) {
    throw std::invalid_argument("blob jitter must be in [0,1)");
  }

  // Outline radius r(theta) = radius * (1 - jitter * u(theta)), u in [0,1].
  std::array<double, 3> amp{};
  std::array<double, 3> phase{};
  if (blob.jitter > 0.0) {
    std::mt19937_64 rng(blob.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 3; ++k) {
      amp[k] = 0.2 + unit(rng);
      phase[k] = 2.0 * std::numbers::pi * unit(rng);
    }
  }
  const double amp_sum = amp[0] + amp[1] + amp[2];
  const auto outline = [&](double theta) {
    if (blob.jitter == 0.0) return blob.radius;
    double s = 0.0;
    for (int k = 0; k < 3; ++k) s += amp[k] * std::cos((k + 1) * theta + phase[k]);
    const double u = 0.5 * (1.0 + s / amp_sum);
    return blob.radius * (1.0 - blob.jitter * u);
  };

  Image8 out = img;
  const int x_lo = std::max(0, static_cast<int>(std::floor(blob.center_x - blob.radius)));
  const int x_hi = std::min(img.width() - 1, static_cast<int>(std::ceil(blob.center_x + blob.radius)));
  const int y_lo = std::max(0, static_cast<int>(std::floor(blob.center_y - blob.radius)));
  const int y_hi = std::min(img.height() - 1, static_cast<int>(std::ceil(blob.center_y + blob.radius)));
  for (int y = y_lo; y <= y_hi; ++y) {
    for (int x = x_lo; x <= x_hi; ++x) {
      const double dx = x - blob.center_x;
      const double dy = y - blob.center_y;
      const double d = std::hypot(dx, dy);
      const double r = outline(std::atan2(dy, dx));
      if (d >= r) continue;
      const double weight = 0.5 * (1.0 + std::cos(std::numbers::pi * d / r));
      const double v = img.at(x, y);
      out.at(x, y) = ClampByte(v + weight * (blob.intensity - v));
    }
  }
  return out;
}

}  // namespace drrscore::mapalgebra
