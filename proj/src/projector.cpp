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

#include "drrscore/projector.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

#include "drrscore/error.hpp"
#include "drrscore/mapalgebra.hpp"
#include "drrscore/siddon.hpp"
#include "drrscore/textio.hpp"

namespace drrscore::projector {

namespace fs = std::filesystem;
using materials::Material;

Spectrum::Spectrum(std::vector<SpectrumBin> bins) : bins_(std::move(bins)) {
  if (bins_.empty()) throw std::invalid_argument("spectrum has no bins");
  double total = 0.0;
  for (std::size_t i = 0; i < bins_.size(); ++i) {
    const auto& b = bins_[i];
    if (!(b.energy_kev > 0.0)) throw std::invalid_argument("spectrum energies must be > 0");
    if (i > 0 && !(b.energy_kev > bins_[i - 1].energy_kev)) {
      throw std::invalid_argument("spectrum energies must be strictly increasing");
    }
    if (!(b.photons >= 0.0) || !std::isfinite(b.photons)) {
      throw std::invalid_argument("spectrum photon counts must be >= 0");
    }
    total += b.photons;
  }
  if (!(total > 0.0)) throw std::invalid_argument("spectrum has no photons");
}

double Spectrum::total_photons() const {
  double total = 0.0;
  for (const auto& b : bins_) total += b.photons;
  return total;
}

double Spectrum::unattenuated_signal() const {
  double s = 0.0;
  for (const auto& b : bins_) s += b.photons * b.energy_kev;
  return s;
}

Spectrum Spectrum::ScaledTo(double total) const {
  if (!(total > 0.0)) throw std::invalid_argument("spectrum total must be > 0");
  const double k = total / total_photons();
  auto bins = bins_;
  for (auto& b : bins) b.photons *= k;
  return Spectrum(std::move(bins));
}

AttenuationTable::AttenuationTable(
    std::vector<double> energies_kev,
    std::array<std::vector<double>, materials::kMaterialCount> mu_rho,
    std::array<double, materials::kMaterialCount> density)
    : energies_(std::move(energies_kev)), mu_rho_(std::move(mu_rho)), density_(density) {
  if (energies_.empty()) throw std::invalid_argument("attenuation table has no energies");
  for (std::size_t i = 0; i < energies_.size(); ++i) {
    if (!(energies_[i] > 0.0)) throw std::invalid_argument("table energies must be > 0");
    if (i > 0 && !(energies_[i] > energies_[i - 1])) {
      throw std::invalid_argument("table energies must be strictly increasing");
    }
  }
  for (int m = 0; m < materials::kMaterialCount; ++m) {
    if (mu_rho_[m].size() != energies_.size()) {
      throw std::invalid_argument("attenuation column length differs from energy column");
    }
    for (double v : mu_rho_[m]) {
      if (!(v > 0.0)) throw std::invalid_argument("mass attenuation coefficients must be > 0");
    }
    if (!(density_[m] >= 0.0)) throw std::invalid_argument("densities must be >= 0");
  }
}

bool AttenuationTable::Covers(double e) const {
  return e >= energies_.front() && e <= energies_.back();
}

double AttenuationTable::MassAttenuation(Material m, double e) const {
  if (!Covers(e)) {
    throw std::invalid_argument(fmt::format("energy {} keV outside the attenuation table", e));
  }
  const auto& col = mu_rho_[static_cast<int>(m)];
  const auto hi = std::lower_bound(energies_.begin(), energies_.end(), e);
  const auto i = static_cast<std::size_t>(hi - energies_.begin());
  if (*hi == e) return col[i];
  const double e0 = energies_[i - 1];
  const double e1 = energies_[i];
  const double f = std::log(e / e0) / std::log(e1 / e0);
  return std::exp(std::log(col[i - 1]) + f * (std::log(col[i]) - std::log(col[i - 1])));
}

double AttenuationTable::LinearAttenuation(Material m, double e) const {
  return MassAttenuation(m, e) * density(m);
}

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

Table ReadTsv(const fs::path& path) {
  Table t;
  for (const auto& raw : textio::Split(textio::ReadTextFile(path), '\n')) {
    const std::string line = textio::Trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto fields = textio::Split(line, '\t');
    for (auto& f : fields) f = textio::Trim(f);
    if (t.header.empty()) {
      t.header = std::move(fields);
    } else {
      if (fields.size() != t.header.size()) {
        throw DataError(fmt::format("'{}': row has {} fields, header has {}", path.string(),
                                    fields.size(), t.header.size()));
      }
      t.rows.push_back(std::move(fields));
    }
  }
  if (t.header.empty()) throw DataError(fmt::format("'{}': missing header row", path.string()));
  return t;
}

}  // namespace

Spectrum ReadSpectrum(const fs::path& path) {
  const Table t = ReadTsv(path);
  if (t.header.size() != 2 || t.header[0] != "energy_keV" || t.header[1] != "photons") {
    throw DataError(fmt::format("'{}': expected header 'energy_keV<TAB>photons'", path.string()));
  }
  std::vector<SpectrumBin> bins;
  for (const auto& r : t.rows) {
    bins.push_back({textio::ParseDouble(r[0], "energy_keV"), textio::ParseDouble(r[1], "photons")});
  }
  try {
    return Spectrum(std::move(bins));
  } catch (const std::invalid_argument& e) {
    throw DataError(fmt::format("'{}': {}", path.string(), e.what()));
  }
}

AttenuationTable ReadAttenuationTable(const fs::path& path) {
  const Table t = ReadTsv(path);
  const std::vector<std::string> expected{"energy_keV", "air", "soft", "bone"};
  if (t.header != expected) {
    throw DataError(fmt::format("'{}': expected header 'energy_keV<TAB>air<TAB>soft<TAB>bone'",
                                path.string()));
  }
  std::vector<double> energies;
  std::array<std::vector<double>, materials::kMaterialCount> mu;
  std::array<double, materials::kMaterialCount> density{};
  bool have_density = false;
  for (const auto& r : t.rows) {
    if (r[0] == "density") {
      for (int m = 0; m < 3; ++m) density[m] = textio::ParseDouble(r[m + 1], "density");
      have_density = true;
      continue;
    }
    energies.push_back(textio::ParseDouble(r[0], "energy_keV"));
    for (int m = 0; m < 3; ++m) mu[m].push_back(textio::ParseDouble(r[m + 1], "mu/rho"));
  }
  if (!have_density) throw DataError(fmt::format("'{}': missing density row", path.string()));
  try {
    return AttenuationTable(std::move(energies), std::move(mu), density);
  } catch (const std::invalid_argument& e) {
    throw DataError(fmt::format("'{}': {}", path.string(), e.what()));
  }
}

std::string ToString(BeamMode m) { return m == BeamMode::kParallel ? "parallel" : "cone"; }
std::string ToString(View v) { return v == View::kPA ? "PA" : "AP"; }

BeamMode ParseBeamMode(const std::string& s) {
  if (s == "parallel") return BeamMode::kParallel;
  if (s == "cone") return BeamMode::kCone;
  throw DataError(fmt::format("unknown beam mode '{}'", s));
}

View ParseView(const std::string& s) {
  if (s == "PA" || s == "pa") return View::kPA;
  if (s == "AP" || s == "ap") return View::kAP;
  throw DataError(fmt::format("unknown view '{}'", s));
}

void DetectorGeometry::Validate() const {
  if (width < 1 || height < 1) throw std::invalid_argument("detector size must be >= 1 pixel");
  if (!(pixel_mm > 0.0)) throw std::invalid_argument("detector pixel size must be > 0");
  if (mode == BeamMode::kCone && !(sad_mm > 0.0 && sad_mm < sdd_mm)) {
    throw std::invalid_argument("cone geometry needs 0 < SAD < SDD");
  }
}

namespace {

Vec3 Add(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Vec3 Scale(const Vec3& a, double k) { return {a.x * k, a.y * k, a.z * k}; }

Vec3 Normalized(const Vec3& v) {
  const double n = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
  return Scale(v, 1.0 / n);
}

// Runs body(row) for every row, rows split into contiguous blocks.
template <typename Body>
void ForEachRow(int rows, int threads, Body&& body) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::clamp(threads, 1, std::max(1, rows));
  if (threads == 1) {
    for (int r = 0; r < rows; ++r) body(r);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    const int begin = static_cast<int>(static_cast<long long>(rows) * t / threads);
    const int end = static_cast<int>(static_cast<long long>(rows) * (t + 1) / threads);
    pool.emplace_back([begin, end, &body] {
      for (int r = begin; r < end; ++r) body(r);
    });
  }
}

}  // namespace

Ray PixelRay(const volume::Grid& grid, const DetectorGeometry& det, int col, int row) {
  const Vec3 lo = grid.BoundsMin();
  const Vec3 hi = grid.BoundsMax();
  const Vec3 centre = Scale(Add(lo, hi), 0.5);
  const bool pa = det.view == View::kPA;
  const Vec3 beam{0.0, pa ? -1.0 : 1.0, 0.0};
  const Vec3 u_axis{pa ? 1.0 : -1.0, 0.0, 0.0};
  const Vec3 v_axis{0.0, 0.0, -1.0};
  const double u = (col - 0.5 * (det.width - 1)) * det.pixel_mm;
  const double v = (row - 0.5 * (det.height - 1)) * det.pixel_mm;
  const Vec3 offset = Add(Scale(u_axis, u), Scale(v_axis, v));

  if (det.mode == BeamMode::kParallel) {
    const Vec3 extent{hi.x - lo.x, hi.y - lo.y, hi.z - lo.z};
    const double back = std::sqrt(extent.x * extent.x + extent.y * extent.y + extent.z * extent.z) + 1.0;
    return {Add(Add(centre, offset), Scale(beam, -back)), beam};
  }
  const Vec3 source = Add(centre, Scale(beam, -det.sad_mm));
  const Vec3 pixel = Add(Add(source, Scale(beam, det.sdd_mm)), offset);
  return {source, Normalized(Add(pixel, Scale(source, -1.0)))};
}

PathLengths TraceRay(const MaterialMasks& masks, const Ray& ray) {
  PathLengths out;
  TraverseVoxels(masks.grid(), ray.origin, ray.direction, [&](std::size_t idx, double len) {
    out.cm[static_cast<int>(masks.At(idx))] += len;
  });
  for (auto& l : out.cm) l *= 0.1;
  return out;
}

Radiograph Project(const MaterialMasks& masks, const DetectorGeometry& det,
                   const Spectrum& spectrum, const AttenuationTable& table, int threads) {
  det.Validate();
  if (!masks.IsPartition()) throw std::invalid_argument("material masks are not a partition");
  const auto& bins = spectrum.bins();
  for (const auto& b : bins) {
    if (!table.Covers(b.energy_kev)) {
      throw std::invalid_argument(fmt::format(
          "spectrum energy {} keV outside the attenuation table range", b.energy_kev));
    }
  }
  // Linear attenuation per (material, bin) and per-bin weight photons * E.
  std::vector<std::array<double, materials::kMaterialCount>> mu(bins.size());
  std::vector<double> weight(bins.size());
  for (std::size_t e = 0; e < bins.size(); ++e) {
    for (int m = 0; m < materials::kMaterialCount; ++m) {
      mu[e][m] = table.LinearAttenuation(static_cast<Material>(m), bins[e].energy_kev);
    }
    weight[e] = bins[e].photons * bins[e].energy_kev;
  }

  const volume::Grid& grid = masks.grid();
  std::vector<std::uint8_t> labels(grid.dims.count());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<std::uint8_t>(masks.At(i));

  Radiograph out{det, std::vector<double>(static_cast<std::size_t>(det.width) * det.height)};
  ForEachRow(det.height, threads, [&](int row) {
    for (int col = 0; col < det.width; ++col) {
      const Ray ray = PixelRay(grid, det, col, row);
      std::array<double, materials::kMaterialCount> len{};
      TraverseVoxels(grid, ray.origin, ray.direction,
                     [&](std::size_t idx, double l) { len[labels[idx]] += l; });
      for (auto& l : len) l *= 0.1;
      double signal = 0.0;
      for (std::size_t e = 0; e < bins.size(); ++e) {
        const double depth = mu[e][0] * len[0] + mu[e][1] * len[1] + mu[e][2] * len[2];
        signal += weight[e] * std::exp(-depth);
      }
      out.values[static_cast<std::size_t>(row) * det.width + col] = signal;
    }
  });
  return out;
}

image::HeatMap MaskThickness(const volume::VoxelMask& mask, const DetectorGeometry& det,
                             int threads) {
  det.Validate();
  image::HeatMap out(det.width, det.height);
  ForEachRow(det.height, threads, [&](int row) {
    for (int col = 0; col < det.width; ++col) {
      const Ray ray = PixelRay(mask.grid(), det, col, row);
      double len = 0.0;
      TraverseVoxels(mask.grid(), ray.origin, ray.direction, [&](std::size_t idx, double l) {
        if (mask.test(idx)) len += l;
      });
      out.at(col, row) = 0.1 * len;
    }
  });
  return out;
}

image::BinaryMask2D MaskFootprint(const volume::VoxelMask& mask, const DetectorGeometry& det,
                                  double min_cm, int threads) {
  const image::HeatMap thickness = MaskThickness(mask, det, threads);
  image::BinaryMask2D out(det.width, det.height);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = thickness[i] > min_cm ? 1 : 0;
  return out;
}

Radiograph EstimateScatter(const Radiograph& primary, double fraction, double sigma_px) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("scatter fraction must be in [0,1)");
  }
  if (!(sigma_px >= 1.0)) throw std::invalid_argument("scatter kernel width must be >= 1 px");
  const int w = primary.width();
  const int h = primary.height();
  Radiograph out{primary.geometry, std::vector<double>(primary.values.size(), 0.0)};
  if (fraction == 0.0) return out;

  const auto k = mapalgebra::GaussianKernel(sigma_px);
  const int r = static_cast<int>(k.size() / 2);
  std::vector<double> tmp(primary.values.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int d = std::max(-r, -x); d <= std::min(r, w - 1 - x); ++d) {
        acc += k[d + r] * primary.values[static_cast<std::size_t>(y) * w + x + d];
      }
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int d = std::max(-r, -y); d <= std::min(r, h - 1 - y); ++d) {
        acc += k[d + r] * tmp[static_cast<std::size_t>(y + d) * w + x];
      }
      out.values[static_cast<std::size_t>(y) * w + x] = fraction * acc;
    }
  }
  return out;
}

Radiograph AddImages(const Radiograph& a, const Radiograph& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw std::invalid_argument("radiograph sizes differ");
  }
  Radiograph out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += b.values[i];
  return out;
}

namespace {

// SplitMix64: a counter-based generator, so each pixel owns an independent
// stream derived from (seed, pixel index).
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

std::uint64_t PixelStream(std::uint64_t seed, std::uint64_t pixel) {
  SplitMix64 mix(seed);
  return mix() ^ (pixel * 0xD1B54A32D192ED03ull);
}

}  // namespace

Radiograph AddNoise(const Radiograph& img, const Spectrum& spectrum, std::uint64_t seed,
                    int threads) {
  for (double v : img.values) {
    if (!(v >= 0.0)) throw std::invalid_argument("cannot add noise to negative intensities");
  }
  const double photons = spectrum.total_photons();
  const double full = spectrum.unattenuated_signal();
  Radiograph out{img.geometry, std::vector<double>(img.values.size(), 0.0)};
  const int w = img.width();
  ForEachRow(img.height(), threads, [&](int row) {
    for (int col = 0; col < w; ++col) {
      const std::size_t i = static_cast<std::size_t>(row) * w + col;
      const double expected = img.values[i] / full * photons;
      if (expected <= 0.0) continue;
      SplitMix64 rng(PixelStream(seed, i));
      std::poisson_distribution<long long> draw(expected);
      out.values[i] = static_cast<double>(draw(rng)) * full / photons;
    }
  });
  return out;
}

image::Image8 ApplyBrightGamma(const image::Image8& img) {
  double sum = 0.0;
  for (auto v : img.values()) sum += v;
  const double mean = sum / static_cast<double>(img.size());
  if (mean > kBrightMeanThreshold) return mapalgebra::GammaAdjust(img, kBrightGamma);
  return img;
}

image::Image8 Postprocess(const Radiograph& img) {
  for (double v : img.values) {
    if (!(v >= 0.0)) throw std::invalid_argument("radiograph has negative values");
  }
  const auto [lo, hi] = std::minmax_element(img.values.begin(), img.values.end());
  image::Image8 out(img.width(), img.height(), 128);
  const double range = *hi - *lo;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < img.values.size(); ++i) {
    const double inverted = 1.0 - (img.values[i] - *lo) / range;
    out[i] = static_cast<std::uint8_t>(std::clamp<long>(std::lround(255.0 * inverted), 0, 255));
  }
  return ApplyBrightGamma(out);
}

void WriteRadiograph(const Radiograph& r, const fs::path& base) {
  std::vector<float> values(r.values.begin(), r.values.end());
  textio::WriteBytes(fs::path(base.string() + ".f32.raw"), textio::EncodeFloat32LE(values));
  const auto& g = r.geometry;
  textio::KeyValueDoc doc;
  doc.entries = {{"width", std::to_string(g.width)},
                 {"height", std::to_string(g.height)},
                 {"pixel_mm", textio::FormatExact(g.pixel_mm)},
                 {"mode", ToString(g.mode)},
                 {"sdd_mm", textio::FormatExact(g.sdd_mm)},
                 {"sad_mm", textio::FormatExact(g.sad_mm)},
                 {"view", ToString(g.view)},
                 {"dtype", "float32le"}};
  textio::WriteKeyValueFile(fs::path(base.string() + ".meta"), doc);
}

Radiograph ReadRadiograph(const fs::path& base) {
  const auto doc = textio::ReadKeyValueFile(fs::path(base.string() + ".meta"));
  DetectorGeometry g;
  g.width = static_cast<int>(textio::ParseInt(doc.Get("width"), "width"));
  g.height = static_cast<int>(textio::ParseInt(doc.Get("height"), "height"));
  g.pixel_mm = textio::ParseDouble(doc.Get("pixel_mm"), "pixel_mm");
  g.mode = ParseBeamMode(doc.Get("mode"));
  g.sdd_mm = textio::ParseDouble(doc.Get("sdd_mm"), "sdd_mm");
  g.sad_mm = textio::ParseDouble(doc.Get("sad_mm"), "sad_mm");
  g.view = ParseView(doc.Get("view"));
  try {
    g.Validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  const auto values = textio::DecodeFloat32LE(textio::ReadBytes(fs::path(base.string() + ".f32.raw")));
  if (values.size() != static_cast<std::size_t>(g.width) * g.height) {
    throw DataError("radiograph payload size does not match its metadata");
  }
  return {g, std::vector<double>(values.begin(), values.end())};
}

}  // namespace drrscore::projector
