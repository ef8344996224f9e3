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

// Digitally reconstructed radiographs: per-material path lengths through a
// decomposed CT volume, polychromatic Beer-Lambert attenuation, a kernel
// scatter estimate, Poisson quantum noise and display post-processing.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "drrscore/image.hpp"
#include "drrscore/materials.hpp"
#include "drrscore/volume.hpp"

namespace drrscore::projector {

using materials::MaterialMasks;
using volume::Vec3;

struct SpectrumBin {
  double energy_kev = 0.0;
  // Expected photons per pixel in this bin.
  double photons = 0.0;
};

class Spectrum {
 public:
  // Energies strictly increasing and > 0, photons >= 0 with a positive total.
  explicit Spectrum(std::vector<SpectrumBin> bins);

  const std::vector<SpectrumBin>& bins() const { return bins_; }
  double total_photons() const;
  // Sum of photons * energy: the detector signal with nothing in the beam.
  double unattenuated_signal() const;
  // Same shape, total photon count rescaled to `total`.
  Spectrum ScaledTo(double total) const;

 private:
  std::vector<SpectrumBin> bins_;
};

// Mass attenuation coefficients (cm^2/g) per material on a shared energy
// grid, plus material densities (g/cm^3).
class AttenuationTable {
 public:
  AttenuationTable(std::vector<double> energies_kev,
                   std::array<std::vector<double>, materials::kMaterialCount> mu_rho,
                   std::array<double, materials::kMaterialCount> density);

  const std::vector<double>& energies() const { return energies_; }
  double density(materials::Material m) const { return density_[static_cast<int>(m)]; }
  // Interpolated mu/rho; linear in log(mu/rho) versus log(E).
  double MassAttenuation(materials::Material m, double energy_kev) const;
  // mu/rho * rho, in 1/cm.
  double LinearAttenuation(materials::Material m, double energy_kev) const;
  bool Covers(double energy_kev) const;

 private:
  std::vector<double> energies_;
  std::array<std::vector<double>, materials::kMaterialCount> mu_rho_;
  std::array<double, materials::kMaterialCount> density_;
};

// Tab-separated tables with a header row; '#' lines are comments.
// Spectrum columns: energy_keV, photons. Attenuation columns: energy_keV,
// air, soft, bone, plus one row whose first field is `density`.
Spectrum ReadSpectrum(const std::filesystem::path& path);
AttenuationTable ReadAttenuationTable(const std::filesystem::path& path);

enum class BeamMode { kParallel, kCone };
enum class View { kPA, kAP };

std::string ToString(BeamMode m);
std::string ToString(View v);
BeamMode ParseBeamMode(const std::string& s);
View ParseView(const std::string& s);

// The isocentre is the centre of the volume's bounding box. PA rays travel
// along -y (towards the patient's front, y being posterior) with image
// columns along +x; AP reverses the beam and mirrors the columns. Image rows
// run from +z (top) to -z.
struct DetectorGeometry {
  int width = 1024;
  int height = 1024;
  double pixel_mm = 0.168;
  BeamMode mode = BeamMode::kCone;
  double sdd_mm = 1800.0;
  double sad_mm = 1500.0;
  View view = View::kPA;

  void Validate() const;
  friend bool operator==(const DetectorGeometry&, const DetectorGeometry&) = default;
};

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
};

// Ray hitting the centre of detector pixel (col, row) for a volume grid.
Ray PixelRay(const volume::Grid& grid, const DetectorGeometry& det, int col, int row);

struct PathLengths {
  std::array<double, materials::kMaterialCount> cm{};
  double total() const { return cm[0] + cm[1] + cm[2]; }
};

PathLengths TraceRay(const MaterialMasks& masks, const Ray& ray);

struct Radiograph {
  DetectorGeometry geometry;
  // Row-major energy-weighted detector signal, width * height values >= 0.
  std::vector<double> values;

  int width() const { return geometry.width; }
  int height() const { return geometry.height; }
  double at(int col, int row) const {
    return values[static_cast<std::size_t>(row) * geometry.width + col];
  }
};

// Noiseless, scatter-free projection:
//   I = sum_E photons(E) * E * exp(-sum_m mu_rho(m,E) * rho_m * l_m).
// Pixels are independent, so the output does not depend on `threads`.
Radiograph Project(const MaterialMasks& masks, const DetectorGeometry& det,
                   const Spectrum& spectrum, const AttenuationTable& table, int threads = 1);

// Path length (cm) of each detector ray through the set voxels of `mask`.
image::HeatMap MaskThickness(const volume::VoxelMask& mask, const DetectorGeometry& det,
                             int threads = 1);
// Pixels whose ray crosses more than `min_cm` of the mask.
image::BinaryMask2D MaskFootprint(const volume::VoxelMask& mask, const DetectorGeometry& det,
                                  double min_cm = 0.0, int threads = 1);

inline constexpr double kDefaultScatterFraction = 0.10;
inline constexpr double kDefaultScatterSigmaPx = 50.0;

// fraction * (primary convolved with a unit-sum Gaussian of width sigma_px,
// truncated at 3 sigma, zero outside the image). Returned on its own so the
// caller adds it to the primary.
Radiograph EstimateScatter(const Radiograph& primary, double fraction,
                           double sigma_px = kDefaultScatterSigmaPx);
Radiograph AddImages(const Radiograph& a, const Radiograph& b);

// Replaces each pixel's expected photon count (signal / unattenuated signal
// * total photons) by a Poisson draw and rescales back to signal units. The
// generator for pixel i is seeded from (seed, i) alone.
Radiograph AddNoise(const Radiograph& img, const Spectrum& spectrum, std::uint64_t seed,
                    int threads = 1);

inline constexpr double kBrightMeanThreshold = 220.0;
inline constexpr double kBrightGamma = 0.2;

// Gamma 0.2 when the 8-bit mean exceeds 220, identity otherwise.
image::Image8 ApplyBrightGamma(const image::Image8& img);

// Min-max scale, invert, quantize to 8 bits, then ApplyBrightGamma. A
// constant image maps to all 128.
image::Image8 Postprocess(const Radiograph& img);

// `<base>.f32.raw` + `<base>.meta`.
void WriteRadiograph(const Radiograph& r, const std::filesystem::path& base);
Radiograph ReadRadiograph(const std::filesystem::path& base);

}  // namespace drrscore::projector
