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

// Map algebra over localization heat maps and masks: target preparation from
// boxes, activation fusion and refinement, thresholding, component boxes,
// contrast enhancement and augmentation.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "drrscore/image.hpp"

namespace drrscore::mapalgebra {

using image::BBox;
using image::BinaryMask2D;
using image::HeatMap;
using image::Image8;

// Blur widths for the two working scales (56x56 maps and 448x448 images).
inline constexpr double kMapScaleSigma = 2.0;
inline constexpr double kFullScaleSigma = 8.0;
inline constexpr double kProposalThreshold = 0.4;
inline constexpr double kLocalizationThreshold = 0.8;
inline constexpr int kDilateRadius = 2;  // 5x5 structuring element

// Pixelwise maximum over a non-empty stack of equally sized maps.
HeatMap StackMax(std::span<const HeatMap> maps);
HeatMap PixelMax(const HeatMap& a, const HeatMap& b);

// Min-max scaling to [0,1]. A constant map becomes the zero map.
HeatMap Normalize01(const HeatMap& m);

// Separable Gaussian with kernel truncated at ceil(3 sigma), normalized to
// unit sum; borders replicate the edge pixel so constants are preserved.
HeatMap GaussianBlur(const HeatMap& m, double sigma);
std::vector<double> GaussianKernel(double sigma);

// normalize01(blur(max(a, b))).
HeatMap FusePair(const HeatMap& a, const HeatMap& b, double sigma = kFullScaleSigma);

// Bilinear resampling with corner pixels aligned: output pixel x maps to
// source coordinate x * (w_in - 1) / (w_out - 1).
HeatMap ResizeMap(const HeatMap& m, int width, int height);

BinaryMask2D Dilate(const BinaryMask2D& m, int radius = kDilateRadius);
// Set where m >= t; t must lie in [0,1].
BinaryMask2D ThresholdMask(const HeatMap& m, double t);
BinaryMask2D MaskIntersect(const BinaryMask2D& a, const BinaryMask2D& b);
HeatMap ToHeatMap(const BinaryMask2D& m);

// Union of filled boxes; every box must lie inside width x height.
BinaryMask2D RasterizeBoxes(std::span<const BBox> boxes, int width, int height);

// Training target: union of boxes, dilated 5x5, then blurred.
HeatMap BoxesToTarget(std::span<const BBox> boxes, int width, int height,
                      double sigma = kFullScaleSigma);

// blur(threshold(fused, threshold) AND boxes).
HeatMap RefineProposal(const HeatMap& fused, std::span<const BBox> gt_boxes,
                       double threshold = kProposalThreshold,
                       double sigma = kFullScaleSigma);

struct ComponentLabels {
  std::vector<int> label;  // -1 for unset pixels
  int count = 0;
};

// 8-connected labeling; components are numbered in raster order of their
// first pixel.
ComponentLabels LabelComponents(const BinaryMask2D& m);

// One tight box per 8-connected component, largest box area first; ties are
// ordered by (y, x).
std::vector<BBox> ComponentsToBBoxes(const BinaryMask2D& m);

// Contrast-limited adaptive histogram equalization. `clip_limit` is relative
// to a uniform histogram (clip_limit * tile_area / 256 counts per bin).
Image8 Clahe(const Image8& img, double clip_limit = 2.0, int tiles_x = 8, int tiles_y = 8);

// v <- round(255 * (v / 255)^gamma).
Image8 GammaAdjust(const Image8& img, double gamma);

struct BlobParams {
  double center_x = 0.0;
  double center_y = 0.0;
  double radius = 1.0;
  int intensity = 255;
  // Fraction in [0,1) by which the outline may be pulled inwards by a
  // seeded angular perturbation; 0 gives a circle.
  double jitter = 0.0;
  std::uint64_t seed = 0;
};

// Blends pixels within the blob outline towards `intensity` with a raised
// cosine falloff (weight 1 at the centre, 0 at the outline).
Image8 ImplantBlob(const Image8& img, const BlobParams& blob);

}  // namespace drrscore::mapalgebra
