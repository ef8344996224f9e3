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

// Evaluation numerics: box overlap and RSNA-style mean average precision,
// ROC analysis, confusion statistics, overlap coefficients, correlation and
// least squares, and the detection + localization training loss.

#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "drrscore/image.hpp"

namespace drrscore::metrics {

using image::BBox;
using image::BinaryMask2D;
using image::HeatMap;

struct MatchCounts {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

struct RocPoint {
  double threshold = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

// IoU thresholds 0.40, 0.45, ..., 0.75.
inline constexpr std::array<double, 8> kIouThresholds{0.40, 0.45, 0.50, 0.55,
                                                      0.60, 0.65, 0.70, 0.75};

// Pixel-area intersection over union, in [0,1].
double Iou(const BBox& a, const BBox& b);

// Greedy one-to-one matching in descending IoU order; a pair is eligible when
// IoU >= iou_threshold. Ties keep (pred index, gt index) order.
MatchCounts MatchBoxes(std::span<const BBox> pred, std::span<const BBox> gt,
                       double iou_threshold);

// tp / (tp + fp + fn), and 1.0 for an image with nothing to find and
// nothing predicted.
double RsnaPrecision(const MatchCounts& c);

// Mean RsnaPrecision over kIouThresholds.
double ImageAp(std::span<const BBox> pred, std::span<const BBox> gt);

struct ImageBoxes {
  std::vector<BBox> pred;
  std::vector<BBox> gt;
};

// Mean ImageAp over a non-empty dataset.
double MapScore(std::span<const ImageBoxes> dataset);

struct SweepPoint {
  double threshold = 0.0;
  double map = 0.0;
};

// Localization thresholds 0.50, 0.55, ..., 0.90.
std::vector<double> DefaultLocalizationThresholds();

// For each threshold: threshold the (normalized) map, box each connected
// component, and score the resulting boxes against the ground truth.
std::vector<SweepPoint> LocalizationSweep(std::span<const HeatMap> maps,
                                          std::span<const std::vector<BBox>> gts,
                                          std::span<const double> thresholds);

// Points for every distinct score (predict positive when score >= threshold)
// preceded by the all-negative point at threshold +inf, in decreasing
// threshold order. Both classes must be present.
std::vector<RocPoint> RocCurve(std::span<const double> scores, std::span<const int> labels);
// Trapezoidal area under (1 - specificity, sensitivity).
double Auc(std::span<const RocPoint> curve);

// Point closest to sensitivity = specificity = 1; ties go to the lower
// threshold.
RocPoint OptimalOperatingPoint(std::span<const RocPoint> curve);

// Ratios whose denominator is zero are left empty.
struct ConfusionStats {
  int tp = 0;
  int fp = 0;
  int tn = 0;
  int fn = 0;
  std::optional<double> accuracy;
  std::optional<double> ppv;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
};

ConfusionStats ComputeConfusion(std::span<const int> predictions, std::span<const int> labels);

// Both return 1.0 when both masks are empty.
double Dice(const BinaryMask2D& a, const BinaryMask2D& b);
double Jaccard(const BinaryMask2D& a, const BinaryMask2D& b);

double PearsonR(std::span<const double> x, std::span<const double> y);
double RSquared(std::span<const double> x, std::span<const double> y);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LinearFit LinFit(std::span<const double> x, std::span<const double> y);

inline constexpr double kLossLambda = 1e-5;
inline constexpr double kProbabilityEpsilon = 1e-7;

// Binary cross entropy on the detection probability (clamped to
// [eps, 1 - eps]) plus lambda times the mean squared map error.
double CombinedLoss(double p, double label, const HeatMap& pred_map, const HeatMap& gt_map,
                    double lambda = kLossLambda);

}  // namespace drrscore::metrics
