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

#include "drrscore/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "drrscore/mapalgebra.hpp"

namespace drrscore::metrics {

double Iou(const BBox& a, const BBox& b) {
  const long long iw = std::max(0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const long long ih = std::max(0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const long long inter = iw * ih;
  const long long uni = a.area() + b.area() - inter;
  if (uni <= 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

MatchCounts MatchBoxes(std::span<const BBox> pred, std::span<const BBox> gt,
                       double iou_threshold) {
  struct Pair {
    double iou;
    std::size_t p;
    std::size_t g;
  };
  std::vector<Pair> pairs;
  for (std::size_t p = 0; p < pred.size(); ++p) {
    for (std::size_t g = 0; g < gt.size(); ++g) {
      const double v = Iou(pred[p], gt[g]);
      if (v >= iou_threshold) pairs.push_back({v, p, g});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Pair& a, const Pair& b) { return a.iou > b.iou; });
  std::vector<bool> pred_used(pred.size(), false);
  std::vector<bool> gt_used(gt.size(), false);
  MatchCounts c;
  for (const auto& pr : pairs) {
    if (pred_used[pr.p] || gt_used[pr.g]) continue;
    pred_used[pr.p] = true;
    gt_used[pr.g] = true;
    ++c.tp;
  }
  c.fp = static_cast<int>(pred.size()) - c.tp;
  c.fn = static_cast<int>(gt.size()) - c.tp;
  return c;
}

double RsnaPrecision(const MatchCounts& c) {
  const int denom = c.tp + c.fp + c.fn;
  if (denom == 0) return 1.0;
  return static_cast<double>(c.tp) / denom;
}

double ImageAp(std::span<const BBox> pred, std::span<const BBox> gt) {
  double sum = 0.0;
  for (double t : kIouThresholds) sum += RsnaPrecision(MatchBoxes(pred, gt, t));
  return sum / static_cast<double>(kIouThresholds.size());
}

double MapScore(std::span<const ImageBoxes> dataset) {
  if (dataset.empty()) throw std::invalid_argument("mAP needs at least one image");
  double sum = 0.0;
  for (const auto& img : dataset) sum += ImageAp(img.pred, img.gt);
  return sum / static_cast<double>(dataset.size());
}

std::vector<double> DefaultLocalizationThresholds() {
  std::vector<double> t;
  for (int k = 50; k <= 90; k += 5) t.push_back(k / 100.0);
  return t;
}

std::vector<SweepPoint> LocalizationSweep(std::span<const HeatMap> maps,
                                          std::span<const std::vector<BBox>> gts,
                                          std::span<const double> thresholds) {
  if (maps.size() != gts.size()) {
    throw std::invalid_argument("sweep needs one ground-truth list per map");
  }
  std::vector<SweepPoint> out;
  for (double t : thresholds) {
    std::vector<ImageBoxes> dataset;
    dataset.reserve(maps.size());
    for (std::size_t i = 0; i < maps.size(); ++i) {
      dataset.push_back(
          {mapalgebra::ComponentsToBBoxes(mapalgebra::ThresholdMask(maps[i], t)), gts[i]});
    }
    out.push_back({t, MapScore(dataset)});
  }
  return out;
}

std::vector<RocPoint> RocCurve(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("scores and labels differ in length");
  }
  long long pos = 0;
  long long neg = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw std::invalid_argument("labels must be 0 or 1");
    (l ? pos : neg)++;
  }
  if (pos == 0 || neg == 0) throw std::invalid_argument("ROC needs both classes present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<RocPoint> curve;
  curve.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0});
  long long tp = 0;
  long long fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] ? tp : fp)++;
      ++i;
    }
    curve.push_back({s, static_cast<double>(tp) / pos, 1.0 - static_cast<double>(fp) / neg});
  }
  return curve;
}

double Auc(std::span<const RocPoint> curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double x0 = 1.0 - curve[i - 1].specificity;
    const double x1 = 1.0 - curve[i].specificity;
    area += (x1 - x0) * 0.5 * (curve[i - 1].sensitivity + curve[i].sensitivity);
  }
  return std::abs(area);
}

RocPoint OptimalOperatingPoint(std::span<const RocPoint> curve) {
  if (curve.empty()) throw std::invalid_argument("empty ROC curve");
  const auto dist2 = [](const RocPoint& p) {
    return (1.0 - p.sensitivity) * (1.0 - p.sensitivity) +
           (1.0 - p.specificity) * (1.0 - p.specificity);
  };
  RocPoint best = curve.front();
  for (const auto& p : curve.subspan(1)) {
    const double d = dist2(p);
    const double db = dist2(best);
    if (d < db || (d == db && p.threshold < best.threshold)) best = p;
  }
  return best;
}

ConfusionStats ComputeConfusion(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument("predictions and labels differ in length");
  }
  if (predictions.empty()) throw std::invalid_argument("confusion statistics need samples");
  ConfusionStats s;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool p = predictions[i] != 0;
    const bool l = labels[i] != 0;
    if (p && l) ++s.tp;
    if (p && !l) ++s.fp;
    if (!p && !l) ++s.tn;
    if (!p && l) ++s.fn;
  }
  const auto ratio = [](int num, int den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / den;
  };
  s.accuracy = ratio(s.tp + s.tn, static_cast<int>(labels.size()));
  s.ppv = ratio(s.tp, s.tp + s.fp);
  s.sensitivity = ratio(s.tp, s.tp + s.fn);
  s.specificity = ratio(s.tn, s.tn + s.fp);
  return s;
}

namespace {

std::tuple<std::size_t, std::size_t, std::size_t> OverlapCounts(const BinaryMask2D& a,
                                                                const BinaryMask2D& b) {
  if (!a.SameShape(b)) throw std::invalid_argument("mask dimensions differ");
  std::size_t inter = 0;
  for (std::size_t i = 0; i < a.size(); ++i) inter += (a[i] && b[i]) ? 1 : 0;
  return {a.count(), b.count(), inter};
}

void CheckSeries(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("series lengths differ");
  if (x.size() < 2) throw std::invalid_argument("series need at least two points");
}

struct Moments {
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  double mx = 0.0;
  double my = 0.0;
};

Moments CentredMoments(std::span<const double> x, std::span<const double> y) {
  Moments m;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    m.mx += x[i];
    m.my += y[i];
  }
  m.mx /= n;
  m.my /= n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - m.mx;
    const double dy = y[i] - m.my;
    m.sxx += dx * dx;
    m.syy += dy * dy;
    m.sxy += dx * dy;
  }
  return m;
}

}  // namespace

double Dice(const BinaryMask2D& a, const BinaryMask2D& b) {
  const auto [na, nb, inter] = OverlapCounts(a, b);
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

double Jaccard(const BinaryMask2D& a, const BinaryMask2D& b) {
  const auto [na, nb, inter] = OverlapCounts(a, b);
  const std::size_t uni = na + nb - inter;
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double PearsonR(std::span<const double> x, std::span<const double> y) {
  CheckSeries(x, y);
  const Moments m = CentredMoments(x, y);
  if (!(m.sxx > 0.0) || !(m.syy > 0.0)) {
    throw std::invalid_argument("correlation is undefined for a constant series");
  }
  return m.sxy / std::sqrt(m.sxx * m.syy);
}

double RSquared(std::span<const double> x, std::span<const double> y) {
  const double r = PearsonR(x, y);
  return r * r;
}

LinearFit LinFit(std::span<const double> x, std::span<const double> y) {
  CheckSeries(x, y);
  const Moments m = CentredMoments(x, y);
  if (!(m.sxx > 0.0)) throw std::invalid_argument("linear fit needs non-constant x");
  const double slope = m.sxy / m.sxx;
  return {slope, m.my - slope * m.mx};
}

double CombinedLoss(double p, double label, const HeatMap& pred_map, const HeatMap& gt_map,
                    double lambda) {
  if (!pred_map.SameShape(gt_map)) throw std::invalid_argument("loss maps differ in size");
  const double q = std::clamp(p, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
  const double bce = -(label * std::log(q) + (1.0 - label) * std::log(1.0 - q));
  double se = 0.0;
  for (std::size_t i = 0; i < pred_map.size(); ++i) {
    const double d = pred_map[i] - gt_map[i];
    se += d * d;
  }
  return bce + lambda * se / static_cast<double>(pred_map.size());
}

}  // namespace drrscore::metrics
