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

// Pneumonia ratio, per-lung involvement levels and the 0-8 extent score.

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "drrscore/image.hpp"
#include "drrscore/volume.hpp"

namespace drrscore::severity {

using image::BinaryMask2D;

struct SeverityRecord {
  double ratio_total = 0.0;  // percent
  double ratio_left = 0.0;
  double ratio_right = 0.0;
  int level_left = 0;  // 0..4
  int level_right = 0;
  int total_score = 0;  // level_left + level_right

  friend bool operator==(const SeverityRecord&, const SeverityRecord&) = default;
};

// 100 * |lesion AND lungs| / |lungs|. Throws on an empty lung mask.
double PneumoniaRatio(const BinaryMask2D& lesion, const BinaryMask2D& lungs);

struct LungSplit {
  BinaryMask2D left;   // smaller image x
  BinaryMask2D right;  // larger image x
};

// The two largest 8-connected components, ordered by centroid column. Other
// components join the side whose centroid column is nearer. A single
// component is cut at its centroid column. The halves partition the input.
LungSplit SplitLungs(const BinaryMask2D& lungs);

// 0 for exactly 0 %, then [0,25) -> 1, [25,50) -> 2, [50,75) -> 3,
// [75,100] -> 4.
int BinExtent(double ratio);

SeverityRecord ScoreImage(const BinaryMask2D& lesion, const BinaryMask2D& lungs);

// Voxel-count analogue of PneumoniaRatio.
double VolumeRatio(const volume::VoxelMask& lesion, const volume::VoxelMask& lungs);

// One CSV row per scored image. `ratio_3d` is optional; `status` is
// "positive" or "negative" (negative when the detection gate rejected the
// image).
struct ScoreRow {
  std::string patient_id;
  int time = 0;
  SeverityRecord record;
  // False when the row carries no 2-D measurement (empty ratio_total cell).
  bool has_2d = true;
  std::optional<double> ratio_3d;
  std::string status = "positive";
};

std::string ScoreCsvHeader();
std::string FormatScoreRow(const ScoreRow& row);
// Header-driven: columns may come in any order, unknown columns are
// ignored, empty ratio cells read as absent.
std::vector<ScoreRow> ParseScoreCsv(const std::string& text, const std::string& origin);

}  // namespace drrscore::severity
