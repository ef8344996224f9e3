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

// Command-line front end. Every command reads files, writes only inside the
// output directory, and is deterministic given its options and seed.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "drrscore/mapalgebra.hpp"
#include "drrscore/materials.hpp"
#include "drrscore/projector.hpp"

namespace drrscore::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitInternal = 3 };

inline constexpr double kDetectionThreshold = 0.62;

struct GlobalOptions {
  std::uint64_t seed = 0;
  int threads = 1;  // 0: one per hardware thread
  fs::path out;
};

struct PhantomOptions {
  fs::path spec;
  int t_start = 0;
  std::optional<int> t_count;  // default: the remaining time points
};

// phantom_t<t>.{raw,meta}, phantom_t<t>_lungs.mask.*, phantom_t<t>_lesion.mask.*
// and phantom_spec.txt. Files are staged and moved into place only after every
// time point has been generated.
void CmdPhantom(const GlobalOptions& g, const PhantomOptions& o, std::ostream& log);

enum class ViewSelection { kPA, kAP, kBoth };

struct DrrOptions {
  fs::path volume;  // base path of <base>.raw / <base>.meta
  fs::path spectrum;
  fs::path attenuation;
  projector::DetectorGeometry geometry;
  ViewSelection views = ViewSelection::kPA;
  int air_max_hu = materials::kDefaultAirMaxHu;
  int bone_min_hu = materials::kDefaultBoneMinHu;
  bool scatter = false;
  double scatter_fraction = projector::kDefaultScatterFraction;
  double scatter_sigma_px = projector::kDefaultScatterSigmaPx;
  bool noise = false;
  std::optional<double> photons;  // rescales the spectrum total per pixel
};

fs::path DefaultSpectrumPath();
fs::path DefaultAttenuationPath();

// drr_<VIEW>.pgm (post-processed) and drr_<VIEW>.f32.raw/.meta (detector
// signal after scatter and noise).
void CmdDrr(const GlobalOptions& g, const DrrOptions& o, std::ostream& log);

struct ScoreOptions {
  std::optional<fs::path> heatmaps;  // heat-map stack base
  std::optional<fs::path> lesion;    // lesion mask PGM
  fs::path lungs;                    // lung mask PGM
  std::optional<fs::path> image;     // overlay background
  double localization_threshold = mapalgebra::kLocalizationThreshold;
  std::optional<double> detection_score;
  double detection_threshold = kDetectionThreshold;
  std::string patient_id = "P0";
  int time = 0;
  std::optional<fs::path> ct_lesion;  // voxel mask bases for ratio_3d
  std::optional<fs::path> ct_lungs;
};

// score.csv and overlay.pgm.
void CmdScore(const GlobalOptions& g, const ScoreOptions& o, std::ostream& log);

struct MonitorOptions {
  std::vector<fs::path> scores;
  std::optional<double> ct_floor;
};

// profiles.csv and summary.csv.
void CmdMonitor(const GlobalOptions& g, const MonitorOptions& o, std::ostream& log);

struct EvalOptions {
  std::optional<fs::path> boxes;  // image_id,pred_boxes,gt_boxes[,score,label]
  std::optional<fs::path> sweep;  // image_id,heatmaps,gt_boxes
  std::optional<fs::path> pred_mask;
  std::optional<fs::path> gt_mask;
  double detection_threshold = kDetectionThreshold;
};

// metrics.csv (metric,value) and, with a sweep manifest, sweep.csv.
void CmdEval(const GlobalOptions& g, const EvalOptions& o, std::ostream& log);

// "x y w h;x y w h"; empty text gives no boxes.
std::vector<image::BBox> ParseBoxList(const std::string& text);

// Parses `args` (without the program name), runs the selected command and
// returns its exit code. A --config file holds `option = value` lines; an
// option given on the command line overrides the same key in the file.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace drrscore::cli
