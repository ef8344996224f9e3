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

#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <stdexcept>

#include "drrscore/cli.hpp"
#include "drrscore/error.hpp"
#include "drrscore/metrics.hpp"
#include "drrscore/monitor.hpp"
#include "drrscore/phantom.hpp"
#include "drrscore/severity.hpp"
#include "drrscore/textio.hpp"
#include "drrscore/volume.hpp"

#ifndef DRRSCORE_DATA_DIR
#define DRRSCORE_DATA_DIR "data"
#endif

namespace drrscore::cli {

namespace {

// Prefixes failures with the pipeline stage, keeping the error category.
template <typename F>
auto Stage(std::string_view name, F&& fn) {
  try {
    return fn();
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", name, e.what()));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(fmt::format("{}: {}", name, e.what()));
  } catch (const fs::filesystem_error& e) {
    throw DataError(fmt::format("{}: {}", name, e.what()));
  }
}

void PrepareOutDir(const fs::path& out) {
  if (out.empty()) throw std::invalid_argument("output directory is not set");
  fs::create_directories(out);
}

void RequireFile(const fs::path& p, std::string_view what) {
  if (!fs::is_regular_file(p)) throw DataError(fmt::format("{} '{}' not found", what, p.string()));
}

void CheckUnit(double v, std::string_view what) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(fmt::format("{} {} outside [0,1]", what, v));
}

std::string Cell(double v) { return textio::FormatExact(v); }

struct CsvTable {
  std::map<std::string, std::size_t> col;
  std::vector<std::vector<std::string>> rows;

  const std::string* Get(const std::vector<std::string>& row, const std::string& name) const {
    const auto it = col.find(name);
    return it == col.end() ? nullptr : &row[it->second];
  }
};

CsvTable ReadCsv(const fs::path& path, std::initializer_list<const char*> required) {
  CsvTable t;
  bool header = true;
  int line_no = 0;
  for (const auto& raw : textio::Split(textio::ReadTextFile(path), '\n')) {
    ++line_no;
    const std::string line = textio::Trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto fields = textio::Split(line, ',');
    for (auto& f : fields) f = textio::Trim(f);
    if (header) {
      for (std::size_t i = 0; i < fields.size(); ++i) t.col[fields[i]] = i;
      for (const char* r : required) {
        if (!t.col.contains(r)) {
          throw DataError(fmt::format("'{}': header lacks '{}' column", path.string(), r));
        }
      }
      header = false;
      continue;
    }
    if (fields.size() != t.col.size()) {
      throw DataError(fmt::format("'{}':{}: expected {} fields, got {}", path.string(), line_no,
                                  t.col.size(), fields.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  if (header) throw DataError(fmt::format("'{}': missing header row", path.string()));
  return t;
}

// Lung pixels next to a non-lesion pixel (4-neighbourhood, image border
// counts as outside).
image::Image8 DrawOverlay(image::Image8 base, const image::BinaryMask2D& lesion) {
  const int w = lesion.width();
  const int h = lesion.height();
  const auto set = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < w && y < h && lesion.at(x, y) != 0;
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!set(x, y)) continue;
      if (!set(x - 1, y) || !set(x + 1, y) || !set(x, y - 1) || !set(x, y + 1)) base.at(x, y) = 255;
    }
  }
  return base;
}

}  // namespace

fs::path DefaultSpectrumPath() { return fs::path(DRRSCORE_DATA_DIR) / "spectrum_120kV_4.3mmAl.tsv"; }
fs::path DefaultAttenuationPath() { return fs::path(DRRSCORE_DATA_DIR) / "attenuation_nist.tsv"; }

void CmdPhantom(const GlobalOptions& g, const PhantomOptions& o, std::ostream& log) {
  const volume::PhantomSpec spec = Stage("phantom spec", [&] {
    auto s = volume::ReadPhantomSpec(o.spec);
    s.Validate();
    return s;
  });
  const int count = o.t_count.value_or(spec.time_points - o.t_start);
  if (o.t_start < 0 || count < 1 || o.t_start + count > spec.time_points) {
    throw std::invalid_argument(fmt::format("time range [{}, {}) outside the {} spec time points",
                                            o.t_start, o.t_start + count, spec.time_points));
  }
  PrepareOutDir(g.out);
  const fs::path staging = g.out / ".phantom.partial";
  fs::remove_all(staging);
  fs::create_directories(staging);
  try {
    for (int t = o.t_start; t < o.t_start + count; ++t) {
      const auto frame = Stage(fmt::format("generate t={}", t), [&] {
        return volume::GeneratePhantom(spec, t);
      });
      const std::string stem = fmt::format("phantom_t{}", t);
      volume::SaveVolume(frame.volume, staging / stem);
      volume::SaveMask(frame.lungs, staging / (stem + "_lungs"));
      volume::SaveMask(frame.lesion, staging / (stem + "_lesion"));
    }
    textio::WriteTextFile(staging / "phantom_spec.txt", volume::FormatPhantomSpec(spec));
  } catch (...) {
    fs::remove_all(staging);
    throw;
  }
  std::vector<fs::path> staged;
  for (const auto& entry : fs::directory_iterator(staging)) staged.push_back(entry.path());
  std::sort(staged.begin(), staged.end());
  for (const auto& p : staged) fs::rename(p, g.out / p.filename());
  fs::remove_all(staging);
  log << fmt::format("phantom: wrote {} time point(s) to {}\n", count, g.out.string());
}

void CmdDrr(const GlobalOptions& g, const DrrOptions& o, std::ostream& log) {
  Stage("geometry", [&] { o.geometry.Validate(); });
  const auto spectrum = Stage("spectrum", [&] {
    auto s = projector::ReadSpectrum(o.spectrum);
    return o.photons ? s.ScaledTo(*o.photons) : s;
  });
  const auto table = Stage("attenuation table", [&] { return projector::ReadAttenuationTable(o.attenuation); });
  for (const auto& bin : spectrum.bins()) {
    if (!table.Covers(bin.energy_kev)) {
      throw DataError(fmt::format("attenuation table: {} keV outside the table's energy range",
                                  bin.energy_kev));
    }
  }
  const auto ct = Stage("load volume", [&] { return volume::LoadVolume(o.volume); });
  const auto masks = Stage("decompose", [&] {
    return materials::Decompose(ct, o.air_max_hu, o.bone_min_hu);
  });
  const auto chest = Stage("chest mask", [&] { return materials::ChestMask(masks); });
  const auto masked = Stage("apply chest mask", [&] {
    return materials::Decompose(materials::ApplyChestMask(ct, chest), o.air_max_hu, o.bone_min_hu);
  });

  std::vector<projector::View> views;
  if (o.views != ViewSelection::kAP) views.push_back(projector::View::kPA);
  if (o.views != ViewSelection::kPA) views.push_back(projector::View::kAP);
  PrepareOutDir(g.out);
  for (const auto view : views) {
    projector::DetectorGeometry det = o.geometry;
    det.view = view;
    const std::string name = projector::ToString(view);
    auto img = Stage("project " + name, [&] {
      return projector::Project(masked, det, spectrum, table, g.threads);
    });
    if (o.scatter) {
      img = Stage("scatter " + name, [&] {
        return projector::AddImages(img, projector::EstimateScatter(img, o.scatter_fraction,
                                                                    o.scatter_sigma_px));
      });
    }
    if (o.noise) {
      img = Stage("noise " + name, [&] { return projector::AddNoise(img, spectrum, g.seed, g.threads); });
    }
    const auto display = Stage("postprocess " + name, [&] { return projector::Postprocess(img); });
    Stage("write " + name, [&] {
      projector::WriteRadiograph(img, g.out / ("drr_" + name));
      image::WritePgm(display, g.out / ("drr_" + name + ".pgm"));
    });
    log << fmt::format("drr: wrote {}x{} {} view\n", det.width, det.height, name);
  }
}

void CmdScore(const GlobalOptions& g, const ScoreOptions& o, std::ostream& log) {
  if (o.heatmaps.has_value() == o.lesion.has_value()) {
    throw std::invalid_argument("exactly one of --heatmaps and --lesion is required");
  }
  if (o.ct_lesion.has_value() != o.ct_lungs.has_value()) {
    throw std::invalid_argument("--ct-lesion and --ct-lungs go together");
  }
  CheckUnit(o.localization_threshold, "localization threshold");
  CheckUnit(o.detection_threshold, "detection threshold");
  if (o.detection_score) CheckUnit(*o.detection_score, "detection score");

  const auto lungs = Stage("lung mask", [&] {
    RequireFile(o.lungs, "lung mask");
    return image::ReadMaskPgm(o.lungs);
  });
  const auto lesion = Stage("lesion map", [&] {
    if (o.lesion) return image::ReadMaskPgm(*o.lesion);
    auto maps = image::ReadHeatMapStack(*o.heatmaps);
    for (auto& m : maps) {
      if (m.width() != lungs.width() || m.height() != lungs.height()) {
        m = mapalgebra::ResizeMap(m, lungs.width(), lungs.height());
      }
    }
    return mapalgebra::ThresholdMask(mapalgebra::StackMax(maps), o.localization_threshold);
  });
  if (!lesion.SameShape(lungs)) throw DataError("lesion mask and lung mask differ in size");

  severity::ScoreRow row;
  row.patient_id = o.patient_id;
  row.time = o.time;
  const bool negative = o.detection_score && *o.detection_score < o.detection_threshold;
  const auto inside = mapalgebra::MaskIntersect(lesion, lungs);
  if (negative) {
    row.status = "negative";
  } else {
    row.record = Stage("severity", [&] { return severity::ScoreImage(inside, lungs); });
  }
  if (o.ct_lesion) {
    row.ratio_3d = Stage("ct ratio", [&] {
      return severity::VolumeRatio(volume::LoadMask(*o.ct_lesion), volume::LoadMask(*o.ct_lungs));
    });
  }

  image::Image8 base(lungs.width(), lungs.height());
  if (o.image) {
    base = Stage("overlay image", [&] { return image::ReadPgm(*o.image); });
    if (base.width() != lungs.width() || base.height() != lungs.height()) {
      throw DataError("overlay image and lung mask differ in size");
    }
  } else {
    for (std::size_t i = 0; i < base.size(); ++i) base[i] = lungs[i] ? 96 : 0;
  }
  const image::BinaryMask2D contour_src =
      negative ? image::BinaryMask2D(lungs.width(), lungs.height()) : inside;

  PrepareOutDir(g.out);
  const std::string csv = severity::ScoreCsvHeader() + "\n" + severity::FormatScoreRow(row) + "\n";
  textio::WriteTextFile(g.out / "score.csv", csv);
  image::WritePgm(DrawOverlay(base, contour_src), g.out / "overlay.pgm");
  log << fmt::format("score: {} t={} ratio_total={:.6f} status={}\n", row.patient_id, row.time,
                     row.record.ratio_total, row.status);
}

void CmdMonitor(const GlobalOptions& g, const MonitorOptions& o, std::ostream& log) {
  std::vector<severity::ScoreRow> rows;
  for (const auto& p : o.scores) {
    RequireFile(p, "score file");
    auto part = severity::ParseScoreCsv(textio::ReadTextFile(p), p.string());
    rows.insert(rows.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  if (rows.empty()) throw DataError("no score rows to monitor");
  const auto profiles = monitor::BuildProfiles(rows);
  monitor::MonitorOptions mo;
  mo.ct_floor = o.ct_floor;
  const auto summary = monitor::Summarize(profiles, mo);
  PrepareOutDir(g.out);
  textio::WriteTextFile(g.out / "profiles.csv", monitor::FormatProfilesCsv(profiles));
  textio::WriteTextFile(g.out / "summary.csv", monitor::FormatSummaryCsv(summary));
  log << fmt::format("monitor: {} patient(s), {} row(s)\n", profiles.size(), rows.size());
}

std::vector<image::BBox> ParseBoxList(const std::string& text) {
  std::vector<image::BBox> boxes;
  for (const auto& part : textio::Split(text, ';')) {
    const auto tok = textio::SplitWhitespace(part);
    if (tok.empty()) continue;
    if (tok.size() != 4) throw DataError(fmt::format("box '{}' needs 4 integers", textio::Trim(part)));
    image::BBox b{static_cast<int>(textio::ParseInt(tok[0], "box x")),
                  static_cast<int>(textio::ParseInt(tok[1], "box y")),
                  static_cast<int>(textio::ParseInt(tok[2], "box w")),
                  static_cast<int>(textio::ParseInt(tok[3], "box h"))};
    if (!b.Valid()) throw DataError(fmt::format("box '{}' has no area", textio::Trim(part)));
    boxes.push_back(b);
  }
  return boxes;
}

void CmdEval(const GlobalOptions& g, const EvalOptions& o, std::ostream& log) {
  if (!o.boxes && !o.sweep && !o.pred_mask && !o.gt_mask) {
    throw std::invalid_argument("nothing to evaluate: give --boxes, --sweep or --pred-mask/--gt-mask");
  }
  if (o.pred_mask.has_value() != o.gt_mask.has_value()) {
    throw std::invalid_argument("--pred-mask and --gt-mask go together");
  }
  CheckUnit(o.detection_threshold, "detection threshold");

  std::vector<std::pair<std::string, double>> metrics_out;
  std::string sweep_csv;

  if (o.boxes) {
    RequireFile(*o.boxes, "box file");
    const auto t = ReadCsv(*o.boxes, {"image_id", "pred_boxes", "gt_boxes"});
    if (t.rows.empty()) throw DataError(fmt::format("'{}': no images", o.boxes->string()));
    std::vector<metrics::ImageBoxes> dataset;
    std::vector<double> scores;
    std::vector<int> labels;
    const bool classify = t.col.contains("score") && t.col.contains("label");
    for (const auto& r : t.rows) {
      dataset.push_back({ParseBoxList(*t.Get(r, "pred_boxes")), ParseBoxList(*t.Get(r, "gt_boxes"))});
      if (classify) {
        scores.push_back(textio::ParseDouble(*t.Get(r, "score"), "score"));
        const auto label = textio::ParseInt(*t.Get(r, "label"), "label");
        if (label != 0 && label != 1) throw DataError("labels must be 0 or 1");
        labels.push_back(static_cast<int>(label));
      }
    }
    metrics_out.emplace_back("n_images", static_cast<double>(dataset.size()));
    metrics_out.emplace_back("map", metrics::MapScore(dataset));
    if (classify) {
      const auto curve = Stage("roc", [&] { return metrics::RocCurve(scores, labels); });
      const auto best = metrics::OptimalOperatingPoint(curve);
      metrics_out.emplace_back("auc", metrics::Auc(curve));
      metrics_out.emplace_back("optimal_threshold", best.threshold);
      metrics_out.emplace_back("optimal_sensitivity", best.sensitivity);
      metrics_out.emplace_back("optimal_specificity", best.specificity);
      std::vector<int> pred;
      for (double s : scores) pred.push_back(s >= o.detection_threshold ? 1 : 0);
      const auto cs = metrics::ComputeConfusion(pred, labels);
      metrics_out.emplace_back("tp", cs.tp);
      metrics_out.emplace_back("fp", cs.fp);
      metrics_out.emplace_back("tn", cs.tn);
      metrics_out.emplace_back("fn", cs.fn);
      const auto opt = [&](const char* name, const std::optional<double>& v) {
        if (v) metrics_out.emplace_back(name, *v);
      };
      opt("accuracy", cs.accuracy);
      opt("ppv", cs.ppv);
      opt("sensitivity", cs.sensitivity);
      opt("specificity", cs.specificity);
    }
  }

  if (o.pred_mask) {
    const auto pred = Stage("prediction mask", [&] { return image::ReadMaskPgm(*o.pred_mask); });
    const auto gt = Stage("ground-truth mask", [&] { return image::ReadMaskPgm(*o.gt_mask); });
    metrics_out.emplace_back("dice", metrics::Dice(pred, gt));
    metrics_out.emplace_back("jaccard", metrics::Jaccard(pred, gt));
  }

  if (o.sweep) {
    RequireFile(*o.sweep, "sweep manifest");
    const auto t = ReadCsv(*o.sweep, {"image_id", "heatmaps", "gt_boxes"});
    if (t.rows.empty()) throw DataError(fmt::format("'{}': no images", o.sweep->string()));
    const fs::path dir = o.sweep->parent_path();
    std::vector<image::HeatMap> maps;
    std::vector<std::vector<image::BBox>> gts;
    for (const auto& r : t.rows) {
      const fs::path base = dir / *t.Get(r, "heatmaps");
      maps.push_back(Stage("sweep maps", [&] {
        return mapalgebra::StackMax(image::ReadHeatMapStack(base));
      }));
      gts.push_back(ParseBoxList(*t.Get(r, "gt_boxes")));
      for (const auto& b : gts.back()) {
        if (!b.Within(maps.back().width(), maps.back().height())) {
          throw DataError(fmt::format("image '{}': ground-truth box outside the map", *t.Get(r, "image_id")));
        }
      }
    }
    const auto thresholds = metrics::DefaultLocalizationThresholds();
    sweep_csv = "threshold,map\n";
    for (const auto& p : metrics::LocalizationSweep(maps, gts, thresholds)) {
      sweep_csv += fmt::format("{:.2f},{}\n", p.threshold, Cell(p.map));
    }
  }

  PrepareOutDir(g.out);
  std::string csv = "metric,value\n";
  for (const auto& [k, v] : metrics_out) csv += fmt::format("{},{}\n", k, Cell(v));
  textio::WriteTextFile(g.out / "metrics.csv", csv);
  if (!sweep_csv.empty()) textio::WriteTextFile(g.out / "sweep.csv", sweep_csv);
  log << fmt::format("eval: {} metric(s){}\n", metrics_out.size(), sweep_csv.empty() ? "" : " + sweep");
}

}  // namespace drrscore::cli
