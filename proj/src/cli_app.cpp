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

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <functional>
#include <set>

#include "drrscore/cli.hpp"
#include "drrscore/error.hpp"
#include "drrscore/textio.hpp"

namespace drrscore::cli {

namespace {

std::string OptionName(const std::string& arg) {
  if (arg.rfind("--", 0) != 0) return {};
  const auto eq = arg.find('=');
  return arg.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
}

const std::set<std::string>& ValuedGlobals() {
  static const std::set<std::string> names{"config", "seed", "threads", "out"};
  return names;
}

// Index of the subcommand token in `args`, or args.size().
std::size_t FindSubcommand(const std::vector<std::string>& args, const CLI::App& app) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("-", 0) == 0) {
      if (ValuedGlobals().contains(OptionName(a)) && a.find('=') == std::string::npos) ++i;
      continue;
    }
    for (const auto* sub : app.get_subcommands({})) {
      if (sub->get_name() == a) return i;
    }
    return args.size();
  }
  return args.size();
}

std::optional<std::string> ConfigPath(const std::vector<std::string>& args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  return path;
}

// Config entries become option tokens. Global keys go first, command keys
// right after the command name; keys also present on the command line are
// dropped so the command line wins. Whitespace-separated values of
// multi-valued options are split into separate tokens.
std::vector<std::string> InjectConfig(const std::vector<std::string>& args, const CLI::App& app) {
  const auto cfg = ConfigPath(args);
  if (!cfg) return args;
  const auto doc = textio::ReadKeyValueFile(*cfg);
  const std::size_t sub_at = FindSubcommand(args, app);
  if (sub_at == args.size()) return args;
  const CLI::App* sub = app.get_subcommand(args[sub_at]);

  std::set<std::string> given;
  for (const auto& a : args) {
    if (const auto n = OptionName(a); !n.empty()) given.insert(n);
  }
  std::vector<std::string> globals;
  std::vector<std::string> locals;
  for (const auto& [key, value] : doc.entries) {
    if (key == "config") throw DataError(fmt::format("'{}': config files cannot nest", *cfg));
    if (given.contains(key)) continue;
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    auto* dest = &locals;
    if (opt == nullptr) {
      opt = app.get_option_no_throw("--" + key);
      dest = &globals;
    }
    if (opt == nullptr) {
      throw DataError(fmt::format("'{}': unknown key '{}' for command '{}'", *cfg, key, sub->get_name()));
    }
    if (opt->get_items_expected_max() > 1) {
      dest->push_back("--" + key);
      for (const auto& v : textio::SplitWhitespace(value)) dest->push_back(v);
    } else {
      dest->push_back(fmt::format("--{}={}", key, value));
    }
  }
  std::vector<std::string> out = globals;
  out.insert(out.end(), args.begin(), args.begin() + static_cast<std::ptrdiff_t>(sub_at) + 1);
  out.insert(out.end(), locals.begin(), locals.end());
  out.insert(out.end(), args.begin() + static_cast<std::ptrdiff_t>(sub_at) + 1, args.end());
  return out;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthetic radiograph generation and pneumonia severity scoring", "drrscore"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  GlobalOptions g;
  std::string config_path;
  std::string out_dir;
  app.add_option("--config", config_path, "key = value file; command-line flags override it");
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--threads", g.threads, "Worker threads (0: hardware concurrency)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--out", out_dir, "Output directory")->required();

  std::function<void()> action;

  PhantomOptions ph;
  auto* cmd_phantom = app.add_subcommand("phantom", "Generate a longitudinal chest phantom series");
  cmd_phantom->add_option("--spec", ph.spec, "Phantom spec file")->required();
  cmd_phantom->add_option("--t-start", ph.t_start, "First time index");
  cmd_phantom->add_option("--t-count", ph.t_count, "Number of time points");
  cmd_phantom->callback([&] { action = [&] { CmdPhantom(g, ph, out); }; });

  DrrOptions drr;
  drr.spectrum = DefaultSpectrumPath();
  drr.attenuation = DefaultAttenuationPath();
  std::string mode = "cone";
  std::string views = "PA";
  auto* cmd_drr = app.add_subcommand("drr", "Render radiographs from a CT volume");
  cmd_drr->add_option("--volume", drr.volume, "Volume base path (<base>.raw, <base>.meta)")->required();
  cmd_drr->add_option("--spectrum", drr.spectrum, "Spectrum table")->capture_default_str();
  cmd_drr->add_option("--attenuation", drr.attenuation, "Attenuation table")->capture_default_str();
  cmd_drr->add_option("--width", drr.geometry.width, "Detector columns")->capture_default_str();
  cmd_drr->add_option("--height", drr.geometry.height, "Detector rows")->capture_default_str();
  cmd_drr->add_option("--pixel-mm", drr.geometry.pixel_mm, "Detector pixel pitch")->capture_default_str();
  cmd_drr->add_option("--mode", mode, "parallel | cone")->check(CLI::IsMember({"parallel", "cone"}));
  cmd_drr->add_option("--sdd-mm", drr.geometry.sdd_mm, "Source-detector distance")->capture_default_str();
  cmd_drr->add_option("--sad-mm", drr.geometry.sad_mm, "Source-isocentre distance")->capture_default_str();
  cmd_drr->add_option("--view", views, "PA | AP | both")->check(CLI::IsMember({"PA", "AP", "both"}));
  cmd_drr->add_option("--air-max-hu", drr.air_max_hu, "Upper HU bound of air")->capture_default_str();
  cmd_drr->add_option("--bone-min-hu", drr.bone_min_hu, "Lower HU bound of bone")->capture_default_str();
  cmd_drr->add_flag("--scatter", drr.scatter, "Add the kernel scatter estimate");
  cmd_drr->add_option("--scatter-fraction", drr.scatter_fraction, "Scatter-to-primary scale")
      ->capture_default_str();
  cmd_drr->add_option("--scatter-sigma", drr.scatter_sigma_px, "Scatter kernel width (pixels)")
      ->capture_default_str();
  cmd_drr->add_flag("--noise", drr.noise, "Add Poisson quantum noise (uses --seed)");
  cmd_drr->add_option("--photons", drr.photons, "Photons per pixel (rescales the spectrum)");
  cmd_drr->callback([&] {
    action = [&] {
      drr.geometry.mode = projector::ParseBeamMode(mode);
      drr.views = views == "both" ? ViewSelection::kBoth
                  : views == "AP" ? ViewSelection::kAP
                                  : ViewSelection::kPA;
      CmdDrr(g, drr, out);
    };
  });

  ScoreOptions sc;
  auto* cmd_score = app.add_subcommand("score", "Score pneumonia extent on a radiograph");
  cmd_score->add_option("--heatmaps", sc.heatmaps, "Heat-map stack base path");
  cmd_score->add_option("--lesion", sc.lesion, "Lesion mask PGM");
  cmd_score->add_option("--lungs", sc.lungs, "Lung mask PGM")->required();
  cmd_score->add_option("--image", sc.image, "Overlay background PGM");
  cmd_score->add_option("--localization-threshold", sc.localization_threshold, "Heat-map threshold")
      ->capture_default_str();
  cmd_score->add_option("--detection-score", sc.detection_score, "Image-level detection score");
  cmd_score->add_option("--detection-threshold", sc.detection_threshold, "Detection gate")
      ->capture_default_str();
  cmd_score->add_option("--patient-id", sc.patient_id, "Patient identifier")->capture_default_str();
  cmd_score->add_option("--time", sc.time, "Time index")->capture_default_str();
  cmd_score->add_option("--ct-lesion", sc.ct_lesion, "CT lesion mask base path");
  cmd_score->add_option("--ct-lungs", sc.ct_lungs, "CT lung mask base path");
  cmd_score->callback([&] { action = [&] { CmdScore(g, sc, out); }; });

  MonitorOptions mo;
  auto* cmd_monitor = app.add_subcommand("monitor", "Build disease profiles and trend agreement");
  cmd_monitor->add_option("--scores", mo.scores, "Score CSV files")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  cmd_monitor->add_option("--ct-floor", mo.ct_floor, "Ignore points with a lower CT ratio");
  cmd_monitor->callback([&] { action = [&] { CmdMonitor(g, mo, out); }; });

  EvalOptions ev;
  auto* cmd_eval = app.add_subcommand("eval", "Detection, localization and mask metrics");
  cmd_eval->add_option("--boxes", ev.boxes, "Box CSV");
  cmd_eval->add_option("--sweep", ev.sweep, "Localization sweep manifest");
  cmd_eval->add_option("--pred-mask", ev.pred_mask, "Predicted mask PGM");
  cmd_eval->add_option("--gt-mask", ev.gt_mask, "Ground-truth mask PGM");
  cmd_eval->add_option("--detection-threshold", ev.detection_threshold, "Detection threshold")
      ->capture_default_str();
  cmd_eval->callback([&] { action = [&] { CmdEval(g, ev, out); }; });

  try {
    std::vector<std::string> tokens = InjectConfig(args, app);
    std::reverse(tokens.begin(), tokens.end());
    app.parse(tokens);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }

  try {
    g.out = out_dir;
    action();
    return kExitOk;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace drrscore::cli
