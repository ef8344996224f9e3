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

#include "drrscore/monitor.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <stdexcept>

#include "drrscore/error.hpp"
#include "drrscore/metrics.hpp"

namespace drrscore::monitor {

std::vector<int> TrendLabels(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("trend labels need at least two values");
  for (double v : values) {
    if (!(v >= 0.0)) throw std::invalid_argument("trend values must be >= 0");
  }
  std::vector<int> labels;
  labels.reserve(values.size() - 1);
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const double prev = values[i];
    const double next = values[i + 1];
    labels.push_back(prev == 0.0 ? (next > 0.0 ? 1 : 0) : (next / prev > 1.0 ? 1 : 0));
  }
  return labels;
}

double AgreementAccuracy(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw std::invalid_argument("label lists differ in length");
  if (a.empty()) throw std::invalid_argument("label lists are empty");
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i] ? 1 : 0;
  return static_cast<double>(same) / static_cast<double>(a.size());
}

std::vector<PatientSeries> BuildProfiles(std::span<const severity::ScoreRow> rows) {
  std::map<std::string, std::map<int, SeriesPoint>> grouped;
  for (const auto& row : rows) {
    auto& points = grouped[row.patient_id];
    SeriesPoint p{row.time, std::nullopt, row.ratio_3d};
    if (row.has_2d) p.ratio_2d = row.record.ratio_total;
    if (!points.emplace(row.time, p).second) {
      throw DataError(fmt::format("duplicate time point {} for patient '{}'", row.time,
                                  row.patient_id));
    }
  }
  std::vector<PatientSeries> out;
  out.reserve(grouped.size());
  for (auto& [id, points] : grouped) {
    PatientSeries s{id, {}};
    for (auto& [t, p] : points) s.points.push_back(p);
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

struct Pairs {
  std::vector<double> x;
  std::vector<double> y;
};

std::optional<double> SafePearson(const Pairs& p) {
  try {
    return metrics::PearsonR(p.x, p.y);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

}  // namespace

MonitorSummary Summarize(std::span<const PatientSeries> series, const MonitorOptions& options) {
  MonitorSummary summary;
  summary.pooled.patient_id = "pooled";
  Pairs pooled_pairs;
  for (const auto& s : series) {
    SeriesSummary ps;
    ps.patient_id = s.patient_id;
    ps.n_points = static_cast<int>(s.points.size());
    Pairs pairs;
    for (const auto& p : s.points) {
      if (!p.ratio_2d || !p.ratio_3d) continue;
      if (options.ct_floor && *p.ratio_3d < *options.ct_floor) continue;
      pairs.x.push_back(*p.ratio_2d);
      pairs.y.push_back(*p.ratio_3d);
    }
    if (pairs.x.size() >= 2) {
      const auto a = TrendLabels(pairs.x);
      const auto b = TrendLabels(pairs.y);
      ps.compared = static_cast<int>(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) ps.agreed += a[i] == b[i] ? 1 : 0;
      ps.agreement = AgreementAccuracy(a, b);
      ps.pearson_r = SafePearson(pairs);
    }
    summary.pooled.n_points += ps.n_points;
    summary.pooled.compared += ps.compared;
    summary.pooled.agreed += ps.agreed;
    pooled_pairs.x.insert(pooled_pairs.x.end(), pairs.x.begin(), pairs.x.end());
    pooled_pairs.y.insert(pooled_pairs.y.end(), pairs.y.begin(), pairs.y.end());
    summary.patients.push_back(std::move(ps));
  }
  if (summary.pooled.compared > 0) {
    summary.pooled.agreement =
        static_cast<double>(summary.pooled.agreed) / summary.pooled.compared;
  }
  summary.pooled.pearson_r = SafePearson(pooled_pairs);
  return summary;
}

namespace {

std::string Cell(const std::optional<double>& v) {
  return v ? fmt::format("{:.6f}", *v) : std::string();
}

}  // namespace

std::string FormatProfilesCsv(std::span<const PatientSeries> series) {
  std::string out = "patient_id,time,ratio_2d,ratio_3d\n";
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      out += fmt::format("{},{},{},{}\n", s.patient_id, p.time, Cell(p.ratio_2d), Cell(p.ratio_3d));
    }
  }
  return out;
}

std::string FormatSummaryCsv(const MonitorSummary& summary) {
  std::string out = "patient_id,n_points,agreement,pearson_r\n";
  const auto row = [&](const SeriesSummary& s) {
    out += fmt::format("{},{},{},{}\n", s.patient_id, s.n_points, Cell(s.agreement),
                       Cell(s.pearson_r));
  };
  for (const auto& s : summary.patients) row(s);
  row(summary.pooled);
  return out;
}

}  // namespace drrscore::monitor
