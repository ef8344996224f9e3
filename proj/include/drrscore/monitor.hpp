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

// Longitudinal disease profiles and agreement between the trends measured
// on radiographs (2-D) and on CT volumes (3-D).

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drrscore/severity.hpp"

namespace drrscore::monitor {

// label[i] = 1 iff values[i+1] / values[i] > 1. A rise from 0 counts as 1,
// 0 -> 0 as 0. Needs at least two non-negative values.
std::vector<int> TrendLabels(std::span<const double> values);

// Fraction of positions where the two label lists agree.
double AgreementAccuracy(std::span<const int> a, std::span<const int> b);

struct SeriesPoint {
  int time = 0;
  std::optional<double> ratio_2d;
  std::optional<double> ratio_3d;
};

struct PatientSeries {
  std::string patient_id;
  std::vector<SeriesPoint> points;  // strictly increasing time
};

// Groups rows by patient (sorted by id) and orders each series by time.
// Throws DataError on a repeated (patient, time) pair.
std::vector<PatientSeries> BuildProfiles(std::span<const severity::ScoreRow> rows);

struct MonitorOptions {
  // When set, points whose CT ratio is below the floor are left out of the
  // agreement computation.
  std::optional<double> ct_floor;
};

struct SeriesSummary {
  std::string patient_id;
  int n_points = 0;
  int compared = 0;  // trend labels compared
  int agreed = 0;
  std::optional<double> agreement;
  std::optional<double> pearson_r;  // paired 2-D / 3-D ratios
};

struct MonitorSummary {
  std::vector<SeriesSummary> patients;
  SeriesSummary pooled;  // patient_id "pooled"
};

MonitorSummary Summarize(std::span<const PatientSeries> series, const MonitorOptions& options = {});

// patient_id,time,ratio_2d,ratio_3d
std::string FormatProfilesCsv(std::span<const PatientSeries> series);
// patient_id,n_points,agreement,pearson_r with the pooled row last.
std::string FormatSummaryCsv(const MonitorSummary& summary);

}  // namespace drrscore::monitor
