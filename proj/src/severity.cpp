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

#include "drrscore/severity.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "drrscore/error.hpp"
#include "drrscore/mapalgebra.hpp"
#include "drrscore/textio.hpp"

namespace drrscore::severity {

double PneumoniaRatio(const BinaryMask2D& lesion, const BinaryMask2D& lungs) {
  if (!lesion.SameShape(lungs)) throw std::invalid_argument("lesion and lung masks differ in size");
  const std::size_t area = lungs.count();
  if (area == 0) throw std::invalid_argument("lung mask is empty");
  const std::size_t inside = mapalgebra::MaskIntersect(lesion, lungs).count();
  return 100.0 * static_cast<double>(inside) / static_cast<double>(area);
}

LungSplit SplitLungs(const BinaryMask2D& lungs) {
  const int w = lungs.width();
  const auto comps = mapalgebra::LabelComponents(lungs);
  if (comps.count == 0) throw std::invalid_argument("lung mask is empty");

  std::vector<std::size_t> size(comps.count, 0);
  std::vector<double> sum_x(comps.count, 0.0);
  for (std::size_t i = 0; i < comps.label.size(); ++i) {
    const int id = comps.label[i];
    if (id < 0) continue;
    ++size[id];
    sum_x[id] += static_cast<double>(i % w);
  }
  std::vector<double> centroid(comps.count);
  for (int c = 0; c < comps.count; ++c) centroid[c] = sum_x[c] / static_cast<double>(size[c]);

  LungSplit out{BinaryMask2D(w, lungs.height()), BinaryMask2D(w, lungs.height())};
  if (comps.count == 1) {
    for (std::size_t i = 0; i < comps.label.size(); ++i) {
      if (comps.label[i] < 0) continue;
      (static_cast<double>(i % w) < centroid[0] ? out.left : out.right)[i] = 1;
    }
    return out;
  }

  std::vector<int> order(comps.count);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return size[a] > size[b]; });
  int left = order[0];
  int right = order[1];
  if (centroid[right] < centroid[left]) std::swap(left, right);

  std::vector<bool> to_left(comps.count, false);
  for (int c = 0; c < comps.count; ++c) {
    if (c == left) {
      to_left[c] = true;
    } else if (c != right) {
      to_left[c] = std::abs(centroid[c] - centroid[left]) <= std::abs(centroid[c] - centroid[right]);
    }
  }
  for (std::size_t i = 0; i < comps.label.size(); ++i) {
    const int id = comps.label[i];
    if (id < 0) continue;
    (to_left[id] ? out.left : out.right)[i] = 1;
  }
  return out;
}

int BinExtent(double ratio) {
  if (!(ratio >= 0.0 && ratio <= 100.0)) {
    throw std::invalid_argument(fmt::format("ratio {} outside [0,100]", ratio));
  }
  if (ratio == 0.0) return 0;
  if (ratio < 25.0) return 1;
  if (ratio < 50.0) return 2;
  if (ratio < 75.0) return 3;
  return 4;
}

SeverityRecord ScoreImage(const BinaryMask2D& lesion, const BinaryMask2D& lungs) {
  SeverityRecord r;
  r.ratio_total = PneumoniaRatio(lesion, lungs);
  const LungSplit split = SplitLungs(lungs);
  const auto side = [&](const BinaryMask2D& half) {
    return half.count() == 0 ? 0.0 : PneumoniaRatio(lesion, half);
  };
  r.ratio_left = side(split.left);
  r.ratio_right = side(split.right);
  r.level_left = BinExtent(r.ratio_left);
  r.level_right = BinExtent(r.ratio_right);
  r.total_score = r.level_left + r.level_right;
  return r;
}

double VolumeRatio(const volume::VoxelMask& lesion, const volume::VoxelMask& lungs) {
  if (lesion.dims() != lungs.dims()) throw std::invalid_argument("lesion and lung masks differ in size");
  const std::size_t total = lungs.count();
  if (total == 0) throw std::invalid_argument("lung mask is empty");
  std::size_t inside = 0;
  const auto a = lesion.bits();
  const auto b = lungs.bits();
  for (std::size_t i = 0; i < a.size(); ++i) inside += (a[i] && b[i]) ? 1 : 0;
  return 100.0 * static_cast<double>(inside) / static_cast<double>(total);
}

std::string ScoreCsvHeader() {
  return "patient_id,time,ratio_total,ratio_left,ratio_right,level_left,level_right,"
         "total_score,ratio_3d,status";
}

std::string FormatScoreRow(const ScoreRow& row) {
  if (row.patient_id.empty() || row.patient_id.find_first_of(",\n\r\"") != std::string::npos) {
    throw std::invalid_argument(fmt::format("patient id '{}' is empty or not CSV-safe", row.patient_id));
  }
  const auto& r = row.record;
  const std::string total = row.has_2d ? fmt::format("{:.6f}", r.ratio_total) : std::string();
  const std::string r3 = row.ratio_3d ? fmt::format("{:.6f}", *row.ratio_3d) : std::string();
  return fmt::format("{},{},{},{:.6f},{:.6f},{},{},{},{},{}", row.patient_id, row.time, total,
                     r.ratio_left, r.ratio_right, r.level_left, r.level_right, r.total_score, r3,
                     row.status);
}

std::vector<ScoreRow> ParseScoreCsv(const std::string& text, const std::string& origin) {
  std::vector<ScoreRow> rows;
  std::map<std::string, std::size_t> col;
  int line_no = 0;
  for (const auto& raw : textio::Split(text, '\n')) {
    ++line_no;
    const std::string line = textio::Trim(raw);
    if (line.empty()) continue;
    auto fields = textio::Split(line, ',');
    for (auto& f : fields) f = textio::Trim(f);
    if (col.empty()) {
      for (std::size_t i = 0; i < fields.size(); ++i) col[fields[i]] = i;
      for (const char* required : {"patient_id", "time"}) {
        if (!col.contains(required)) {
          throw DataError(fmt::format("{}: header lacks '{}' column", origin, required));
        }
      }
      continue;
    }
    if (fields.size() != col.size()) {
      throw DataError(fmt::format("{}:{}: expected {} fields, got {}", origin, line_no, col.size(),
                                  fields.size()));
    }
    const auto cell = [&](const char* name) -> const std::string* {
      const auto it = col.find(name);
      return it == col.end() ? nullptr : &fields[it->second];
    };
    const auto ratio = [&](const char* name) -> std::optional<double> {
      const std::string* c = cell(name);
      if (c == nullptr || c->empty()) return std::nullopt;
      const double v = textio::ParseDouble(*c, name);
      if (!(v >= 0.0 && v <= 100.0)) {
        throw DataError(fmt::format("{}:{}: {} {} outside [0,100]", origin, line_no, name, v));
      }
      return v;
    };
    const auto level = [&](const char* name) {
      const std::string* c = cell(name);
      return (c == nullptr || c->empty()) ? 0 : static_cast<int>(textio::ParseInt(*c, name));
    };

    ScoreRow row;
    row.patient_id = *cell("patient_id");
    if (row.patient_id.empty()) throw DataError(fmt::format("{}:{}: empty patient_id", origin, line_no));
    row.time = static_cast<int>(textio::ParseInt(*cell("time"), "time"));
    const auto total = ratio("ratio_total");
    row.has_2d = total.has_value();
    row.record.ratio_total = total.value_or(0.0);
    row.record.ratio_left = ratio("ratio_left").value_or(0.0);
    row.record.ratio_right = ratio("ratio_right").value_or(0.0);
    row.record.level_left = level("level_left");
    row.record.level_right = level("level_right");
    row.record.total_score = level("total_score");
    row.ratio_3d = ratio("ratio_3d");
    if (const std::string* s = cell("status"); s != nullptr && !s->empty()) row.status = *s;
    if (!row.has_2d && !row.ratio_3d) {
      throw DataError(fmt::format("{}:{}: row has neither a 2-D nor a 3-D ratio", origin, line_no));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace drrscore::severity
