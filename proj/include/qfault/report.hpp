// Copyright 2026 The qfault Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace qfault {

/// One line of an experiment report. Fields that do not apply to a row
/// (thresholds on a Monte Carlo row, MC statistics on an analytical row) are
/// left empty and serialize as an empty CSV cell or a JSON null.
struct ReportRow {
  std::string program;
  std::size_t n = 0;
  std::string engine;
  std::optional<double> event_threshold;
  std::optional<double> merge_threshold;
  std::optional<std::string> merge_mode;
  std::optional<double> survival;
  std::optional<double> crash;
  std::optional<double> discarded_mass;
  std::optional<std::uint64_t> peak_map_entries;
  std::optional<double> wall_time_ms;
  std::optional<std::uint64_t> mc_iterations;
  std::optional<double> mc_ci95;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> shards;
  double global_scale = 1.0;
  std::string program_hash;
  std::string params_hash;
  /// Sweep: |crash - baseline crash| / baseline crash. Compare: analytical
  /// crash against the Monte Carlo estimate.
  std::optional<double> inaccuracy;
  /// Sweep: true on the finest grid point that the inaccuracy refers to.
  std::optional<bool> baseline;
  /// Compare: MC wall time at the target accuracy over analytical wall time.
  std::optional<double> speedup;
  std::string error;
};

/// Report columns, in output order. The set is stable; new columns are only
/// ever appended.
inline constexpr std::array<std::string_view, 22> kReportColumns{
    "program",        "N",           "engine",        "event_threshold", "merge_threshold", "merge_mode",
    "survival",       "crash",       "discarded_mass", "peak_map_entries", "wall_time_ms",   "mc_iterations",
    "mc_ci95",        "seed",        "shards",        "global_scale",    "program_hash",    "params_hash",
    "inaccuracy",     "baseline",    "speedup",       "error"};

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// RFC 4180: quote fields holding a comma, quote or line break; double the
/// quotes inside.
inline std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/// Calls `fn(column, json_value)` for every column of `row`, in order.
template <typename Fn>
void for_each_field(const ReportRow& row, Fn&& fn) {
  using nlohmann::json;
  auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
  fn(kReportColumns[0], json(row.program));
  fn(kReportColumns[1], json(row.n));
  fn(kReportColumns[2], json(row.engine));
  fn(kReportColumns[3], opt(row.event_threshold));
  fn(kReportColumns[4], opt(row.merge_threshold));
  fn(kReportColumns[5], opt(row.merge_mode));
  fn(kReportColumns[6], opt(row.survival));
  fn(kReportColumns[7], opt(row.crash));
  fn(kReportColumns[8], opt(row.discarded_mass));
  fn(kReportColumns[9], opt(row.peak_map_entries));
  fn(kReportColumns[10], opt(row.wall_time_ms));
  fn(kReportColumns[11], opt(row.mc_iterations));
  fn(kReportColumns[12], opt(row.mc_ci95));
  fn(kReportColumns[13], opt(row.seed));
  fn(kReportColumns[14], opt(row.shards));
  fn(kReportColumns[15], json(row.global_scale));
  fn(kReportColumns[16], json(row.program_hash));
  fn(kReportColumns[17], json(row.params_hash));
  fn(kReportColumns[18], opt(row.inaccuracy));
  fn(kReportColumns[19], opt(row.baseline));
  fn(kReportColumns[20], opt(row.speedup));
  fn(kReportColumns[21], row.error.empty() ? json(nullptr) : json(row.error));
}

inline std::string csv_cell(const nlohmann::json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return csv_field(v.get<std::string>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) return format_double(v.get<double>());
  return v.dump();
}

}  // namespace detail

inline void write_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  for (std::size_t i = 0; i < kReportColumns.size(); ++i) out << (i ? "," : "") << kReportColumns[i];
  out << "\r\n";
  for (const auto& row : rows) {
    bool first = true;
    detail::for_each_field(row, [&](std::string_view, const nlohmann::json& v) {
      out << (first ? "" : ",") << detail::csv_cell(v);
      first = false;
    });
    out << "\r\n";
  }
}

inline nlohmann::json to_json(const ReportRow& row) {
  nlohmann::json obj = nlohmann::json::object();
  detail::for_each_field(row, [&](std::string_view key, const nlohmann::json& v) { obj[std::string(key)] = v; });
  return obj;
}

/// A JSON array with one object per row, keyed by the CSV column names.
inline void write_json(std::ostream& out, const std::vector<ReportRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& row : rows) arr.push_back(to_json(row));
  out << arr.dump(2) << "\n";
}

}  // namespace qfault
