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

// Experiment drivers behind the command-line tool: build a benchmark program,
// run it through one or both engines and turn the results into report rows.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <new>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qfault/builders.hpp"
#include "qfault/elaborate.hpp"
#include "qfault/engine.hpp"
#include "qfault/montecarlo.hpp"
#include "qfault/noise.hpp"
#include "qfault/program.hpp"
#include "qfault/report.hpp"

namespace qfault {

enum class ProgramKind { Basic, Scaling };
enum class EngineMode { Analytical, MonteCarlo, Both };

inline ProgramKind parse_program_kind(std::string_view s) {
  if (s == "basic") return ProgramKind::Basic;
  if (s == "scaling") return ProgramKind::Scaling;
  throw std::invalid_argument("unknown program '" + std::string(s) + "' (expected basic or scaling)");
}

inline EngineMode parse_engine_mode(std::string_view s) {
  if (s == "analytical") return EngineMode::Analytical;
  if (s == "montecarlo") return EngineMode::MonteCarlo;
  if (s == "both") return EngineMode::Both;
  throw std::invalid_argument("unknown mode '" + std::string(s) + "' (expected analytical, montecarlo or both)");
}

struct ExperimentSpec {
  ProgramKind program = ProgramKind::Basic;
  /// Logical qubit count; only read for the scaling program.
  std::size_t n = 2;
  EngineMode mode = EngineMode::Analytical;
  Thresholds thresholds{1e-6, 1e-12, MergeMode::Preservation};
  /// Sweep axes; the grid is modes x event thresholds x merge thresholds.
  std::vector<double> event_grid{1e-5, 1e-6, 1e-7};
  std::vector<double> merge_grid{1e-10, 1e-12, 1e-14, 1e-16};
  std::vector<MergeMode> mode_grid{MergeMode::Preservation, MergeMode::Lossy};
  std::uint64_t mc_iterations = 0;
  std::uint64_t seed = 42;
  std::uint64_t shards = 1;
  unsigned jobs = 1;
  NoiseParams params;
  RunLimits limits;
  /// Relative accuracy the compare command matches the engines at.
  double target_accuracy = 0.01;

  bool runs_analytical() const { return mode != EngineMode::MonteCarlo; }
  bool runs_montecarlo() const { return mode != EngineMode::Analytical; }

  void validate() const {
    params.validate();
    thresholds.validate();
    if (program == ProgramKind::Scaling && n < 2) throw std::invalid_argument("scaling program needs --n >= 2");
    if (runs_montecarlo()) {
      if (mc_iterations == 0) throw std::invalid_argument("Monte Carlo mode needs --mc-iterations > 0");
      if (shards == 0) throw std::invalid_argument("--shards must be positive");
    }
    if (jobs == 0) throw std::invalid_argument("--jobs must be positive");
    if (!(target_accuracy > 0.0)) throw std::invalid_argument("--target-accuracy must be positive");
  }
};

inline std::string program_label(const ExperimentSpec& spec) {
  return spec.program == ProgramKind::Basic ? "basic" : "scaling";
}

/// The elaborated benchmark program described by `spec`.
inline Program build_program(const ExperimentSpec& spec) {
  const Program raw = spec.program == ProgramKind::Basic ? build_basic_program(spec.params)
                                                         : build_scaling_program(spec.n, spec.params);
  return elaborate(raw);
}

inline std::string params_hash(const NoiseParams& params) { return detail::fnv1a_hex(serialize(params)); }

namespace detail {

inline double to_ms(std::chrono::duration<double> d) { return d.count() * 1e3; }

inline ReportRow base_row(const ExperimentSpec& spec, const Program& prog, std::string engine) {
  ReportRow row;
  row.program = program_label(spec);
  row.n = spec.program == ProgramKind::Basic ? 2 : spec.n;
  row.engine = std::move(engine);
  row.global_scale = spec.params.global_scale;
  row.program_hash = program_hash(prog);
  row.params_hash = params_hash(spec.params);
  return row;
}

/// Runs `fn` and turns resource exhaustion into an error message.
template <typename Fn>
std::string capture_resource_errors(Fn&& fn) {
  try {
    fn();
  } catch (const std::bad_alloc&) {
    return "out of memory";
  } catch (const ResourceLimitExceeded& e) {
    return e.what();
  }
  return {};
}

}  // namespace detail

inline ReportRow analytical_row(const ExperimentSpec& spec, const Program& prog, const Thresholds& th) {
  ReportRow row = detail::base_row(spec, prog, "analytical");
  row.event_threshold = th.event_branch;
  row.merge_threshold = th.merge;
  row.merge_mode = std::string(to_string(th.merge_mode));
  row.error = detail::capture_resource_errors([&] {
    const FidelityReport r = run_analytical(prog, th, spec.limits);
    row.survival = r.survival_probability;
    row.crash = r.crash_probability;
    row.discarded_mass = r.discarded_mass;
    row.peak_map_entries = r.peak_error_map_entries;
    row.wall_time_ms = detail::to_ms(r.wall_time);
  });
  return row;
}

inline ReportRow montecarlo_row(const ExperimentSpec& spec, const Program& prog) {
  ReportRow row = detail::base_row(spec, prog, "montecarlo");
  row.mc_iterations = spec.mc_iterations;
  row.seed = spec.seed;
  row.shards = spec.shards;
  row.error = detail::capture_resource_errors([&] {
    const MCReport r = run_mc_parallel(prog, spec.mc_iterations, spec.seed, spec.shards, spec.jobs);
    row.survival = 1.0 - r.crash_rate;
    row.crash = r.crash_rate;
    row.discarded_mass = 0.0;
    row.mc_ci95 = r.ci95_halfwidth;
    row.wall_time_ms = detail::to_ms(r.wall_time);
  });
  return row;
}

/// One analytical row, one Monte Carlo row, or both (analytical first).
inline std::vector<ReportRow> cmd_run(const ExperimentSpec& spec) {
  spec.validate();
  const Program prog = build_program(spec);
  std::vector<ReportRow> rows;
  if (spec.runs_analytical()) rows.push_back(analytical_row(spec, prog, spec.thresholds));
  if (spec.runs_montecarlo()) rows.push_back(montecarlo_row(spec, prog));
  return rows;
}

/// Grid in report order: merge modes, then event thresholds, then merge
/// thresholds.
inline std::vector<Thresholds> sweep_grid(const ExperimentSpec& spec) {
  std::vector<Thresholds> grid;
  for (MergeMode mode : spec.mode_grid) {
    for (double ev : spec.event_grid) {
      for (double mg : spec.merge_grid) grid.push_back({ev, mg, mode});
    }
  }
  return grid;
}

/// Analytical rows over the threshold grid, with inaccuracy relative to the
/// finest grid point (marked `baseline`).
inline std::vector<ReportRow> cmd_sweep(const ExperimentSpec& spec) {
  spec.validate();
  const std::vector<Thresholds> grid = sweep_grid(spec);
  if (grid.empty()) throw std::invalid_argument("sweep grid is empty");
  for (const auto& th : grid) th.validate();
  const Program prog = build_program(spec);
  std::vector<ReportRow> rows(grid.size());
  parallel_for(grid.size(), spec.jobs, [&](std::size_t i) { rows[i] = analytical_row(spec, prog, grid[i]); });
  const std::size_t base = finest_index(grid);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].baseline = i == base;
    if (rows[i].crash && rows[base].crash) rows[i].inaccuracy = relative_inaccuracy(*rows[i].crash, *rows[base].crash);
  }
  return rows;
}

/// Iterations a Monte Carlo run needs for a 95% half-width of
/// `target` * rate, extrapolated from a finished run by the 1/sqrt(n) law.
inline double iterations_for_accuracy(double rate, double ci95, std::uint64_t iterations, double target) {
  if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
  const double ratio = ci95 / (target * rate);
  return static_cast<double>(iterations) * ratio * ratio;
}

/// Both engines on the same program. The analytical row's inaccuracy is its
/// crash rate against the Monte Carlo estimate; speedup compares the Monte
/// Carlo wall time scaled to the target accuracy with the analytical wall
/// time. Both rows carry the seed and thresholds.
inline std::vector<ReportRow> cmd_compare(const ExperimentSpec& spec) {
  if (spec.mode != EngineMode::Both) throw std::invalid_argument("compare requires both engines (--mode both)");
  std::vector<ReportRow> rows = cmd_run(spec);
  ReportRow& an = rows[0];
  ReportRow& mc = rows[1];
  mc.event_threshold = an.event_threshold;
  mc.merge_threshold = an.merge_threshold;
  mc.merge_mode = an.merge_mode;
  an.seed = mc.seed;
  an.mc_iterations = mc.mc_iterations;
  an.mc_ci95 = mc.mc_ci95;
  if (an.crash && mc.crash && mc.mc_ci95 && an.wall_time_ms && mc.wall_time_ms) {
    an.inaccuracy = relative_inaccuracy(*an.crash, *mc.crash);
    const double needed = iterations_for_accuracy(*mc.crash, *mc.mc_ci95, spec.mc_iterations, spec.target_accuracy);
    const double mc_ms = *mc.wall_time_ms * needed / static_cast<double>(spec.mc_iterations);
    an.speedup = mc_ms / std::max(*an.wall_time_ms, 1e-3);
    mc.speedup = an.speedup;
  }
  return rows;
}

}  // namespace qfault
