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

// qfault: experiment runner for the analytical and Monte Carlo engines.
//
//   qfault run     --program basic --mode both --scale 100 --mc-iterations 1000000
//   qfault sweep   --program basic --format csv --output sweep.csv
//   qfault compare --program basic --scale 100 --mc-iterations 100000 --event-th 1e-4 --merge-th 1e-8
//   qfault program --program scaling --n 8      (elaborated program text)
//   qfault decode-table
//
// Reports go to --output, or to $QFAULT_OUTPUT_DIR/qfault-<command>-<program>.<format>
// when only the environment variable is set, or to stdout. A relative --output
// is resolved against $QFAULT_OUTPUT_DIR when that is set.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qfault/qfault.hpp"

namespace {

struct CliState {
  qfault::ExperimentSpec spec;
  std::string program = "basic";
  std::string mode = "analytical";
  std::string merge_mode = "preservation";
  std::vector<std::string> mode_grid{"preservation", "lossy"};
  std::string params_file;
  double scale = 1.0;
  std::string output;
  std::string format = "csv";
};

void add_program_options(CLI::App& cmd, CliState& st) {
  cmd.add_option("--program", st.program, "Benchmark program")->check(CLI::IsMember({"basic", "scaling"}));
  cmd.add_option("--n", st.spec.n, "Logical qubits of the scaling program")->check(CLI::Range(2, 1 << 16));
  cmd.add_option("--params", st.params_file, "Noise parameter file (key = value lines)")->check(CLI::ExistingFile);
  cmd.add_option("--scale", st.scale, "global_scale stress factor applied on top of --params")
      ->check(CLI::PositiveNumber);
}

void add_engine_options(CLI::App& cmd, CliState& st) {
  cmd.add_option("--event-th", st.spec.thresholds.event_branch, "Event branch threshold")->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--merge-th", st.spec.thresholds.merge, "Merge threshold")->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--merge-mode", st.merge_mode, "preservation or lossy")
      ->check(CLI::IsMember({"preservation", "lossy", "P", "L"}));
  cmd.add_option("--max-entries", st.spec.limits.max_map_entries,
                 "Abort an analytical run whose error map exceeds this many entries (0 = no limit)");
}

void add_mc_options(CLI::App& cmd, CliState& st) {
  cmd.add_option("--mc-iterations", st.spec.mc_iterations, "Monte Carlo iterations");
  cmd.add_option("--seed", st.spec.seed, "Monte Carlo seed");
  cmd.add_option("--shards", st.spec.shards, "Independent Monte Carlo substreams")->check(CLI::PositiveNumber);
}

void add_output_options(CLI::App& cmd, CliState& st) {
  cmd.add_option("--jobs", st.spec.jobs, "Parallel workers (sweep points, MC shards)")->check(CLI::PositiveNumber);
  cmd.add_option("--output", st.output, "Report path");
  cmd.add_option("--format", st.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
}

void finish_spec(CliState& st) {
  st.spec.program = qfault::parse_program_kind(st.program);
  st.spec.mode = qfault::parse_engine_mode(st.mode);
  st.spec.thresholds.merge_mode = qfault::parse_merge_mode(st.merge_mode);
  st.spec.mode_grid.clear();
  for (const auto& m : st.mode_grid) st.spec.mode_grid.push_back(qfault::parse_merge_mode(m));
  if (!st.params_file.empty()) st.spec.params = qfault::load_params_file(st.params_file);
  st.spec.params.global_scale *= st.scale;
}

std::filesystem::path report_path(const CliState& st, const std::string& command) {
  const char* dir = std::getenv("QFAULT_OUTPUT_DIR");
  if (!st.output.empty()) {
    std::filesystem::path p(st.output);
    if (p.is_relative() && dir != nullptr && *dir != '\0') return std::filesystem::path(dir) / p;
    return p;
  }
  if (dir != nullptr && *dir != '\0') {
    return std::filesystem::path(dir) / ("qfault-" + command + "-" + st.program + "." + st.format);
  }
  return {};
}

int emit(const CliState& st, const std::string& command, const std::vector<qfault::ReportRow>& rows) {
  auto write = [&](std::ostream& out) {
    if (st.format == "json") {
      qfault::write_json(out, rows);
    } else {
      qfault::write_csv(out, rows);
    }
  };
  const std::filesystem::path path = report_path(st, command);
  if (path.empty()) {
    write(std::cout);
  } else {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write(out);
    std::cerr << "wrote " << rows.size() << " row(s) to " << path.string() << "\n";
  }
  for (const auto& row : rows) {
    if (!row.error.empty()) {
      std::cerr << "error: " << row.engine << " run failed: " << row.error << "\n";
      return 3;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qfault: crash-rate simulation of error-corrected quantum programs"};
  app.require_subcommand(1);
  CliState st;

  auto* run = app.add_subcommand("run", "Run one configuration through one or both engines");
  add_program_options(*run, st);
  run->add_option("--mode", st.mode, "Engine")->check(CLI::IsMember({"analytical", "montecarlo", "both"}));
  add_engine_options(*run, st);
  add_mc_options(*run, st);
  add_output_options(*run, st);

  auto* sweep = app.add_subcommand("sweep", "Analytical runs over a threshold grid");
  add_program_options(*sweep, st);
  sweep->add_option("--event-grid", st.spec.event_grid, "Event branch thresholds")->delimiter(',');
  sweep->add_option("--merge-grid", st.spec.merge_grid, "Merge thresholds")->delimiter(',');
  sweep->add_option("--modes", st.mode_grid, "Merge modes")->delimiter(',');
  sweep->add_option("--max-entries", st.spec.limits.max_map_entries, "Per-run error map entry limit (0 = none)");
  add_output_options(*sweep, st);

  auto* compare = app.add_subcommand("compare", "Both engines at a matched accuracy target; reports the speedup");
  add_program_options(*compare, st);
  compare->add_option("--mode", st.mode, "Must be 'both'")->check(CLI::IsMember({"analytical", "montecarlo", "both"}));
  st.mode = "both";
  add_engine_options(*compare, st);
  add_mc_options(*compare, st);
  compare->add_option("--target-accuracy", st.spec.target_accuracy, "Relative accuracy to match (default 0.01)")
      ->check(CLI::PositiveNumber);
  add_output_options(*compare, st);

  auto* program = app.add_subcommand("program", "Print the elaborated program in text form");
  add_program_options(*program, st);

  app.add_subcommand("decode-table", "Print the Steane syndrome decode table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (app.got_subcommand("decode-table")) {
      std::cout << qfault::steane::decode_table_text();
      return 0;
    }
    if (app.got_subcommand(run)) {
      // `run` defaults to the analytical engine; `compare` to both.
      if (run->count("--mode") == 0) st.mode = "analytical";
    }
    finish_spec(st);
    if (app.got_subcommand(program)) {
      st.spec.validate();
      std::cout << qfault::serialize(qfault::build_program(st.spec));
      return 0;
    }
    if (app.got_subcommand(run)) return emit(st, "run", qfault::cmd_run(st.spec));
    if (app.got_subcommand(sweep)) {
      st.spec.mode = qfault::EngineMode::Analytical;
      return emit(st, "sweep", qfault::cmd_sweep(st.spec));
    }
    if (app.got_subcommand(compare)) return emit(st, "compare", qfault::cmd_compare(st.spec));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
