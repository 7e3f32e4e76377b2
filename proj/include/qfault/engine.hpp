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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "qfault/elaborate.hpp"
#include "qfault/error_map.hpp"
#include "qfault/program.hpp"
#include "qfault/steane.hpp"

namespace qfault {

struct FidelityReport {
  double survival_probability = 0.0;
  double crash_probability = 0.0;
  /// Mass dropped by lossy merges.
  double discarded_mass = 0.0;
  /// Largest entry count reached by any single error map.
  std::size_t peak_error_map_entries = 0;
  std::size_t steps_executed = 0;
  std::chrono::duration<double> wall_time{};
  /// Survival probability of each program observable, in program order.
  std::vector<std::pair<std::string, double>> observables;
};

struct RunLimits {
  /// Largest entry count allowed in any single error map; 0 means unbounded.
  std::size_t max_map_entries = 0;
};

/// Executes a program against QubitSets, keeping only the current level of
/// the probability tree. `W` bounds the QubitSet width at 64 * W qubits.
template <std::size_t W>
class AnalyticalEngine {
 public:
  AnalyticalEngine(const Program& prog, const Thresholds& th, RunLimits limits = {})
      : prog_(prog), th_(th), limits_(limits) {
    th_.validate();
    prog_.validate();
    where_.resize(prog_.num_qubits);
    for (const auto& members : prog_.initial_partition) install(QubitSet<W>::error_free(members));
  }

  FidelityReport run() {
    const auto start = std::chrono::steady_clock::now();
    for (const auto& step : prog_.steps) {
      std::visit([this](const auto& s) { execute(s); }, step);
      ++steps_;
    }
    FidelityReport report = evaluate();
    report.wall_time = std::chrono::steady_clock::now() - start;
    return report;
  }

  /// Composes a fixed Pauli onto qubit `q` in every error state of its
  /// QubitSet: deterministic fault injection ahead of `run()`.
  void inject(QubitId q, Pauli p) {
    const Location loc = where_.at(q);
    transform_keys(map_of(loc.set), [&](PauliString<W>& s) { s.compose_at(loc.pos, p); });
    hints_[loc.set].reset();
  }

  /// Live QubitSets, for inspection in tests.
  std::vector<const QubitSet<W>*> live_sets() const {
    std::vector<const QubitSet<W>*> out;
    for (const auto& s : sets_) {
      if (s) out.push_back(&*s);
    }
    return out;
  }

  const QubitSet<W>& set_containing(QubitId q) const { return *sets_.at(where_.at(q).set); }

 private:
  struct Location {
    std::size_t set = 0;
    std::size_t pos = 0;
  };

  std::size_t install(QubitSet<W> qs) {
    std::size_t slot = 0;
    if (!free_.empty()) {
      slot = free_.back();
      free_.pop_back();
    } else {
      slot = sets_.size();
      sets_.emplace_back();
      hints_.emplace_back();
    }
    for (std::size_t i = 0; i < qs.members.size(); ++i) where_.at(qs.members[i]) = {slot, i};
    sets_[slot] = std::move(qs);
    hints_[slot].reset();
    note_size(slot);
    return slot;
  }

  void retire(std::size_t slot) {
    sets_[slot].reset();
    hints_[slot].reset();
    free_.push_back(slot);
  }

  ErrorMap<W>& map_of(std::size_t slot) { return sets_[slot]->map; }

  /// Branching candidates of a slot, valid until a step other than an event
  /// or a gate touches it.
  std::vector<PauliString<W>>& hint_of(std::size_t slot) {
    if (!hints_[slot]) hints_[slot] = branch_hint(map_of(slot), th_.event_branch);
    return *hints_[slot];
  }

  void note_size(std::size_t slot) {
    const std::size_t n = sets_[slot]->map.size();
    peak_ = std::max(peak_, n);
    detail::check_entry_limit(n, limits_.max_map_entries);
  }

  /// Local positions of `qubits`, which must share one QubitSet.
  std::pair<std::size_t, std::vector<std::size_t>> co_located(std::span<const QubitId> qubits) const {
    const std::size_t slot = where_.at(qubits.front()).set;
    std::vector<std::size_t> pos;
    pos.reserve(qubits.size());
    for (QubitId q : qubits) {
      const Location& loc = where_.at(q);
      if (loc.set != slot) {
        throw std::runtime_error("qubits " + std::to_string(qubits.front()) + " and " + std::to_string(q) +
                                 " are in different QubitSets; elaborate the program first");
      }
      pos.push_back(loc.pos);
    }
    return {slot, std::move(pos)};
  }

  void execute(const OneQubitEvent& e) {
    const Location loc = where_.at(e.qubit);
    apply_one_qubit_event(map_of(loc.set), loc.pos, e.probability, th_.event_branch, hint_of(loc.set),
                          limits_.max_map_entries);
    note_size(loc.set);
  }

  void execute(const TwoQubitEvent& e) {
    const QubitId qs[2] = {e.first, e.second};
    const auto [slot, pos] = co_located(qs);
    apply_two_qubit_event(map_of(slot), pos[0], pos[1], e.probability, th_.event_branch, hint_of(slot),
                          limits_.max_map_entries);
    note_size(slot);
  }

  void execute(const GateTransform& g) {
    if (g.gate == Gate::Hadamard) {
      const Location loc = where_.at(g.first);
      apply_hadamard(map_of(loc.set), loc.pos);
      if (hints_[loc.set]) {
        for (auto& key : *hints_[loc.set]) key.hadamard(loc.pos);
      }
      return;
    }
    const QubitId qs[2] = {g.first, g.second};
    const auto [slot, pos] = co_located(qs);
    apply_cnot(map_of(slot), pos[0], pos[1]);
    if (hints_[slot]) {
      for (auto& key : *hints_[slot]) key.cnot(pos[0], pos[1]);
    }
  }

  void execute(const MergeSets& m) {
    const std::size_t a = where_.at(m.first).set;
    const std::size_t b = where_.at(m.second).set;
    if (a == b) return;
    MergeOutcome<W> outcome = merge_with_accounting(*sets_[a], *sets_[b], th_, limits_.max_map_entries);
    discarded_ += outcome.discarded;
    retire(a);
    retire(b);
    install(std::move(outcome.merged));
  }

  void execute(const SplitSet& s) {
    const auto [slot, pos] = co_located(s.keep);
    if (pos.size() == sets_[slot]->members.size()) return;
    auto parts = split(*sets_[slot], std::span<const std::size_t>(pos));
    // Both marginals carry the parent's total T, so installing them as-is
    // would count T twice in the product of set totals. The split-off side
    // is renormalized to 1; the remaining side keeps T.
    const double total = parts.second.map.total_probability();
    if (total > 0.0 && total != 1.0) parts.first.map.scale(1.0 / total);
    retire(slot);
    install(std::move(parts.second));
    install(std::move(parts.first));
  }

  void execute(const Task& t) {
    switch (t.kind) {
      case TaskKind::Measure:
        return;
      case TaskKind::Reset:
        for (QubitId q : t.operands) {
          const Location loc = where_.at(q);
          const std::size_t p = loc.pos;
          ErrorMap<W>& m = map_of(loc.set);
          const bool touched = std::any_of(m.begin(), m.end(), [p](const auto& kv) { return kv.first.x(p) || kv.first.z(p); });
          if (touched) {
            transform_keys(m, [p](PauliString<W>& s) { s.clear(p); });
            hints_[loc.set].reset();
          }
        }
        return;
      default:
        break;
    }
    const auto [slot, pos] = co_located(t.operands);
    ErrorMap<W>& m = map_of(slot);
    hints_[slot].reset();
    const std::span<const std::size_t> view(pos);
    switch (t.kind) {
      case TaskKind::VerifyAncilla:
        transform_keys(m, [view](PauliString<W>& s) { steane::verify_transform(s, view); });
        break;
      case TaskKind::MeasureSyndrome:
        transform_keys(m, [view](PauliString<W>& s) { steane::syndrome_transform(s, view); });
        break;
      case TaskKind::Correct:
        transform_keys(m, [view, phase = t.phase](PauliString<W>& s) { steane::correct_transform(s, phase, view); });
        break;
      default:
        break;
    }
  }

  FidelityReport evaluate() const {
    FidelityReport report;
    report.peak_error_map_entries = peak_;
    report.steps_executed = steps_;
    report.discarded_mass = discarded_;

    double total = 1.0;
    for (const auto& s : sets_) {
      if (s) total *= s->map.total_probability();
    }
    for (const Observable& obs : prog_.observables) {
      // Blocks grouped by the set holding them, as local positions.
      std::vector<std::pair<std::size_t, std::vector<std::vector<std::size_t>>>> by_set;
      for (const auto& block : obs.blocks) {
        if (block.empty()) continue;
        const auto [slot, pos] = co_located(block);
        auto it = std::find_if(by_set.begin(), by_set.end(), [slot = slot](const auto& e) { return e.first == slot; });
        if (it == by_set.end()) {
          by_set.emplace_back(slot, std::vector<std::vector<std::size_t>>{});
          it = by_set.end() - 1;
        }
        it->second.push_back(pos);
      }
      double survival = 1.0;
      for (std::size_t slot = 0; slot < sets_.size(); ++slot) {
        if (!sets_[slot]) continue;
        auto it = std::find_if(by_set.begin(), by_set.end(), [slot](const auto& e) { return e.first == slot; });
        if (it == by_set.end()) {
          survival *= sets_[slot]->map.total_probability();
          continue;
        }
        const std::span<const std::vector<std::size_t>> blocks(it->second);
        const std::size_t limit = obs.max_block_weight;
        survival *= sets_[slot]->map.sum_matching([&](const PauliString<W>& key) {
          return steane::classify_crash(key, blocks, limit) == steane::Outcome::Survive;
        });
      }
      report.observables.emplace_back(obs.name, survival);
    }
    report.survival_probability = report.observables.empty() ? total : report.observables.front().second;
    report.crash_probability = total - report.survival_probability;
    return report;
  }

  Program prog_;
  Thresholds th_;
  RunLimits limits_;
  std::vector<std::optional<QubitSet<W>>> sets_;
  std::vector<std::optional<std::vector<PauliString<W>>>> hints_;
  std::vector<std::size_t> free_;
  std::vector<Location> where_;
  double discarded_ = 0.0;
  std::size_t peak_ = 0;
  std::size_t steps_ = 0;
};

/// Calls `fn(std::integral_constant<std::size_t, W>{})` with the smallest
/// supported word count whose capacity covers `width` qubits.
template <typename Fn>
decltype(auto) dispatch_words(std::size_t width, Fn&& fn) {
  if (width <= 64) return fn(std::integral_constant<std::size_t, 1>{});
  if (width <= 128) return fn(std::integral_constant<std::size_t, 2>{});
  if (width <= 256) return fn(std::integral_constant<std::size_t, 4>{});
  if (width <= 1024) return fn(std::integral_constant<std::size_t, 16>{});
  throw std::length_error("QubitSet width " + std::to_string(width) + " exceeds the supported 1024 qubits");
}

/// Runs an elaborated program. Throws if a step's operands span QubitSets.
inline FidelityReport run_analytical(const Program& prog, const Thresholds& th, RunLimits limits = {}) {
  return dispatch_words(max_set_width(prog), [&](auto words) {
    return AnalyticalEngine<decltype(words)::value>(prog, th, limits).run();
  });
}

struct SweepPoint {
  Thresholds thresholds;
  FidelityReport report;
};

/// Calls `fn(i)` for i in [0, n) on up to `jobs` threads. Indices are handed
/// out in order; the first exception stops further hand-outs and is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  std::size_t next = 0;
  std::mutex lock;
  std::exception_ptr failure;
  auto worker = [&]() {
    for (;;) {
      std::size_t i = 0;
      {
        std::lock_guard<std::mutex> g(lock);
        if (next >= n || failure) return;
        i = next++;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> g(lock);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min<std::size_t>(jobs, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

/// Runs every grid point (up to `jobs` at a time); results keep grid order.
inline std::vector<SweepPoint> sweep(const Program& prog, std::span<const Thresholds> grid, unsigned jobs = 1,
                                     RunLimits limits = {}) {
  if (grid.empty()) throw std::invalid_argument("sweep grid is empty");
  for (const auto& th : grid) th.validate();
  std::vector<SweepPoint> out(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) { out[i] = {grid[i], run_analytical(prog, grid[i], limits)}; });
  return out;
}

/// The grid point that prunes least: smallest merge threshold, then smallest
/// event threshold, preservation before lossy.
inline std::size_t finest_index(std::span<const Thresholds> grid) {
  if (grid.empty()) throw std::invalid_argument("empty grid");
  auto key = [](const Thresholds& t) {
    return std::make_tuple(t.merge, t.event_branch, t.merge_mode == MergeMode::Preservation ? 0 : 1);
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (key(grid[i]) < key(grid[best])) best = i;
  }
  return best;
}

/// |rate - baseline| / baseline.
inline double relative_inaccuracy(double rate, double baseline) {
  if (baseline == 0.0) return rate == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(rate - baseline) / baseline;
}

/// The threshold grid explored for the two-qubit benchmark: event thresholds
/// 1e-5..1e-7, merge thresholds 1e-10..1e-16 in factors of 100, both modes.
inline std::vector<Thresholds> default_sweep_grid() {
  std::vector<Thresholds> grid;
  for (MergeMode mode : {MergeMode::Preservation, MergeMode::Lossy}) {
    for (double ev : {1e-5, 1e-6, 1e-7}) {
      for (double mg : {1e-10, 1e-12, 1e-14, 1e-16}) grid.push_back({ev, mg, mode});
    }
  }
  return grid;
}

}  // namespace qfault
