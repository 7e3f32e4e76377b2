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
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qfault/noise.hpp"
#include "qfault/program.hpp"

namespace qfault {

/// Emits program steps under a cycle model. Operations placed in the same
/// cycle must touch distinct qubits. Each operation emits its propagation
/// transform, its operation-error event and an operation-decoherence event
/// per operand. Closing a cycle gives every live qubit that was not operated
/// on a memory event covering the cycle duration (the two-qubit op time if
/// the cycle held any two-qubit op, the one-qubit op time otherwise).
class CycleBuilder {
 public:
  explicit CycleBuilder(const NoiseParams& params) : params_(params.scaled()) { params.validate(); }

  const NoiseParams& params() const { return params_; }

  QubitId allocate() {
    busy_.push_back(false);
    live_.push_back(false);
    return static_cast<QubitId>(busy_.size() - 1);
  }

  std::vector<QubitId> allocate(std::size_t n) {
    std::vector<QubitId> qs;
    qs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) qs.push_back(allocate());
    return qs;
  }

  std::size_t num_qubits() const { return busy_.size(); }

  /// Declares a group of qubits as one QubitSet of the initial partition.
  void add_initial_set(std::vector<QubitId> qubits) { partition_.push_back(std::move(qubits)); }

  void activate(std::span<const QubitId> qs) {
    for (QubitId q : qs) live_.at(q) = true;
  }
  void deactivate(std::span<const QubitId> qs) {
    for (QubitId q : qs) live_.at(q) = false;
  }
  bool is_live(QubitId q) const { return live_.at(q); }

  void hadamard(QubitId q) {
    occupy(q);
    steps_.emplace_back(GateTransform{Gate::Hadamard, q});
    steps_.emplace_back(OneQubitEvent{q, params_.one_qubit_op_error});
    operation_decay(q, params_.one_bit_op_time);
  }

  void cnot(QubitId control, QubitId target) {
    occupy(control);
    occupy(target);
    two_qubit_cycle_ = true;
    steps_.emplace_back(GateTransform{Gate::CNot, control, target});
    steps_.emplace_back(TwoQubitEvent{control, target, params_.two_qubit_op_error});
    operation_decay(control, params_.two_bit_op_time);
    operation_decay(target, params_.two_bit_op_time);
  }

  /// Returns the qubit to the error-free label, then applies the reset error.
  void reset(QubitId q) {
    occupy(q);
    steps_.emplace_back(Task{TaskKind::Reset, {q}});
    steps_.emplace_back(OneQubitEvent{q, params_.reset_error});
    operation_decay(q, params_.one_bit_op_time);
  }

  /// Measurement error ahead of a measurement; the qubit counts as operated.
  void measurement(QubitId q) {
    occupy(q);
    steps_.emplace_back(OneQubitEvent{q, params_.measurement_error});
    operation_decay(q, params_.one_bit_op_time);
  }

  /// Transport decoherence for moving `q` by `distance_um`; no-op at distance 0.
  void transport(QubitId q, double distance_um) {
    if (distance_um <= 0.0) return;
    const double duration = distance_um / params_.movement_speed;
    steps_.emplace_back(OneQubitEvent{q, NoiseParams::decay_event(duration, params_.transport_decay)});
  }

  /// Appends a zero-duration step.
  void append(ProgramStep step) { steps_.push_back(std::move(step)); }

  void end_cycle() {
    if (!cycle_open_) return;
    const double duration = two_qubit_cycle_ ? params_.two_bit_op_time : params_.one_bit_op_time;
    const double f = NoiseParams::decay_event(duration, params_.memory_decay);
    for (std::size_t q = 0; q < live_.size(); ++q) {
      if (live_[q] && !busy_[q]) steps_.emplace_back(OneQubitEvent{static_cast<QubitId>(q), f});
    }
    std::fill(busy_.begin(), busy_.end(), false);
    two_qubit_cycle_ = false;
    cycle_open_ = false;
    ++cycles_;
  }

  std::size_t cycles() const { return cycles_; }
  const std::vector<ProgramStep>& steps() const { return steps_; }

  Program finish(std::string name, std::vector<Observable> observables) {
    end_cycle();
    Program prog;
    prog.name = std::move(name);
    prog.num_qubits = num_qubits();
    prog.initial_partition = partition_;
    prog.steps = std::move(steps_);
    prog.observables = std::move(observables);
    prog.cycles = cycles_;
    steps_.clear();
    prog.validate();
    return prog;
  }

 private:
  void occupy(QubitId q) {
    if (busy_.at(q)) {
      throw std::logic_error("qubit " + std::to_string(q) + " used twice in one cycle");
    }
    busy_[q] = true;
    cycle_open_ = true;
  }

  void operation_decay(QubitId q, double duration_us) {
    steps_.emplace_back(OneQubitEvent{q, NoiseParams::decay_event(duration_us, params_.operation_decay)});
  }

  NoiseParams params_;
  std::vector<ProgramStep> steps_;
  std::vector<std::vector<QubitId>> partition_;
  std::vector<bool> busy_;
  std::vector<bool> live_;
  bool two_qubit_cycle_ = false;
  bool cycle_open_ = false;
  std::size_t cycles_ = 0;
};

}  // namespace qfault
