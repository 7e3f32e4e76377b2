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
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qfault/noise.hpp"
#include "qfault/program.hpp"
#include "qfault/schedule.hpp"
#include "qfault/steane.hpp"

namespace qfault {

struct BuildOptions {
  steane::RecoveryOptions recovery;
};

namespace detail {

inline steane::Block allocate_data_block(CycleBuilder& b) {
  steane::Block blk;
  const auto qs = b.allocate(steane::kBlockSize);
  std::copy(qs.begin(), qs.end(), blk.begin());
  b.add_initial_set(qs);
  b.activate(blk);
  return blk;
}

/// Transversal logical CNot: one cycle of seven physical CNots.
inline void logical_cnot(CycleBuilder& b, const steane::Block& control, const steane::Block& target) {
  for (std::size_t j = 0; j < steane::kBlockSize; ++j) b.cnot(control[j], target[j]);
}

inline void final_measurement(CycleBuilder& b, const std::vector<steane::Block>& data) {
  std::vector<QubitId> all;
  for (const auto& blk : data) {
    for (QubitId q : blk) {
      b.measurement(q);
      all.push_back(q);
    }
  }
  b.end_cycle();
  b.append(Task{TaskKind::Measure, std::move(all)});
}

inline Observable survival_observable(const std::vector<steane::Block>& data) {
  Observable obs;
  obs.name = "survive";
  obs.max_block_weight = 1;
  for (const auto& blk : data) obs.blocks.emplace_back(blk.begin(), blk.end());
  return obs;
}

}  // namespace detail

/// Two logical qubits: logical CNot, recovery of both blocks, a second
/// logical CNot, recovery, and measurement of all data qubits. The program is
/// returned unelaborated.
inline Program build_basic_program(const NoiseParams& params, const BuildOptions& options = {}) {
  CycleBuilder b(params);
  const std::vector<steane::Block> data{detail::allocate_data_block(b), detail::allocate_data_block(b)};
  const std::vector<steane::RecoveryResources> resources{steane::allocate_recovery(b, data[0]),
                                                         steane::allocate_recovery(b, data[1])};
  for (int round = 0; round < 2; ++round) {
    detail::logical_cnot(b, data[0], data[1]);
    b.end_cycle();
    steane::build_recovery(b, resources, options.recovery);
  }
  detail::final_measurement(b, data);
  return b.finish("basic", {detail::survival_observable(data)});
}

/// Logical CNots of each phase of the scaling program as (control, target)
/// block indices. Phase k pairs each of the first 2^(k-1) blocks with block
/// i + 2^(k-1) while such a block exists.
inline std::vector<std::vector<std::pair<std::size_t, std::size_t>>> scaling_plan(std::size_t n) {
  if (n < 2) throw std::invalid_argument("scaling program needs at least 2 logical qubits");
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> phases;
  for (std::size_t stride = 1; stride < n; stride *= 2) {
    std::vector<std::pair<std::size_t, std::size_t>> phase;
    for (std::size_t i = 0; i < stride && i + stride < n; ++i) phase.emplace_back(i, i + stride);
    phases.push_back(std::move(phase));
  }
  return phases;
}

/// N logical qubits entangled by N-1 logical CNots arranged as a binary
/// tree over ceil(log2 N) phases; every logical CNot is followed by recovery
/// of both blocks. Ends with measurement of all data qubits.
inline Program build_scaling_program(std::size_t n, const NoiseParams& params, const BuildOptions& options = {}) {
  const auto plan = scaling_plan(n);
  CycleBuilder b(params);
  std::vector<steane::Block> data;
  for (std::size_t i = 0; i < n; ++i) data.push_back(detail::allocate_data_block(b));
  std::vector<steane::RecoveryResources> resources;
  for (std::size_t i = 0; i < n; ++i) resources.push_back(steane::allocate_recovery(b, data[i]));
  for (const auto& phase : plan) {
    std::vector<steane::RecoveryResources> involved;
    for (const auto& [control, target] : phase) {
      detail::logical_cnot(b, data[control], data[target]);
      involved.push_back(resources[control]);
      involved.push_back(resources[target]);
    }
    b.end_cycle();
    steane::build_recovery(b, involved, options.recovery);
  }
  detail::final_measurement(b, data);
  return b.finish("scaling" + std::to_string(n), {detail::survival_observable(data)});
}

}  // namespace qfault
