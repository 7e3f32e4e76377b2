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


#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <variant>
#include <vector>

#include <gtest/gtest.h>

#include "qfault/builders.hpp"
#include "qfault/elaborate.hpp"
#include "qfault/engine.hpp"
#include "qfault/program.hpp"

namespace qfault {
namespace {

Program singletons(std::size_t n) {
  Program p;
  p.name = "toy";
  p.num_qubits = n;
  for (QubitId q = 0; q < n; ++q) p.initial_partition.push_back({q});
  return p;
}

/// Random unelaborated program over singleton sets.
Program random_program(std::mt19937_64& rng, std::size_t n, std::size_t len) {
  Program p = singletons(n);
  std::uniform_int_distribution<QubitId> qd(0, static_cast<QubitId>(n - 1));
  std::uniform_real_distribution<double> fd(0.0, 0.3);
  for (std::size_t i = 0; i < len; ++i) {
    const QubitId a = qd(rng);
    QubitId b = qd(rng);
    while (b == a) b = qd(rng);
    switch (rng() % 5) {
      case 0: p.steps.emplace_back(OneQubitEvent{a, fd(rng)}); break;
      case 1: p.steps.emplace_back(TwoQubitEvent{a, b, fd(rng)}); break;
      case 2: p.steps.emplace_back(GateTransform{Gate::Hadamard, a}); break;
      case 3: p.steps.emplace_back(GateTransform{Gate::CNot, a, b}); break;
      default: p.steps.emplace_back(Task{TaskKind::Reset, {a}}); break;
    }
  }
  Observable obs;
  obs.name = "all";
  obs.max_block_weight = 1;
  obs.blocks.emplace_back();
  for (QubitId q = 0; q < n; ++q) obs.blocks.back().push_back(q);
  p.observables.push_back(obs);
  return p;
}

std::vector<ProgramStep> without_set_management(const Program& p) {
  std::vector<ProgramStep> out;
  for (const auto& s : p.steps) {
    if (!is_set_management(s)) out.push_back(s);
  }
  return out;
}

NoiseParams quiet_params() {
  NoiseParams p;
  p.one_qubit_op_error = 0.0;
  p.two_qubit_op_error = 0.0;
  p.measurement_error = 0.0;
  p.reset_error = 0.0;
  p.memory_decay = 1e300;
  p.operation_decay = 1e300;
  p.transport_decay = 1e300;
  return p;
}

TEST(ProgramTest, SerializationRoundTrips) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Program p = elaborate(random_program(rng, 4, 12));
    EXPECT_EQ(parse_program(serialize(p)), p);
  }
  const Program basic = build_basic_program(NoiseParams{});
  EXPECT_EQ(parse_program(serialize(basic)), basic);
  EXPECT_EQ(serialize(parse_program(serialize(basic))), serialize(basic));
}

TEST(ProgramTest, ParseRejectsMalformedText) {
  EXPECT_THROW(parse_program(""), std::invalid_argument);
  EXPECT_THROW(parse_program("qfault-program 1\nqubits 2\nset 0 1\nfrobnicate 0\n"), std::invalid_argument);
  EXPECT_THROW(parse_program("qfault-program 1\nqubits 2\nset 0 1\ne1 0\n"), std::invalid_argument);
  EXPECT_THROW(parse_program("qfault-program 1\nqubits 2\nset 0 1\ne1 5 0.1\n"), std::invalid_argument);
}

TEST(ProgramTest, ValidateRejectsBadPartitions) {
  Program p = singletons(3);
  p.initial_partition.pop_back();
  EXPECT_THROW(p.validate(), std::invalid_argument);
  Program q = singletons(2);
  q.initial_partition.push_back({0});
  EXPECT_THROW(q.validate(), std::invalid_argument);
  Program r = singletons(2);
  r.steps.emplace_back(TwoQubitEvent{0, 0, 0.1});
  EXPECT_THROW(r.validate(), std::invalid_argument);
}

TEST(ProgramTest, ElaborateInsertsMergeImmediatelyBeforeCrossSetEvent) {
  Program p = singletons(3);
  p.steps.emplace_back(OneQubitEvent{0, 0.1});
  p.steps.emplace_back(TwoQubitEvent{0, 1, 0.2});
  p.steps.emplace_back(OneQubitEvent{2, 0.1});
  const Program e = elaborate(p);
  ASSERT_EQ(e.steps.size(), 4u);
  EXPECT_EQ(e.steps[0], ProgramStep(OneQubitEvent{0, 0.1}));
  EXPECT_EQ(e.steps[1], ProgramStep(MergeSets{0, 1}));
  EXPECT_EQ(e.steps[2], ProgramStep(TwoQubitEvent{0, 1, 0.2}));
  EXPECT_EQ(e.steps[3], ProgramStep(OneQubitEvent{2, 0.1}));
}

TEST(ProgramTest, ElaborateIsIdempotentAndPreservesNonSetSteps) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Program p = random_program(rng, 5, 20);
    const Program e = elaborate(p);
    EXPECT_EQ(elaborate(e), e);
    EXPECT_EQ(without_set_management(e), p.steps);
  }
  const Program basic = build_basic_program(NoiseParams{});
  const Program e = elaborate(basic);
  EXPECT_EQ(elaborate(e), e);
  EXPECT_EQ(without_set_management(e), basic.steps);
}

TEST(ProgramTest, ElaboratedProgramsExecuteWithoutOperandErrors) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const Program p = random_program(rng, 4, 15);
    EXPECT_NO_THROW(run_analytical(elaborate(p), {1e-3, 1e-6, MergeMode::Preservation}));
  }
}

TEST(ProgramTest, BasicProgramLogicalCnotHasSevenTransversalEvents) {
  const NoiseParams params;
  const Program p = build_basic_program(params);
  std::vector<TwoQubitEvent> events;
  for (const auto& step : p.steps) {
    if (std::holds_alternative<Task>(step)) break;  // recovery starts with ancilla resets
    if (const auto* e = std::get_if<TwoQubitEvent>(&step)) events.push_back(*e);
  }
  ASSERT_EQ(events.size(), 7u);
  for (QubitId j = 0; j < 7; ++j) {
    EXPECT_EQ(events[j].first, j);
    EXPECT_EQ(events[j].second, j + 7);
    EXPECT_EQ(events[j].probability, params.two_qubit_op_error);
  }
}

TEST(ProgramTest, BasicProgramWithoutNoiseNeverCrashes) {
  const Program p = elaborate(build_basic_program(quiet_params()));
  const FidelityReport r = run_analytical(p, {1e-6, 1e-12, MergeMode::Preservation});
  EXPECT_LE(r.crash_probability, 1e-15);
  EXPECT_NEAR(r.survival_probability, 1.0, 1e-15);
}

TEST(ProgramTest, BasicProgramSplitsAncillaeAwayBeforeTheObservable) {
  const Program p = elaborate(build_basic_program(NoiseParams{}));
  PartitionTracker parts(p);
  for (const auto& step : p.steps) {
    if (const auto* m = std::get_if<MergeSets>(&step)) parts.merge(m->first, m->second);
    if (const auto* s = std::get_if<SplitSet>(&step)) parts.split(s->keep);
  }
  std::vector<QubitId> data;
  for (const auto& block : p.observables.at(0).blocks) data.insert(data.end(), block.begin(), block.end());
  ASSERT_EQ(data.size(), 14u);
  std::vector<QubitId> members = parts.members(parts.set_of(data[0]));
  std::sort(members.begin(), members.end());
  std::sort(data.begin(), data.end());
  EXPECT_EQ(members, data);
}

std::vector<std::size_t> phase_sizes(std::size_t n) {
  std::vector<std::size_t> out;
  for (const auto& phase : scaling_plan(n)) out.push_back(phase.size());
  return out;
}

TEST(ProgramTest, ScalingPlanExamples) {
  EXPECT_EQ(phase_sizes(2), (std::vector<std::size_t>{1}));
  EXPECT_EQ(phase_sizes(8), (std::vector<std::size_t>{1, 2, 4}));
  EXPECT_EQ(phase_sizes(5), (std::vector<std::size_t>{1, 2, 1}));
  EXPECT_THROW(scaling_plan(1), std::invalid_argument);
  EXPECT_THROW(build_scaling_program(1, NoiseParams{}), std::invalid_argument);
}

TEST(ProgramTest, ScalingPlanIsATreeOverCeilLogPhases) {
  for (std::size_t n = 2; n <= 64; ++n) {
    const auto plan = scaling_plan(n);
    const auto expected_phases = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n))));
    EXPECT_EQ(plan.size(), expected_phases) << n;
    std::vector<bool> entangled(n, false);
    entangled[0] = true;
    std::size_t cnots = 0;
    for (const auto& phase : plan) {
      std::vector<bool> next = entangled;
      for (const auto& [c, t] : phase) {
        EXPECT_TRUE(entangled[c]) << n;
        EXPECT_FALSE(entangled[t]) << n;
        next[t] = true;
        ++cnots;
      }
      entangled = next;
    }
    EXPECT_EQ(cnots, n - 1) << n;
    EXPECT_TRUE(std::all_of(entangled.begin(), entangled.end(), [](bool b) { return b; })) << n;
  }
}

TEST(ProgramTest, ScalingProgramStructure) {
  const Program p2 = build_scaling_program(2, NoiseParams{});
  const Program p4 = build_scaling_program(4, NoiseParams{});
  const Program p8 = build_scaling_program(8, NoiseParams{});
  // Every phase costs the same number of cycles.
  EXPECT_EQ(p4.cycles - p2.cycles, p8.cycles - p4.cycles);
  EXPECT_GT(p4.cycles, p2.cycles);

  // All logical qubits end in one QubitSet.
  const Program e = elaborate(build_scaling_program(5, NoiseParams{}));
  PartitionTracker parts(e);
  for (const auto& step : e.steps) {
    if (const auto* m = std::get_if<MergeSets>(&step)) parts.merge(m->first, m->second);
    if (const auto* s = std::get_if<SplitSet>(&step)) parts.split(s->keep);
  }
  const auto& blocks = e.observables.at(0).blocks;
  ASSERT_EQ(blocks.size(), 5u);
  for (const auto& block : blocks) {
    for (QubitId q : block) EXPECT_EQ(parts.set_of(q), parts.set_of(blocks[0][0]));
  }
}

}  // namespace
}  // namespace qfault
