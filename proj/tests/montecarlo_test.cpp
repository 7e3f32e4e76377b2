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
#include <numeric>
#include <random>
#include <stdexcept>
#include <variant>
#include <vector>

#include <gtest/gtest.h>

#include "qfault/builders.hpp"
#include "qfault/elaborate.hpp"
#include "qfault/engine.hpp"
#include "qfault/montecarlo.hpp"
#include "brute_force.hpp"

namespace qfault {
namespace {

Program toy(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return elaborate(testing::random_toy_program(rng, 4, 6, 4));
}

Program silenced(Program prog) {
  for (auto& step : prog.steps) {
    if (auto* e = std::get_if<OneQubitEvent>(&step)) e->probability = 0.0;
    if (auto* e = std::get_if<TwoQubitEvent>(&step)) e->probability = 0.0;
  }
  return prog;
}

double z_score(const MCReport& mc, double exact) {
  const double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(mc.iterations));
  return se == 0.0 ? 0.0 : (mc.crash_rate - exact) / se;
}

TEST(MonteCarloTest, ZeroNoiseNeverCrashes) {
  const Program prog = silenced(elaborate(build_basic_program(NoiseParams{})));
  const MCReport r = run_mc(prog, 2000, 1);
  EXPECT_EQ(r.crashes, 0u);
  EXPECT_EQ(r.crash_rate, 0.0);
  EXPECT_EQ(r.ci95_halfwidth, 0.0);
}

TEST(MonteCarloTest, SameSeedSameReport) {
  const Program prog = toy(3);
  const MCReport a = run_mc(prog, 20000, 99);
  const MCReport b = run_mc(prog, 20000, 99);
  EXPECT_EQ(a.crashes, b.crashes);
  EXPECT_EQ(a.crash_rate, b.crash_rate);
  EXPECT_EQ(a.ci95_halfwidth, b.ci95_halfwidth);
  EXPECT_EQ(a.seed, 99u);
  EXPECT_NE(run_mc(prog, 20000, 100).crashes, a.crashes);
}

TEST(MonteCarloTest, OneShardEqualsSingleStream) {
  const Program prog = toy(4);
  const MCReport a = run_mc(prog, 10000, 5);
  const MCReport b = run_mc_parallel(prog, 10000, 5, 1, 4);
  EXPECT_EQ(a.crashes, b.crashes);
}

TEST(MonteCarloTest, ShardTalliesAddUpAndDoNotDependOnThreads) {
  const Program prog = toy(6);
  const MCReport a = run_mc_parallel(prog, 10001, 8, 7, 1);
  const MCReport b = run_mc_parallel(prog, 10001, 8, 7, 3);
  ASSERT_EQ(a.shard_crashes.size(), 7u);
  EXPECT_EQ(std::accumulate(a.shard_crashes.begin(), a.shard_crashes.end(), std::uint64_t{0}), a.crashes);
  EXPECT_EQ(a.shard_crashes, b.shard_crashes);
  EXPECT_DOUBLE_EQ(a.crash_rate, static_cast<double>(a.crashes) / 10001.0);
  EXPECT_NEAR(a.ci95_halfwidth, 1.96 * std::sqrt(a.crash_rate * (1 - a.crash_rate) / 10001.0), 1e-15);
}

TEST(MonteCarloTest, ShardCountsAgreeStatistically) {
  const Program prog = toy(7);
  const MCReport a = run_mc_parallel(prog, 200000, 11, 4, 1);
  const MCReport b = run_mc_parallel(prog, 200000, 11, 8, 1);
  const double se = std::sqrt(a.crash_rate * (1 - a.crash_rate) / 200000.0 +
                              b.crash_rate * (1 - b.crash_rate) / 200000.0);
  EXPECT_LT(std::abs(a.crash_rate - b.crash_rate), 3 * se);
}

TEST(MonteCarloTest, AgreesWithExactEnumerationOnToyPrograms) {
  for (std::uint64_t seed = 20; seed < 30; ++seed) {
    const Program prog = toy(seed);
    const double exact = 1.0 - testing::brute_force_survival(prog, testing::brute_force(prog));
    const MCReport mc = run_mc(prog, 50000, seed);
    EXPECT_LT(std::abs(z_score(mc, exact)), 4.5) << "seed " << seed << " exact " << exact << " mc " << mc.crash_rate;
  }
}

/// One logical block through a full recovery, with a handful of noisy events
/// and all others silenced, so that the analytical engine at zero thresholds
/// is exact.
TEST(MonteCarloTest, AgreesWithTheExactAnalyticalEngineThroughRecovery) {
  CycleBuilder b(NoiseParams{});
  const steane::Block data = detail::allocate_data_block(b);
  const steane::RecoveryResources res = steane::allocate_recovery(b, data);
  steane::build_recovery(b, std::span<const steane::RecoveryResources>(&res, 1));
  Observable obs{"block", {{data.begin(), data.end()}}, 1};
  const Program full = elaborate(b.finish("rig", {obs}));

  std::vector<std::size_t> events;
  for (std::size_t i = 0; i < full.steps.size(); ++i) {
    if (std::holds_alternative<OneQubitEvent>(full.steps[i]) || std::holds_alternative<TwoQubitEvent>(full.steps[i])) {
      events.push_back(i);
    }
  }
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 4; ++trial) {
    Program prog = silenced(full);
    std::shuffle(events.begin(), events.end(), rng);
    for (std::size_t k = 0; k < 6; ++k) {
      auto& step = prog.steps[events[k]];
      if (auto* e = std::get_if<OneQubitEvent>(&step)) e->probability = 0.2;
      if (auto* e = std::get_if<TwoQubitEvent>(&step)) e->probability = 0.2;
    }
    const FidelityReport exact = run_analytical(prog, {0.0, 0.0, MergeMode::Preservation});
    const MCReport mc = run_mc(prog, 40000, 1000 + trial);
    EXPECT_LT(std::abs(z_score(mc, exact.crash_probability)), 4.5)
        << "trial " << trial << " exact " << exact.crash_probability << " mc " << mc.crash_rate;
  }
}

TEST(MonteCarloTest, StandardErrorFallsAsInverseSquareRoot) {
  const Program prog = toy(12);
  auto spread = [&](std::uint64_t iterations) {
    std::vector<double> rates;
    for (std::uint64_t s = 0; s < 24; ++s) rates.push_back(run_mc(prog, iterations, 500 + s).crash_rate);
    const double mean = std::accumulate(rates.begin(), rates.end(), 0.0) / rates.size();
    double var = 0.0;
    for (double r : rates) var += (r - mean) * (r - mean);
    return std::sqrt(var / (rates.size() - 1));
  };
  const double small = spread(500);
  const double large = spread(50000);
  ASSERT_GT(large, 0.0);
  const double ratio = small / large;  // sqrt(100) = 10 expected
  EXPECT_GT(ratio, 5.0);
  EXPECT_LT(ratio, 20.0);
}

TEST(MonteCarloTest, RejectsBadArguments) {
  const Program prog = toy(1);
  EXPECT_THROW(run_mc(prog, 0, 1), std::invalid_argument);
  EXPECT_THROW(run_mc_parallel(prog, 10, 1, 0), std::invalid_argument);
}

}  // namespace
}  // namespace qfault
