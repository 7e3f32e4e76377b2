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
#include <cstdint>
#include <exception>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include "qfault/engine.hpp"
#include "qfault/program.hpp"
#include "qfault/steane.hpp"

namespace qfault {

struct MCReport {
  std::uint64_t iterations = 0;
  std::uint64_t crashes = 0;
  double crash_rate = 0.0;
  /// 1.96 * sqrt(p (1 - p) / n).
  double ci95_halfwidth = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t shards = 1;
  std::vector<std::uint64_t> shard_crashes;
  std::chrono::duration<double> wall_time{};
};

namespace mc {

/// Generator for one shard: a 64-bit Mersenne Twister (period 2^19937 - 1)
/// seeded from (seed, shard) through std::seed_seq.
inline std::mt19937_64 shard_engine(std::uint64_t seed, std::uint64_t shard) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(shard), static_cast<std::uint32_t>(shard >> 32)};
  return std::mt19937_64(seq);
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

enum class OpKind : std::uint8_t { OneQubitEvent, TwoQubitEvent, Hadamard, CNot, Reset, Verify, Syndrome, Correct };

struct Op {
  OpKind kind;
  ErrorPhase phase = ErrorPhase::BitFlip;
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  double probability = 0.0;
  std::uint32_t offset = 0;  // into Compiled::positions
  std::uint32_t count = 0;
};

/// Flattened step stream over global qubit positions. Set management is
/// dropped: a sample is one Pauli string over every qubit.
struct Compiled {
  std::size_t num_qubits = 0;
  std::vector<Op> ops;
  std::vector<std::size_t> positions;
  std::vector<std::vector<std::size_t>> blocks;
  std::size_t max_block_weight = 1;
};

inline Compiled compile(const Program& prog) {
  prog.validate();
  Compiled c;
  c.num_qubits = prog.num_qubits;
  auto add_positions = [&c](Op& op, const std::vector<QubitId>& qs) {
    op.offset = static_cast<std::uint32_t>(c.positions.size());
    op.count = static_cast<std::uint32_t>(qs.size());
    c.positions.insert(c.positions.end(), qs.begin(), qs.end());
  };
  for (const auto& step : prog.steps) {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, OneQubitEvent>) {
            if (s.probability > 0.0) c.ops.push_back({OpKind::OneQubitEvent, {}, s.qubit, 0, s.probability});
          } else if constexpr (std::is_same_v<T, TwoQubitEvent>) {
            if (s.probability > 0.0) c.ops.push_back({OpKind::TwoQubitEvent, {}, s.first, s.second, s.probability});
          } else if constexpr (std::is_same_v<T, GateTransform>) {
            c.ops.push_back({s.gate == Gate::Hadamard ? OpKind::Hadamard : OpKind::CNot, {}, s.first, s.second});
          } else if constexpr (std::is_same_v<T, Task>) {
            Op op{OpKind::Reset, s.phase};
            switch (s.kind) {
              case TaskKind::Measure: return;
              case TaskKind::Reset: op.kind = OpKind::Reset; break;
              case TaskKind::VerifyAncilla: op.kind = OpKind::Verify; break;
              case TaskKind::MeasureSyndrome: op.kind = OpKind::Syndrome; break;
              case TaskKind::Correct: op.kind = OpKind::Correct; break;
            }
            add_positions(op, s.operands);
            c.ops.push_back(op);
          }
        },
        step);
  }
  if (!prog.observables.empty()) {
    const Observable& obs = prog.observables.front();
    for (const auto& block : obs.blocks) c.blocks.emplace_back(block.begin(), block.end());
    c.max_block_weight = obs.max_block_weight;
  }
  return c;
}

/// Samples one error scenario; true if it crashes.
template <std::size_t W>
bool sample_crash(const Compiled& c, std::mt19937_64& rng) {
  PauliString<W> s(c.num_qubits);
  for (const Op& op : c.ops) {
    switch (op.kind) {
      case OpKind::OneQubitEvent: {
        const double u = uniform(rng);
        if (u < op.probability) {
          const auto k = std::min<std::size_t>(2, static_cast<std::size_t>(u / op.probability * 3.0));
          s.compose_at(op.a, kErrorLabels[k]);
        }
        break;
      }
      case OpKind::TwoQubitEvent: {
        const double u = uniform(rng);
        if (u < op.probability) {
          const auto code = 1 + std::min<std::size_t>(14, static_cast<std::size_t>(u / op.probability * 15.0));
          s.compose_at(op.a, static_cast<Pauli>(code & 3U));
          s.compose_at(op.b, static_cast<Pauli>(code >> 2));
        }
        break;
      }
      case OpKind::Hadamard:
        s.hadamard(op.a);
        break;
      case OpKind::CNot:
        s.cnot(op.a, op.b);
        break;
      default: {
        const std::span<const std::size_t> pos(c.positions.data() + op.offset, op.count);
        switch (op.kind) {
          case OpKind::Reset: steane::reset_transform(s, pos); break;
          case OpKind::Verify: steane::verify_transform(s, pos); break;
          case OpKind::Syndrome: steane::syndrome_transform(s, pos); break;
          case OpKind::Correct: steane::correct_transform(s, op.phase, pos); break;
          default: break;
        }
      }
    }
  }
  return steane::classify_crash(s, std::span<const std::vector<std::size_t>>(c.blocks), c.max_block_weight) ==
         steane::Outcome::Crash;
}

inline std::uint64_t run_shard(const Compiled& c, std::uint64_t iterations, std::uint64_t seed, std::uint64_t shard) {
  auto rng = shard_engine(seed, shard);
  return dispatch_words(std::max<std::size_t>(c.num_qubits, 1), [&](auto words) {
    std::uint64_t crashes = 0;
    for (std::uint64_t i = 0; i < iterations; ++i) crashes += sample_crash<decltype(words)::value>(c, rng) ? 1 : 0;
    return crashes;
  });
}

inline double ci_halfwidth(double p, std::uint64_t n, double z) {
  return n == 0 ? 0.0 : z * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace mc

/// Monte Carlo estimate split over `shards` independent substreams, run on up
/// to `jobs` threads. Shard i runs iterations/shards samples (the first
/// iterations % shards shards take one more).
inline MCReport run_mc_parallel(const Program& prog, std::uint64_t iterations, std::uint64_t seed,
                                std::uint64_t shards, unsigned jobs = 0) {
  if (iterations == 0) throw std::invalid_argument("Monte Carlo needs at least one iteration");
  if (shards == 0) throw std::invalid_argument("Monte Carlo needs at least one shard");
  if (jobs == 0) jobs = std::max(1U, std::thread::hardware_concurrency());
  const auto start = std::chrono::steady_clock::now();
  const mc::Compiled compiled = mc::compile(prog);

  MCReport report;
  report.iterations = iterations;
  report.seed = seed;
  report.shards = shards;
  report.shard_crashes.assign(shards, 0);
  auto shard_iterations = [&](std::uint64_t s) { return iterations / shards + (s < iterations % shards ? 1 : 0); };

  const unsigned n_threads = static_cast<unsigned>(std::min<std::uint64_t>(jobs, shards));
  if (n_threads <= 1) {
    for (std::uint64_t s = 0; s < shards; ++s) {
      report.shard_crashes[s] = mc::run_shard(compiled, shard_iterations(s), seed, s);
    }
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) {
      pool.emplace_back([&, t]() {
        try {
          for (std::uint64_t s = t; s < shards; s += n_threads) {
            report.shard_crashes[s] = mc::run_shard(compiled, shard_iterations(s), seed, s);
          }
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  for (std::uint64_t c : report.shard_crashes) report.crashes += c;
  report.crash_rate = static_cast<double>(report.crashes) / static_cast<double>(iterations);
  report.ci95_halfwidth = mc::ci_halfwidth(report.crash_rate, iterations, 1.96);
  report.wall_time = std::chrono::steady_clock::now() - start;
  return report;
}

/// Single-stream Monte Carlo; identical to run_mc_parallel with one shard.
inline MCReport run_mc(const Program& prog, std::uint64_t iterations, std::uint64_t seed) {
  return run_mc_parallel(prog, iterations, seed, 1, 1);
}

}  // namespace qfault
