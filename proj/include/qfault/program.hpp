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
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "qfault/error_map.hpp"

namespace qfault {

// Program steps. A program is an ordered list of error events (stochastic)
// and error tasks (deterministic rewrites of error states, set management).

struct OneQubitEvent {
  QubitId qubit;
  double probability;
  bool operator==(const OneQubitEvent&) const = default;
};

struct TwoQubitEvent {
  QubitId first;
  QubitId second;
  double probability;
  bool operator==(const TwoQubitEvent&) const = default;
};

enum class Gate : std::uint8_t { Hadamard, CNot };

/// Deterministic error propagation through a Clifford gate. For a Hadamard
/// only `first` is used; for a CNot `first` is the control.
struct GateTransform {
  Gate gate;
  QubitId first;
  QubitId second = 0;
  bool operator==(const GateTransform&) const = default;
};

/// Merges the set holding `first` with the set holding `second`.
struct MergeSets {
  QubitId first;
  QubitId second;
  bool operator==(const MergeSets&) const = default;
};

/// Separates `keep` (all in one set) from the rest of that set.
struct SplitSet {
  std::vector<QubitId> keep;
  bool operator==(const SplitSet&) const = default;
};

enum class TaskKind : std::uint8_t {
  Reset,            // operands: qubits returned to the error-free label
  VerifyAncilla,    // operands: 7 ancilla qubits, verifier
  MeasureSyndrome,  // operands: 7 ancilla qubits
  Correct,          // operands: 7 data qubits, 3 x 3 syndrome qubits
  Measure,          // operands: measured qubits (no state change)
};

/// Which error component a recovery phase detects and corrects.
enum class ErrorPhase : std::uint8_t { BitFlip, PhaseFlip };

struct Task {
  TaskKind kind;
  std::vector<QubitId> operands;
  ErrorPhase phase = ErrorPhase::BitFlip;
  bool operator==(const Task&) const = default;
};

using ProgramStep = std::variant<OneQubitEvent, TwoQubitEvent, GateTransform, MergeSets, SplitSet, Task>;

inline bool is_set_management(const ProgramStep& step) {
  return std::holds_alternative<MergeSets>(step) || std::holds_alternative<SplitSet>(step);
}

/// Survives iff every block carries at most `max_block_weight` errors.
struct Observable {
  std::string name;
  std::vector<std::vector<QubitId>> blocks;
  std::size_t max_block_weight = 1;
  bool operator==(const Observable&) const = default;
};

struct Program {
  std::string name = "program";
  std::size_t num_qubits = 0;
  std::vector<std::vector<QubitId>> initial_partition;
  std::vector<ProgramStep> steps;
  std::vector<Observable> observables;
  /// Schedule length reported by the builder; informational.
  std::size_t cycles = 0;

  bool operator==(const Program&) const = default;

  void validate() const;
};

inline std::size_t task_arity(TaskKind kind) {
  switch (kind) {
    case TaskKind::VerifyAncilla: return 8;
    case TaskKind::MeasureSyndrome: return 7;
    case TaskKind::Correct: return 16;
    default: return 0;  // variadic
  }
}

/// Operands that must share one QubitSet when the step executes.
inline std::vector<QubitId> co_resident_operands(const ProgramStep& step) {
  return std::visit(
      [](const auto& s) -> std::vector<QubitId> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, TwoQubitEvent>) {
          return {s.first, s.second};
        } else if constexpr (std::is_same_v<T, GateTransform>) {
          if (s.gate == Gate::CNot) return {s.first, s.second};
          return {s.first};
        } else if constexpr (std::is_same_v<T, Task>) {
          if (s.kind == TaskKind::Reset || s.kind == TaskKind::Measure) return {};
          return s.operands;
        } else {
          return {};
        }
      },
      step);
}

/// Every qubit a step references.
inline std::vector<QubitId> referenced_qubits(const ProgramStep& step) {
  return std::visit(
      [](const auto& s) -> std::vector<QubitId> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, OneQubitEvent>) {
          return {s.qubit};
        } else if constexpr (std::is_same_v<T, TwoQubitEvent> || std::is_same_v<T, MergeSets>) {
          return {s.first, s.second};
        } else if constexpr (std::is_same_v<T, GateTransform>) {
          if (s.gate == Gate::CNot) return {s.first, s.second};
          return {s.first};
        } else if constexpr (std::is_same_v<T, SplitSet>) {
          return s.keep;
        } else {
          return s.operands;
        }
      },
      step);
}

inline void Program::validate() const {
  std::vector<int> seen(num_qubits, 0);
  for (const auto& set : initial_partition) {
    if (set.empty()) throw std::invalid_argument("initial partition contains an empty set");
    for (QubitId q : set) {
      if (q >= num_qubits) throw std::invalid_argument("initial partition names undeclared qubit " + std::to_string(q));
      if (seen[q]++) throw std::invalid_argument("qubit " + std::to_string(q) + " appears in two initial sets");
    }
  }
  for (std::size_t q = 0; q < num_qubits; ++q) {
    if (!seen[q]) throw std::invalid_argument("qubit " + std::to_string(q) + " missing from initial partition");
  }
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& step = steps[i];
    const std::string where = "step " + std::to_string(i) + ": ";
    for (QubitId q : referenced_qubits(step)) {
      if (q >= num_qubits) throw std::invalid_argument(where + "undeclared qubit " + std::to_string(q));
    }
    if (const auto* e = std::get_if<OneQubitEvent>(&step)) check_probability(e->probability, "event probability");
    if (const auto* e = std::get_if<TwoQubitEvent>(&step)) {
      check_probability(e->probability, "event probability");
      if (e->first == e->second) throw std::invalid_argument(where + "two-qubit event on one qubit");
    }
    if (const auto* g = std::get_if<GateTransform>(&step); g && g->gate == Gate::CNot && g->first == g->second) {
      throw std::invalid_argument(where + "CNot control equals target");
    }
    if (const auto* t = std::get_if<Task>(&step)) {
      const std::size_t arity = task_arity(t->kind);
      if (arity != 0 && t->operands.size() != arity) {
        throw std::invalid_argument(where + "task expects " + std::to_string(arity) + " operands");
      }
    }
  }
  for (const auto& obs : observables) {
    for (const auto& block : obs.blocks) {
      for (QubitId q : block) {
        if (q >= num_qubits) throw std::invalid_argument("observable names undeclared qubit " + std::to_string(q));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Line-oriented text format. Grammar (one record per line, `#` comments):
//
//   qfault-program 1
//   name <identifier>
//   qubits <count>
//   cycles <count>
//   set <q>...                          initial partition, one line per set
//   e1 <q> <f>                          one-qubit event
//   e2 <q1> <q2> <f>                    two-qubit event
//   h <q>                               Hadamard transform
//   cnot <control> <target>             CNot transform
//   merge <qa> <qb>
//   split <q>...
//   reset <q>...
//   verify <a0> ... <a6> <verifier>
//   syndrome <a0> ... <a6>
//   correct bitflip|phaseflip <d0> ... <d6> <s0> ... <s8>
//   measure <q>...
//   observable <name> <max_weight> <q,q,...> <q,q,...> ...
//
// Probabilities are written with 17 significant digits so that parsing the
// text reproduces the program exactly.
// ---------------------------------------------------------------------------

namespace detail {

inline void append_qubits(std::string& out, const std::vector<QubitId>& qs) {
  for (QubitId q : qs) {
    out += ' ';
    out += std::to_string(q);
  }
}

inline std::string format_probability(double p) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", p);
  return buf;
}

}  // namespace detail

inline std::string serialize(const Program& prog) {
  std::string out = "qfault-program 1\n";
  out += "name " + prog.name + "\n";
  out += "qubits " + std::to_string(prog.num_qubits) + "\n";
  out += "cycles " + std::to_string(prog.cycles) + "\n";
  for (const auto& set : prog.initial_partition) {
    out += "set";
    detail::append_qubits(out, set);
    out += '\n';
  }
  for (const auto& step : prog.steps) {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, OneQubitEvent>) {
            out += "e1 " + std::to_string(s.qubit) + " " + detail::format_probability(s.probability);
          } else if constexpr (std::is_same_v<T, TwoQubitEvent>) {
            out += "e2 " + std::to_string(s.first) + " " + std::to_string(s.second) + " " +
                   detail::format_probability(s.probability);
          } else if constexpr (std::is_same_v<T, GateTransform>) {
            if (s.gate == Gate::Hadamard) {
              out += "h " + std::to_string(s.first);
            } else {
              out += "cnot " + std::to_string(s.first) + " " + std::to_string(s.second);
            }
          } else if constexpr (std::is_same_v<T, MergeSets>) {
            out += "merge " + std::to_string(s.first) + " " + std::to_string(s.second);
          } else if constexpr (std::is_same_v<T, SplitSet>) {
            out += "split";
            detail::append_qubits(out, s.keep);
          } else {
            switch (s.kind) {
              case TaskKind::Reset: out += "reset"; break;
              case TaskKind::VerifyAncilla: out += "verify"; break;
              case TaskKind::MeasureSyndrome: out += "syndrome"; break;
              case TaskKind::Measure: out += "measure"; break;
              case TaskKind::Correct:
                out += s.phase == ErrorPhase::BitFlip ? "correct bitflip" : "correct phaseflip";
                break;
            }
            detail::append_qubits(out, s.operands);
          }
        },
        step);
    out += '\n';
  }
  for (const auto& obs : prog.observables) {
    out += "observable " + obs.name + " " + std::to_string(obs.max_block_weight);
    for (const auto& block : obs.blocks) {
      out += ' ';
      for (std::size_t i = 0; i < block.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(block[i]);
      }
    }
    out += '\n';
  }
  return out;
}

namespace detail {

class LineReader {
 public:
  LineReader(std::string_view line, std::size_t line_no) : line_no_(line_no) {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
      if (j > i) tokens_.push_back(line.substr(i, j - i));
      i = j;
    }
  }

  bool empty() const { return tokens_.empty(); }
  std::size_t remaining() const { return tokens_.size() - pos_; }

  std::string_view word() {
    if (pos_ >= tokens_.size()) fail("unexpected end of line");
    return tokens_[pos_++];
  }

  std::uint64_t integer() { return parse_integer(word()); }

  QubitId qubit() { return static_cast<QubitId>(integer()); }

  double real() {
    const std::string_view t = word();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) fail("bad number '" + std::string(t) + "'");
    return v;
  }

  std::vector<QubitId> rest_qubits() {
    std::vector<QubitId> qs;
    while (pos_ < tokens_.size()) qs.push_back(qubit());
    return qs;
  }

  std::uint64_t parse_integer(std::string_view t) const {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) fail("bad integer '" + std::string(t) + "'");
    return v;
  }

  void expect_end() const {
    if (pos_ != tokens_.size()) fail("trailing tokens");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::invalid_argument("program line " + std::to_string(line_no_) + ": " + msg);
  }

 private:
  std::vector<std::string_view> tokens_;
  std::size_t pos_ = 0;
  std::size_t line_no_;
};

}  // namespace detail

inline Program parse_program(std::string_view text) {
  Program prog;
  bool header = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    detail::LineReader in(line, line_no);
    if (in.empty()) continue;
    const std::string_view kw = in.word();
    if (!header) {
      if (kw != "qfault-program" || in.integer() != 1) in.fail("missing 'qfault-program 1' header");
      header = true;
    } else if (kw == "name") {
      prog.name = std::string(in.word());
    } else if (kw == "qubits") {
      prog.num_qubits = in.integer();
    } else if (kw == "cycles") {
      prog.cycles = in.integer();
    } else if (kw == "set") {
      prog.initial_partition.push_back(in.rest_qubits());
    } else if (kw == "e1") {
      const QubitId q = in.qubit();
      prog.steps.emplace_back(OneQubitEvent{q, in.real()});
    } else if (kw == "e2") {
      const QubitId a = in.qubit();
      const QubitId b = in.qubit();
      prog.steps.emplace_back(TwoQubitEvent{a, b, in.real()});
    } else if (kw == "h") {
      prog.steps.emplace_back(GateTransform{Gate::Hadamard, in.qubit()});
    } else if (kw == "cnot") {
      const QubitId c = in.qubit();
      prog.steps.emplace_back(GateTransform{Gate::CNot, c, in.qubit()});
    } else if (kw == "merge") {
      const QubitId a = in.qubit();
      prog.steps.emplace_back(MergeSets{a, in.qubit()});
    } else if (kw == "split") {
      prog.steps.emplace_back(SplitSet{in.rest_qubits()});
    } else if (kw == "reset") {
      prog.steps.emplace_back(Task{TaskKind::Reset, in.rest_qubits()});
    } else if (kw == "verify") {
      prog.steps.emplace_back(Task{TaskKind::VerifyAncilla, in.rest_qubits()});
    } else if (kw == "syndrome") {
      prog.steps.emplace_back(Task{TaskKind::MeasureSyndrome, in.rest_qubits()});
    } else if (kw == "measure") {
      prog.steps.emplace_back(Task{TaskKind::Measure, in.rest_qubits()});
    } else if (kw == "correct") {
      const std::string_view phase = in.word();
      ErrorPhase ph;
      if (phase == "bitflip") {
        ph = ErrorPhase::BitFlip;
      } else if (phase == "phaseflip") {
        ph = ErrorPhase::PhaseFlip;
      } else {
        in.fail("unknown correction phase '" + std::string(phase) + "'");
      }
      prog.steps.emplace_back(Task{TaskKind::Correct, in.rest_qubits(), ph});
    } else if (kw == "observable") {
      Observable obs;
      obs.name = std::string(in.word());
      obs.max_block_weight = in.integer();
      while (in.remaining() > 0) {
        std::vector<QubitId> block;
        std::string_view list = in.word();
        while (!list.empty()) {
          const auto comma = list.find(',');
          block.push_back(static_cast<QubitId>(in.parse_integer(list.substr(0, comma))));
          list = comma == std::string_view::npos ? std::string_view{} : list.substr(comma + 1);
        }
        obs.blocks.push_back(std::move(block));
      }
      prog.observables.push_back(std::move(obs));
    } else {
      in.fail("unknown keyword '" + std::string(kw) + "'");
    }
    in.expect_end();
  }
  if (!header) throw std::invalid_argument("empty program text");
  prog.validate();
  return prog;
}

namespace detail {

/// 64-bit FNV-1a of `text`, as 16 hex digits.
inline std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace detail

/// FNV-1a over the serialized program, as 16 hex digits.
inline std::string program_hash(const Program& prog) { return detail::fnv1a_hex(serialize(prog)); }

}  // namespace qfault
