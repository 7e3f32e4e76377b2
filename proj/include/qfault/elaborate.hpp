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
#include <unordered_set>
#include <variant>
#include <vector>

#include "qfault/program.hpp"

namespace qfault {

/// Tracks which qubits share a QubitSet while walking a program.
class PartitionTracker {
 public:
  explicit PartitionTracker(const Program& prog) : set_of_(prog.num_qubits, kNone) {
    for (const auto& members : prog.initial_partition) {
      for (QubitId q : members) set_of_.at(q) = sets_.size();
      sets_.push_back(members);
    }
    for (std::size_t q = 0; q < set_of_.size(); ++q) {
      if (set_of_[q] == kNone) throw std::invalid_argument("qubit " + std::to_string(q) + " has no QubitSet");
    }
  }

  std::size_t set_of(QubitId q) const { return set_of_.at(q); }
  bool same_set(QubitId a, QubitId b) const { return set_of(a) == set_of(b); }
  const std::vector<QubitId>& members(std::size_t set) const { return sets_.at(set); }

  void merge(QubitId a, QubitId b) {
    const std::size_t sa = set_of(a);
    const std::size_t sb = set_of(b);
    if (sa == sb) return;
    for (QubitId q : sets_[sb]) set_of_[q] = sa;
    sets_[sa].insert(sets_[sa].end(), sets_[sb].begin(), sets_[sb].end());
    sets_[sb].clear();
    widest_ = std::max(widest_, sets_[sa].size());
  }

  void split(const std::vector<QubitId>& keep) {
    if (keep.empty()) throw std::invalid_argument("split of an empty qubit list");
    const std::size_t s = set_of(keep.front());
    for (QubitId q : keep) {
      if (set_of(q) != s) throw std::invalid_argument("split operands span several QubitSets");
    }
    if (keep.size() == sets_[s].size()) return;
    std::unordered_set<QubitId> k(keep.begin(), keep.end());
    auto& old = sets_[s];
    old.erase(std::remove_if(old.begin(), old.end(), [&](QubitId q) { return k.count(q) != 0; }), old.end());
    for (QubitId q : keep) set_of_[q] = sets_.size();
    sets_.push_back(keep);
  }

  std::size_t widest() const {
    std::size_t w = widest_;
    for (const auto& s : sets_) w = std::max(w, s.size());
    return w;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> set_of_;
  std::vector<std::vector<QubitId>> sets_;
  std::size_t widest_ = 0;
};

/// Qubits whose error states stop mattering once the step has run.
inline std::vector<QubitId> released_qubits(const ProgramStep& step, const std::unordered_set<QubitId>& observed) {
  const auto* task = std::get_if<Task>(&step);
  if (task == nullptr) return {};
  switch (task->kind) {
    case TaskKind::VerifyAncilla:
      return {task->operands.back()};
    case TaskKind::MeasureSyndrome:
      return {task->operands.begin() + 3, task->operands.end()};
    case TaskKind::Correct:
      return {task->operands.begin() + 7, task->operands.end()};
    case TaskKind::Reset:
    case TaskKind::Measure: {
      std::vector<QubitId> out;
      for (QubitId q : task->operands) {
        if (!observed.count(q)) out.push_back(q);
      }
      return out;
    }
    default:
      return {};
  }
}

/// Inserts the set management a program needs: a MergeSets ahead of any step
/// whose operands live in different QubitSets, and a SplitSet after each
/// measuring task for the qubits it releases, and trailing MergeSets that
/// gather each observable block into one set. Existing merges and splits are
/// kept. Elaborating an elaborated program returns it unchanged.
inline Program elaborate(const Program& prog) {
  prog.validate();
  std::unordered_set<QubitId> observed;
  for (const auto& obs : prog.observables) {
    for (const auto& block : obs.blocks) observed.insert(block.begin(), block.end());
  }

  PartitionTracker parts(prog);
  Program out = prog;
  out.steps.clear();
  out.steps.reserve(prog.steps.size() * 11 / 10);
  std::vector<QubitId> pending;

  auto flush = [&]() {
    if (pending.empty()) return;
    std::vector<std::size_t> order;
    for (QubitId q : pending) {
      const std::size_t s = parts.set_of(q);
      if (std::find(order.begin(), order.end(), s) == order.end()) order.push_back(s);
    }
    for (std::size_t s : order) {
      std::vector<QubitId> keep;
      for (QubitId q : parts.members(s)) {
        if (std::find(pending.begin(), pending.end(), q) != pending.end()) keep.push_back(q);
      }
      if (keep.size() < parts.members(s).size()) {
        parts.split(keep);
        out.steps.emplace_back(SplitSet{keep});
      }
    }
    pending.clear();
  };

  for (const auto& step : prog.steps) {
    if (const auto* split = std::get_if<SplitSet>(&step)) {
      parts.split(split->keep);
      out.steps.push_back(step);
      continue;
    }
    flush();
    if (const auto* merge = std::get_if<MergeSets>(&step)) {
      parts.merge(merge->first, merge->second);
      out.steps.push_back(step);
      continue;
    }
    const auto operands = co_resident_operands(step);
    for (std::size_t i = 1; i < operands.size(); ++i) {
      if (!parts.same_set(operands[0], operands[i])) {
        parts.merge(operands[0], operands[i]);
        out.steps.emplace_back(MergeSets{operands[0], operands[i]});
      }
    }
    out.steps.push_back(step);
    const auto released = released_qubits(step, observed);
    pending.insert(pending.end(), released.begin(), released.end());
  }
  flush();
  // Each observable block is classified as a whole, so it must end in one set.
  for (const auto& obs : prog.observables) {
    for (const auto& block : obs.blocks) {
      for (std::size_t i = 1; i < block.size(); ++i) {
        if (!parts.same_set(block[0], block[i])) {
          parts.merge(block[0], block[i]);
          out.steps.emplace_back(MergeSets{block[0], block[i]});
        }
      }
    }
  }
  return out;
}

/// Widest QubitSet reached while executing the program as written.
inline std::size_t max_set_width(const Program& prog) {
  PartitionTracker parts(prog);
  for (const auto& step : prog.steps) {
    if (const auto* m = std::get_if<MergeSets>(&step)) parts.merge(m->first, m->second);
    if (const auto* s = std::get_if<SplitSet>(&step)) parts.split(s->keep);
  }
  return parts.widest();
}

}  // namespace qfault
