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
#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "qfault/pauli.hpp"

namespace qfault {

using QubitId = std::uint32_t;

enum class MergeMode : std::uint8_t { Preservation, Lossy };

inline std::string_view to_string(MergeMode mode) {
  return mode == MergeMode::Preservation ? "preservation" : "lossy";
}

inline MergeMode parse_merge_mode(std::string_view text) {
  if (text == "preservation" || text == "P") return MergeMode::Preservation;
  if (text == "lossy" || text == "L") return MergeMode::Lossy;
  throw std::invalid_argument("unknown merge mode '" + std::string(text) + "'");
}

/// Pruning parameters. A threshold of 0 disables the corresponding pruning.
/// Thrown when an error map outgrows an entry limit.
class ResourceLimitExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Thresholds {
  double event_branch = 0.0;
  double merge = 0.0;
  MergeMode merge_mode = MergeMode::Preservation;

  void validate() const {
    auto check = [](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument(std::string(name) + " threshold must lie in [0, 1]");
      }
    };
    check(event_branch, "event branch");
    check(merge, "merge");
  }
};

inline void check_probability(double f, const char* what) {
  if (!(f >= 0.0 && f <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [0, 1], got " + std::to_string(f));
  }
}

/// One level of the probability tree for a group of qubits: error states
/// (Pauli strings of a fixed width) mapped to their probabilities. Entries
/// with zero probability are never stored.
template <std::size_t W = 1>
class ErrorMap {
 public:
  using Key = PauliString<W>;
  using Table = absl::flat_hash_map<Key, double, PauliHash<W>>;

  ErrorMap() = default;
  explicit ErrorMap(std::size_t width) : width_(width) {
    if (width > Key::kCapacity) {
      throw std::length_error("error map width " + std::to_string(width) + " exceeds capacity " +
                              std::to_string(Key::kCapacity));
    }
  }

  static ErrorMap error_free(std::size_t width) {
    ErrorMap m(width);
    m.add(Key(width), 1.0);
    return m;
  }

  std::size_t width() const { return width_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  void reserve(std::size_t n) { entries_.reserve(n); }

  void add(const Key& key, double p) {
    assert(key.size() == width_);
    if (p == 0.0) return;
    entries_[key] += p;
  }

  double probability(const Key& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0.0 : it->second;
  }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  /// Sums in ascending order of probability, so the result does not depend
  /// on the table's iteration order.
  double total_probability() const {
    return sum_matching([](const Key&) { return true; });
  }

  /// Multiplies every probability by `factor` > 0.
  void scale(double factor) {
    if (!(factor > 0.0)) throw std::invalid_argument("scale factor must be positive");
    for (auto& [key, p] : entries_) p *= factor;
  }

  template <typename Pred>
  double sum_matching(Pred&& pred) const {
    std::vector<double> values;
    values.reserve(entries_.size());
    for (const auto& [key, p] : entries_) {
      if (pred(key)) values.push_back(p);
    }
    std::sort(values.begin(), values.end());
    double total = 0.0;
    for (double p : values) total += p;
    return total;
  }

  /// One `<string>\t<probability>` line per entry, sorted by string.
  std::string dump() const {
    std::vector<std::pair<std::string, double>> rows;
    rows.reserve(entries_.size());
    for (const auto& [key, p] : entries_) rows.emplace_back(key.str(), p);
    std::sort(rows.begin(), rows.end());
    std::string out;
    char buf[64];
    for (const auto& [s, p] : rows) {
      std::snprintf(buf, sizeof(buf), "\t%.16e\n", p);
      out += s;
      out += buf;
    }
    return out;
  }

  Table& table() { return entries_; }
  const Table& table() const { return entries_; }

 private:
  Table entries_;
  std::size_t width_ = 0;
};

/// A group of physical qubits whose joint error distribution is tracked
/// together. `members[i]` is the qubit stored at key position i.
template <std::size_t W = 1>
struct QubitSet {
  std::vector<QubitId> members;
  ErrorMap<W> map;

  static QubitSet error_free(std::vector<QubitId> qubits) {
    QubitSet qs;
    qs.map = ErrorMap<W>::error_free(qubits.size());
    qs.members = std::move(qubits);
    return qs;
  }

  std::size_t width() const { return members.size(); }

  std::size_t local_index(QubitId q) const {
    auto it = std::find(members.begin(), members.end(), q);
    if (it == members.end()) {
      throw std::out_of_range("qubit " + std::to_string(q) + " is not a member of this QubitSet");
    }
    return static_cast<std::size_t>(it - members.begin());
  }
};

// ---------------------------------------------------------------------------
// In-place evolution of an error map.
// ---------------------------------------------------------------------------

namespace detail {

template <std::size_t W>
using Entries = std::vector<std::pair<PauliString<W>, double>>;

// The hash table's iteration order varies between runs (its probe sequence is
// salted by the table's address). Every loop whose floating-point result
// depends on visiting order therefore walks the entries sorted by key.

inline void check_entry_limit(std::size_t size, std::size_t max_entries) {
  if (max_entries != 0 && size > max_entries) {
    throw ResourceLimitExceeded("error map grew to " + std::to_string(size) + " entries, above the limit of " +
                                std::to_string(max_entries));
  }
}

template <std::size_t W>
bool key_less(const PauliString<W>& a, const PauliString<W>& b) {
  if (a.x_words() != b.x_words()) return a.x_words() < b.x_words();
  return a.z_words() < b.z_words();
}

template <std::size_t W>
void sort_by_key(Entries<W>& entries) {
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return key_less(a.first, b.first); });
}

template <std::size_t W>
Entries<W> sorted_entries(const ErrorMap<W>& map) {
  Entries<W> out(map.begin(), map.end());
  sort_by_key(out);
  return out;
}

template <std::size_t W>
Entries<W> branching_entries(const ErrorMap<W>& map, double event_threshold) {
  Entries<W> out;
  for (const auto& [key, p] : map) {
    if (p >= event_threshold) out.emplace_back(key, p);
  }
  sort_by_key(out);
  return out;
}

/// Branching entries drawn from `hint`, a duplicate-free superset of the
/// keys at or above the threshold.
template <std::size_t W>
Entries<W> branching_entries(const ErrorMap<W>& map, double event_threshold,
                             const std::vector<PauliString<W>>& hint) {
  Entries<W> out;
  const auto& table = map.table();
  for (const auto& key : hint) {
    auto it = table.find(key);
    if (it != table.end() && it->second >= event_threshold) out.emplace_back(key, it->second);
  }
  return out;
}

/// Moves p*f out of every entry, split evenly over the children produced by
/// `children(key, emit)`. Parents are scaled to p(1-f) before any share
/// lands, so every update after that adds non-negative terms and nothing
/// cancels. If `hint` is given it receives the keys at or above the threshold
/// afterwards: surviving parents plus children that crossed it. Throws
/// ResourceLimitExceeded as soon as the map outgrows a nonzero `max_entries`.
template <std::size_t W, typename Children>
void branch(ErrorMap<W>& map, const Entries<W>& entries, double f, double fanout, Children&& children,
            double event_threshold, std::vector<PauliString<W>>* hint, std::size_t max_entries) {
  auto& table = map.table();
  if (hint) hint->clear();
  for (const auto& [key, p] : entries) {
    const double kept = p * (1.0 - f);
    if (kept > 0.0) {
      table.find(key)->second = kept;
      if (hint && kept >= event_threshold) hint->push_back(key);
    } else {
      table.erase(key);
    }
  }
  for (const auto& [key, p] : entries) {
    const double share = p * f / fanout;
    if (!(share > 0.0)) continue;
    children(key, [&](const PauliString<W>& child) {
      auto [it, inserted] = table.try_emplace(child, 0.0);
      const bool below = inserted || it->second < event_threshold;
      it->second += share;
      if (hint && below && it->second >= event_threshold) hint->push_back(child);
    });
    check_entry_limit(table.size(), max_entries);
  }
  if (hint) std::sort(hint->begin(), hint->end(), key_less<W>);
}

template <std::size_t W>
auto one_qubit_children(std::size_t q) {
  return [q](const PauliString<W>& key, auto&& emit) {
    for (Pauli e : kErrorLabels) {
      PauliString<W> child = key;
      child.compose_at(q, e);
      emit(child);
    }
  };
}

template <std::size_t W>
auto two_qubit_children(std::size_t q1, std::size_t q2) {
  return [q1, q2](const PauliString<W>& key, auto&& emit) {
    for (std::uint8_t code = 1; code < 16; ++code) {
      PauliString<W> child = key;
      child.compose_at(q1, static_cast<Pauli>(code & 3U));
      child.compose_at(q2, static_cast<Pauli>(code >> 2));
      emit(child);
    }
  };
}

inline void check_two_qubit_event(std::size_t q1, std::size_t q2, std::size_t width, double f) {
  check_index(q1, width);
  check_index(q2, width);
  if (q1 == q2) throw std::invalid_argument("two-qubit event needs two distinct qubits");
  check_probability(f, "event probability");
}

}  // namespace detail

/// Keys at or above the branch threshold: the seed for the hinted event
/// overloads below.
template <std::size_t W>
std::vector<PauliString<W>> branch_hint(const ErrorMap<W>& map, double event_threshold) {
  std::vector<PauliString<W>> hint;
  for (const auto& [key, p] : map) {
    if (p >= event_threshold) hint.push_back(key);
  }
  std::sort(hint.begin(), hint.end(), detail::key_less<W>);
  return hint;
}

/// Stochastic one-qubit event: every entry with probability p at or above the
/// branch threshold keeps p(1-f) and spawns X, Y and Z at position q with
/// p*f/3 each. Entries below the threshold pass through untouched.
template <std::size_t W>
void apply_one_qubit_event(ErrorMap<W>& map, std::size_t q, double f, double event_threshold) {
  detail::check_index(q, map.width());
  check_probability(f, "event probability");
  if (f == 0.0) return;
  detail::branch(map, detail::branching_entries(map, event_threshold), f, 3.0, detail::one_qubit_children<W>(q),
                 event_threshold, static_cast<std::vector<PauliString<W>>*>(nullptr), 0);
}

/// As above, but reads the branching candidates from `hint` instead of
/// scanning the map, then leaves in `hint` the keys at or above the
/// threshold afterwards. Only events change which entries clear the
/// threshold, so a hint stays valid across consecutive events. A nonzero
/// `max_entries` aborts with ResourceLimitExceeded once the map outgrows it.
template <std::size_t W>
void apply_one_qubit_event(ErrorMap<W>& map, std::size_t q, double f, double event_threshold,
                           std::vector<PauliString<W>>& hint, std::size_t max_entries = 0) {
  detail::check_index(q, map.width());
  check_probability(f, "event probability");
  if (f == 0.0) return;
  detail::branch(map, detail::branching_entries(map, event_threshold, hint), f, 3.0,
                 detail::one_qubit_children<W>(q), event_threshold, &hint, max_entries);
}

/// Stochastic two-qubit event: as the one-qubit event but with the 15
/// non-identity two-qubit labels, each with p*f/15.
template <std::size_t W>
void apply_two_qubit_event(ErrorMap<W>& map, std::size_t q1, std::size_t q2, double f,
                           double event_threshold) {
  detail::check_two_qubit_event(q1, q2, map.width(), f);
  if (f == 0.0) return;
  detail::branch(map, detail::branching_entries(map, event_threshold), f, 15.0,
                 detail::two_qubit_children<W>(q1, q2), event_threshold, static_cast<std::vector<PauliString<W>>*>(nullptr), 0);
}

template <std::size_t W>
void apply_two_qubit_event(ErrorMap<W>& map, std::size_t q1, std::size_t q2, double f, double event_threshold,
                           std::vector<PauliString<W>>& hint, std::size_t max_entries = 0) {
  detail::check_two_qubit_event(q1, q2, map.width(), f);
  if (f == 0.0) return;
  detail::branch(map, detail::branching_entries(map, event_threshold, hint), f, 15.0,
                 detail::two_qubit_children<W>(q1, q2), event_threshold, &hint, max_entries);
}

/// Rewrites every key through a bijection `fn` that changes only the keys
/// for which `moves` holds.
template <std::size_t W, typename Moves, typename Fn>
void rekey_bijective(ErrorMap<W>& map, Moves&& moves, Fn&& fn) {
  auto& table = map.table();
  std::vector<std::pair<PauliString<W>, double>> moved;
  for (const auto& [key, p] : table) {
    if (moves(key)) moved.emplace_back(key, p);
  }
  for (const auto& entry : moved) table.erase(entry.first);
  for (auto& [key, p] : moved) {
    fn(key);
    table[key] += p;
  }
}

template <std::size_t W>
void apply_hadamard(ErrorMap<W>& map, std::size_t q) {
  detail::check_index(q, map.width());
  rekey_bijective(
      map, [q](const PauliString<W>& s) { return s.x(q) != s.z(q); },
      [q](PauliString<W>& s) { s.hadamard(q); });
}

template <std::size_t W>
void apply_cnot(ErrorMap<W>& map, std::size_t control, std::size_t target) {
  detail::check_index(control, map.width());
  detail::check_index(target, map.width());
  if (control == target) throw std::invalid_argument("CNOT control and target must differ");
  rekey_bijective(
      map, [=](const PauliString<W>& s) { return s.x(control) || s.z(target); },
      [=](PauliString<W>& s) { s.cnot(control, target); });
}

/// Rebuilds the map through an arbitrary key transform; keys that collide
/// accumulate their probabilities.
template <std::size_t W, typename Fn>
void transform_keys(ErrorMap<W>& map, Fn&& fn) {
  ErrorMap<W> next(map.width());
  next.reserve(map.size());
  for (const auto& [key, p] : detail::sorted_entries(map)) {
    PauliString<W> k = key;
    fn(k);
    next.add(k, p);
  }
  map = std::move(next);
}

// ---------------------------------------------------------------------------
// QubitSet-level operations.
// ---------------------------------------------------------------------------

template <std::size_t W>
QubitSet<W> apply_one_qubit_event(QubitSet<W> qs, std::size_t q, double f, const Thresholds& th) {
  apply_one_qubit_event(qs.map, q, f, th.event_branch);
  return qs;
}

template <std::size_t W>
QubitSet<W> apply_two_qubit_event(QubitSet<W> qs, std::size_t q1, std::size_t q2, double f,
                                  const Thresholds& th) {
  apply_two_qubit_event(qs.map, q1, q2, f, th.event_branch);
  return qs;
}

template <std::size_t W>
double total_probability(const QubitSet<W>& qs) {
  return qs.map.total_probability();
}

template <std::size_t W, typename Pred>
double sum_matching(const QubitSet<W>& qs, Pred&& pred) {
  return qs.map.sum_matching(std::forward<Pred>(pred));
}

template <std::size_t W>
struct MergeOutcome {
  QubitSet<W> merged;
  /// Probability mass dropped by a lossy merge; always 0 for preservation.
  double discarded = 0.0;
};

/// Cross product of two disjoint QubitSets. Products at or above the merge
/// threshold are kept as-is. Below it, preservation mode clears the less
/// probable input state (the one from `b` on an exact tie) and lossy mode
/// drops the product.
///
/// Runs in O(emitted + (|a| + |b|) log(|a| + |b|)): both inputs are sorted by
/// probability so each below-threshold family is summed through suffix sums
/// rather than enumerated pair by pair. A nonzero `max_entries` aborts with
/// ResourceLimitExceeded once the product outgrows it.
template <std::size_t W>
MergeOutcome<W> merge_with_accounting(const QubitSet<W>& a, const QubitSet<W>& b,
                                      const Thresholds& th, std::size_t max_entries = 0) {
  th.validate();
  for (QubitId q : a.members) {
    if (std::find(b.members.begin(), b.members.end(), q) != b.members.end()) {
      throw std::invalid_argument("cannot merge overlapping QubitSets (qubit " + std::to_string(q) +
                                  ")");
    }
  }
  using Key = PauliString<W>;
  struct Entry {
    Key key;
    double p;
  };
  auto sorted_entries = [](const ErrorMap<W>& m) {
    std::vector<Entry> v;
    v.reserve(m.size());
    for (const auto& [key, p] : m) v.push_back({key, p});
    std::sort(v.begin(), v.end(), [](const Entry& x, const Entry& y) {
      if (x.p != y.p) return x.p > y.p;
      if (x.key.x_words() != y.key.x_words()) return x.key.x_words() < y.key.x_words();
      return x.key.z_words() < y.key.z_words();
    });
    return v;
  };
  auto suffix_sums = [](const std::vector<Entry>& v) {
    std::vector<double> s(v.size() + 1, 0.0);
    for (std::size_t i = v.size(); i-- > 0;) s[i] = s[i + 1] + v[i].p;
    return s;
  };

  const std::vector<Entry> av = sorted_entries(a.map);
  const std::vector<Entry> bv = sorted_entries(b.map);
  const std::vector<double> a_tail = suffix_sums(av);
  const std::vector<double> b_tail = suffix_sums(bv);
  const double threshold = th.merge;
  const bool preserve = th.merge_mode == MergeMode::Preservation;

  MergeOutcome<W> out;
  out.merged.members = a.members;
  out.merged.members.insert(out.merged.members.end(), b.members.begin(), b.members.end());
  out.merged.map = ErrorMap<W>(out.merged.members.size());
  ErrorMap<W>& merged = out.merged.map;
  const Key a_clear(a.width());
  const Key b_clear(b.width());

  for (const Entry& ea : av) {
    std::size_t k = 0;
    for (; k < bv.size(); ++k) {
      const double p = ea.p * bv[k].p;
      if (p < threshold) break;
      merged.add(Key::concat(ea.key, bv[k].key), p);
    }
    detail::check_entry_limit(merged.size(), max_entries);
    if (k == bv.size()) continue;
    if (!preserve) {
      out.discarded += ea.p * b_tail[k];
      continue;
    }
    // Below-threshold partners no more probable than ea: clear the b side.
    auto first_le = std::partition_point(bv.begin() + static_cast<std::ptrdiff_t>(k), bv.end(),
                                         [&](const Entry& e) { return e.p > ea.p; });
    const std::size_t j = static_cast<std::size_t>(first_le - bv.begin());
    merged.add(Key::concat(ea.key, b_clear), ea.p * b_tail[j]);
  }

  if (preserve) {
    // Below-threshold partners strictly less probable than eb: clear the a side.
    for (const Entry& eb : bv) {
      auto first = std::partition_point(av.begin(), av.end(), [&](const Entry& e) {
        return !(e.p * eb.p < threshold && e.p < eb.p);
      });
      const std::size_t i = static_cast<std::size_t>(first - av.begin());
      merged.add(Key::concat(a_clear, eb.key), eb.p * a_tail[i]);
    }
    detail::check_entry_limit(merged.size(), max_entries);
  }
  return out;
}

template <std::size_t W>
QubitSet<W> merge(const QubitSet<W>& a, const QubitSet<W>& b, const Thresholds& th) {
  return merge_with_accounting(a, b, th).merged;
}

/// Partitions a QubitSet into (keep, complement); each side receives the
/// marginal distribution of its positions. Joint correlations are lost.
template <std::size_t W>
std::pair<QubitSet<W>, QubitSet<W>> split(const QubitSet<W>& qs, std::span<const std::size_t> keep) {
  const std::size_t width = qs.width();
  if (keep.empty() || keep.size() >= width) {
    throw std::invalid_argument("split needs a non-empty proper subset of the QubitSet");
  }
  std::vector<bool> kept(width, false);
  for (std::size_t q : keep) {
    detail::check_index(q, width);
    if (kept[q]) throw std::invalid_argument("duplicate index in split keep set");
    kept[q] = true;
  }
  std::vector<std::size_t> rest;
  for (std::size_t q = 0; q < width; ++q) {
    if (!kept[q]) rest.push_back(q);
  }
  std::pair<QubitSet<W>, QubitSet<W>> out;
  for (std::size_t q : keep) out.first.members.push_back(qs.members[q]);
  for (std::size_t q : rest) out.second.members.push_back(qs.members[q]);
  out.first.map = ErrorMap<W>(keep.size());
  out.second.map = ErrorMap<W>(rest.size());
  for (const auto& [key, p] : detail::sorted_entries(qs.map)) {
    out.first.map.add(key.project(keep), p);
    out.second.map.add(key.project(rest), p);
  }
  return out;
}

}  // namespace qfault
