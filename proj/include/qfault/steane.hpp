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

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qfault/pauli.hpp"
#include "qfault/program.hpp"
#include "qfault/schedule.hpp"

namespace qfault::steane {

inline constexpr std::size_t kBlockSize = 7;
inline constexpr std::size_t kSyndromeBits = 3;
inline constexpr std::size_t kExtractions = 3;

/// Parity-check matrix of the [7,4] Hamming code. Column j reads as the
/// binary number j + 1 (row 0 is the most significant bit), so a single
/// flip at position j produces syndrome j + 1.
inline constexpr std::array<std::array<std::uint8_t, kBlockSize>, kSyndromeBits> kCheckMatrix{{
    {0, 0, 0, 1, 1, 1, 1},
    {0, 1, 1, 0, 0, 1, 1},
    {1, 0, 1, 0, 1, 0, 1},
}};

/// 7-bit mask (bit j = position j) to its 3-bit syndrome.
constexpr std::uint8_t syndrome_of(std::uint8_t mask) {
  std::uint8_t s = 0;
  for (std::size_t r = 0; r < kSyndromeBits; ++r) {
    std::uint8_t parity = 0;
    for (std::size_t j = 0; j < kBlockSize; ++j) parity ^= static_cast<std::uint8_t>(kCheckMatrix[r][j] & (mask >> j));
    s = static_cast<std::uint8_t>((s << 1) | (parity & 1U));
  }
  return s;
}

/// Position flagged by a nonzero syndrome.
constexpr std::optional<std::size_t> decode_position(std::uint8_t syndrome) {
  if (syndrome == 0 || syndrome > 7) return std::nullopt;
  return static_cast<std::size_t>(syndrome - 1);
}

/// Syndrome-to-position table, one row per 3-bit syndrome.
inline std::string decode_table_text() {
  std::string out = "syndrome\tposition\n";
  for (std::uint8_t s = 0; s < 8; ++s) {
    for (int b = 2; b >= 0; --b) out += ((s >> b) & 1U) ? '1' : '0';
    out += '\t';
    const auto pos = decode_position(s);
    out += pos ? std::to_string(*pos) : std::string("-");
    out += '\n';
  }
  return out;
}

/// Row supports of the check matrix; they generate the X-type (and,
/// identically, the Z-type) stabilizers of the Steane code.
inline constexpr std::array<std::uint8_t, 3> kStabilizerRows{0x78, 0x66, 0x55};

namespace detail {

constexpr std::array<std::uint8_t, 128> make_canonical_table() {
  std::array<std::uint8_t, 8> group{};
  for (std::size_t g = 0; g < 8; ++g) {
    std::uint8_t m = 0;
    for (std::size_t r = 0; r < 3; ++r) {
      if ((g >> r) & 1U) m ^= kStabilizerRows[r];
    }
    group[g] = m;
  }
  std::array<std::uint8_t, 128> table{};
  for (std::size_t e = 0; e < 128; ++e) {
    std::uint8_t best = static_cast<std::uint8_t>(e);
    for (std::uint8_t g : group) {
      const auto cand = static_cast<std::uint8_t>(e ^ g);
      const int wc = std::popcount(cand);
      const int wb = std::popcount(best);
      if (wc < wb || (wc == wb && cand < best)) best = cand;
    }
    table[e] = best;
  }
  return table;
}

}  // namespace detail

/// Minimum-weight representative of a 7-bit error pattern modulo the
/// stabilizer rows (ties go to the smaller mask).
inline constexpr std::array<std::uint8_t, 128> kCanonicalRepresentative = detail::make_canonical_table();

/// Majority vote over three syndromes; nullopt when all three differ.
constexpr std::optional<std::uint8_t> majority(std::uint8_t s0, std::uint8_t s1, std::uint8_t s2) {
  if (s0 == s1 || s0 == s2) return s0;
  if (s1 == s2) return s1;
  return std::nullopt;
}

// Logical |0> encoder: Hadamards on the pivot positions, then CNots from
// each pivot to the rest of its check-matrix row. The CNot order is fixed so
// that every single fault yielding an X pattern of weight >= 2 (modulo
// stabilizers) has odd overlap with kVerifySupport and is caught by the
// verification qubit.
inline constexpr std::array<std::size_t, 3> kEncoderPivots{0, 1, 3};
inline constexpr std::array<std::pair<std::size_t, std::size_t>, 9> kEncoderCnots{{
    {0, 2}, {3, 4},          // layer 1
    {1, 2}, {0, 4}, {3, 6},  // layer 2
    {1, 5}, {0, 6},          // layer 3
    {1, 6}, {3, 5},          // layer 4
}};
inline constexpr std::array<std::size_t, 5> kEncoderLayerStarts{0, 2, 5, 7, 9};
/// Support of the weight-3 logical operator checked during verification.
inline constexpr std::array<std::size_t, 3> kVerifySupport{2, 3, 6};

enum class AncillaBasis : std::uint8_t {
  ZType,  // logical |0>, used by the phase-flip phase
  XType,  // logical |+>, used by the bit-flip phase
};

constexpr AncillaBasis ancilla_basis_for(ErrorPhase phase) {
  return phase == ErrorPhase::BitFlip ? AncillaBasis::XType : AncillaBasis::ZType;
}

// ---------------------------------------------------------------------------
// Error-state rewrites performed by the recovery tasks. Positions index the
// Pauli string being rewritten (local QubitSet positions in the analytical
// engine, global qubit ids in the Monte Carlo engine).
// ---------------------------------------------------------------------------

template <std::size_t W>
std::uint8_t x_mask(const PauliString<W>& s, std::span<const std::size_t> pos) {
  std::uint8_t m = 0;
  for (std::size_t j = 0; j < pos.size(); ++j) m |= static_cast<std::uint8_t>(s.x(pos[j]) << j);
  return m;
}

template <std::size_t W>
std::uint8_t z_mask(const PauliString<W>& s, std::span<const std::size_t> pos) {
  std::uint8_t m = 0;
  for (std::size_t j = 0; j < pos.size(); ++j) m |= static_cast<std::uint8_t>(s.z(pos[j]) << j);
  return m;
}

template <std::size_t W>
void write_masks(PauliString<W>& s, std::span<const std::size_t> pos, std::uint8_t xm, std::uint8_t zm) {
  for (std::size_t j = 0; j < pos.size(); ++j) s.set(pos[j], make_pauli((xm >> j) & 1U, (zm >> j) & 1U));
}

template <std::size_t W>
void reset_transform(PauliString<W>& s, std::span<const std::size_t> pos) {
  for (std::size_t q : pos) s.clear(q);
}

/// pos = 7 ancilla positions then the verifier. A verifier carrying an X
/// component reads as a failed verification; the block is then replaced by a
/// fresh, error-free one. The measured verifier is cleared either way.
template <std::size_t W>
void verify_transform(PauliString<W>& s, std::span<const std::size_t> pos) {
  const std::size_t verifier = pos[kBlockSize];
  if (s.x(verifier)) reset_transform(s, pos.first(kBlockSize));
  s.clear(verifier);
}

/// Measures the 7 ancilla qubits: stores H * (X components) in the first
/// three ancilla positions (X = 1, I = 0, most significant bit first) and
/// clears the other four.
template <std::size_t W>
void syndrome_transform(PauliString<W>& s, std::span<const std::size_t> anc) {
  const std::uint8_t syn = syndrome_of(x_mask(s, anc));
  for (std::size_t b = 0; b < kSyndromeBits; ++b) {
    s.set(anc[b], ((syn >> (kSyndromeBits - 1 - b)) & 1U) ? Pauli::X : Pauli::I);
  }
  for (std::size_t j = kSyndromeBits; j < kBlockSize; ++j) s.clear(anc[j]);
}

template <std::size_t W>
std::uint8_t stored_syndrome(const PauliString<W>& s, std::span<const std::size_t> slot) {
  std::uint8_t syn = 0;
  for (std::size_t b = 0; b < kSyndromeBits; ++b) syn = static_cast<std::uint8_t>((syn << 1) | s.x(slot[b]));
  return syn;
}

/// pos = 7 data positions then 3 x 3 syndrome positions. Applies the
/// majority-decoded correction, reduces both error components of the block
/// to their minimum-weight representatives and clears the syndrome slots.
template <std::size_t W>
void correct_transform(PauliString<W>& s, ErrorPhase phase, std::span<const std::size_t> pos) {
  const auto data = pos.first(kBlockSize);
  const auto syn = pos.subspan(kBlockSize, kExtractions * kSyndromeBits);
  const auto vote = majority(stored_syndrome(s, syn.subspan(0, 3)), stored_syndrome(s, syn.subspan(3, 3)),
                             stored_syndrome(s, syn.subspan(6, 3)));
  if (vote) {
    if (const auto q = decode_position(*vote)) {
      if (phase == ErrorPhase::BitFlip) {
        s.flip_x(data[*q]);
      } else {
        s.flip_z(data[*q]);
      }
    }
  }
  write_masks(s, data, kCanonicalRepresentative[x_mask(s, data)], kCanonicalRepresentative[z_mask(s, data)]);
  reset_transform(s, syn);
}

enum class Outcome : std::uint8_t { Survive, Crash };

/// Crash iff some block has errors on more than `max_weight` qubits.
template <std::size_t W>
Outcome classify_crash(const PauliString<W>& s, std::span<const std::vector<std::size_t>> blocks,
                       std::size_t max_weight = 1) {
  for (const auto& block : blocks) {
    std::size_t w = 0;
    for (std::size_t q : block) w += (s.x(q) || s.z(q)) ? 1 : 0;
    if (w > max_weight) return Outcome::Crash;
  }
  return Outcome::Survive;
}

/// Single-block form: the whole string is one 7-qubit block per 7 positions.
template <std::size_t W>
Outcome classify_crash(const PauliString<W>& s) {
  std::vector<std::vector<std::size_t>> blocks;
  for (std::size_t start = 0; start + kBlockSize <= s.size(); start += kBlockSize) {
    std::vector<std::size_t> b(kBlockSize);
    for (std::size_t j = 0; j < kBlockSize; ++j) b[j] = start + j;
    blocks.push_back(std::move(b));
  }
  return classify_crash(s, std::span<const std::vector<std::size_t>>(blocks));
}

enum class Code : std::uint8_t { Steane713, Golay2135 };

/// Number of Pauli patterns on n qubits with weight <= t.
constexpr std::uint64_t count_nonfailing_states(std::uint64_t n, std::uint64_t t) {
  std::uint64_t total = 0;
  std::uint64_t binom = 1;  // C(n, w)
  std::uint64_t pow3 = 1;
  for (std::uint64_t w = 0; w <= t && w <= n; ++w) {
    total += binom * pow3;
    binom = binom * (n - w) / (w + 1);
    pow3 *= 3;
  }
  return total;
}

constexpr std::uint64_t count_nonfailing_states(Code code) {
  return code == Code::Steane713 ? count_nonfailing_states(7, 1) : count_nonfailing_states(21, 2);
}

// ---------------------------------------------------------------------------
// Recovery circuits as step emitters.
// ---------------------------------------------------------------------------

using Block = std::array<QubitId, kBlockSize>;

/// Qubits one data block needs for a recovery: three ancilla blocks (reused
/// across the two phases) and one verifier per ancilla block.
struct RecoveryResources {
  Block data;
  std::array<Block, kExtractions> ancilla;
  std::array<QubitId, kExtractions> verifier;
};

struct RecoveryOptions {
  /// Distance each ancilla travels to meet its data block; 0 disables
  /// transport events.
  double transport_distance_um = 0.0;
};

inline RecoveryResources allocate_recovery(CycleBuilder& b, const Block& data) {
  RecoveryResources r;
  r.data = data;
  for (std::size_t k = 0; k < kExtractions; ++k) {
    const auto qs = b.allocate(kBlockSize);
    std::copy(qs.begin(), qs.end(), r.ancilla[k].begin());
    b.add_initial_set(qs);
  }
  for (std::size_t k = 0; k < kExtractions; ++k) {
    r.verifier[k] = b.allocate();
    b.add_initial_set({r.verifier[k]});
  }
  return r;
}

/// Resets the blocks and runs the encoder; XType blocks finish with a
/// transversal Hadamard. All listed blocks are prepared in parallel.
inline void task_prepare_ancilla(CycleBuilder& b, std::span<const Block> blocks, AncillaBasis basis) {
  for (const Block& blk : blocks) {
    b.activate(blk);
    for (QubitId q : blk) b.reset(q);
  }
  b.end_cycle();
  for (const Block& blk : blocks) {
    for (std::size_t p : kEncoderPivots) b.hadamard(blk[p]);
  }
  b.end_cycle();
  for (std::size_t layer = 0; layer + 1 < kEncoderLayerStarts.size(); ++layer) {
    for (const Block& blk : blocks) {
      for (std::size_t g = kEncoderLayerStarts[layer]; g < kEncoderLayerStarts[layer + 1]; ++g) {
        b.cnot(blk[kEncoderCnots[g].first], blk[kEncoderCnots[g].second]);
      }
    }
    b.end_cycle();
  }
  if (basis == AncillaBasis::XType) {
    for (const Block& blk : blocks) {
      for (QubitId q : blk) b.hadamard(q);
    }
    b.end_cycle();
  }
}

/// Checks the weight-3 logical operator on kVerifySupport with one verifier
/// per block, then emits the VerifyAncilla task. ZType blocks copy X parity
/// onto the verifier; XType blocks use a |+> verifier as control to collect Z
/// parity.
inline void task_verify_ancilla(CycleBuilder& b, std::span<const Block> blocks, std::span<const QubitId> verifiers,
                                AncillaBasis basis) {
  if (blocks.size() != verifiers.size()) throw std::invalid_argument("one verifier per ancilla block required");
  for (QubitId v : verifiers) {
    b.activate(std::span<const QubitId>(&v, 1));
    b.reset(v);
  }
  b.end_cycle();
  if (basis == AncillaBasis::XType) {
    for (QubitId v : verifiers) b.hadamard(v);
    b.end_cycle();
  }
  for (std::size_t s : kVerifySupport) {
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (basis == AncillaBasis::ZType) {
        b.cnot(blocks[i][s], verifiers[i]);
      } else {
        b.cnot(verifiers[i], blocks[i][s]);
      }
    }
    b.end_cycle();
  }
  if (basis == AncillaBasis::XType) {
    for (QubitId v : verifiers) b.hadamard(v);
    b.end_cycle();
  }
  for (QubitId v : verifiers) b.measurement(v);
  b.end_cycle();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    std::vector<QubitId> ops(blocks[i].begin(), blocks[i].end());
    ops.push_back(verifiers[i]);
    b.append(Task{TaskKind::VerifyAncilla, std::move(ops)});
    b.deactivate(std::span<const QubitId>(&verifiers[i], 1));
  }
}

/// Transversal coupling of data and ancilla, ancilla measurement and the
/// syndrome-storing measurement task. The bit-flip phase copies data X errors
/// onto a |+> ancilla; the phase-flip phase copies data Z errors onto a |0>
/// ancilla and rotates them to X before measuring.
inline void task_extract_syndrome(CycleBuilder& b, std::span<const RecoveryResources> targets, ErrorPhase phase,
                                  std::size_t slot, const RecoveryOptions& options = {}) {
  if (slot >= kExtractions) throw std::out_of_range("syndrome slot " + std::to_string(slot) + " out of range");
  for (const auto& r : targets) {
    for (std::size_t j = 0; j < kBlockSize; ++j) {
      b.transport(r.ancilla[slot][j], options.transport_distance_um);
      if (phase == ErrorPhase::BitFlip) {
        b.cnot(r.data[j], r.ancilla[slot][j]);
      } else {
        b.cnot(r.ancilla[slot][j], r.data[j]);
      }
    }
  }
  b.end_cycle();
  if (phase == ErrorPhase::PhaseFlip) {
    for (const auto& r : targets) {
      for (QubitId q : r.ancilla[slot]) b.hadamard(q);
    }
    b.end_cycle();
  }
  for (const auto& r : targets) {
    for (QubitId q : r.ancilla[slot]) b.measurement(q);
  }
  b.end_cycle();
  for (const auto& r : targets) {
    b.append(Task{TaskKind::MeasureSyndrome, {r.ancilla[slot].begin(), r.ancilla[slot].end()}});
    b.deactivate(r.ancilla[slot]);
  }
}

inline Task make_correct_task(const RecoveryResources& r, ErrorPhase phase) {
  std::vector<QubitId> ops(r.data.begin(), r.data.end());
  for (const Block& anc : r.ancilla) ops.insert(ops.end(), anc.begin(), anc.begin() + kSyndromeBits);
  return Task{TaskKind::Correct, std::move(ops), phase};
}

inline void task_correct(CycleBuilder& b, std::span<const RecoveryResources> targets, ErrorPhase phase) {
  for (const auto& r : targets) b.append(make_correct_task(r, phase));
}

/// Full recovery of every listed block, in parallel: a bit-flip phase and
/// then a phase-flip phase, each with three prepared and verified ancilla
/// blocks, three extractions and a majority-vote correction.
inline void build_recovery(CycleBuilder& b, std::span<const RecoveryResources> targets,
                           const RecoveryOptions& options = {}) {
  for (ErrorPhase phase : {ErrorPhase::BitFlip, ErrorPhase::PhaseFlip}) {
    const AncillaBasis basis = ancilla_basis_for(phase);
    std::vector<Block> blocks;
    std::vector<QubitId> verifiers;
    for (const auto& r : targets) {
      blocks.insert(blocks.end(), r.ancilla.begin(), r.ancilla.end());
      verifiers.insert(verifiers.end(), r.verifier.begin(), r.verifier.end());
    }
    task_prepare_ancilla(b, blocks, basis);
    task_verify_ancilla(b, blocks, verifiers, basis);
    for (std::size_t slot = 0; slot < kExtractions; ++slot) task_extract_syndrome(b, targets, phase, slot, options);
    task_correct(b, targets, phase);
  }
}

}  // namespace qfault::steane
