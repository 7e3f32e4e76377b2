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
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace qfault {

/// Single-qubit error label. Bit 0 is the X component, bit 1 the Z component,
/// so the phase-free product of two labels is the XOR of their encodings.
enum class Pauli : std::uint8_t { I = 0, X = 1, Z = 2, Y = 3 };

constexpr Pauli compose(Pauli a, Pauli b) {
  return static_cast<Pauli>(static_cast<std::uint8_t>(a) ^ static_cast<std::uint8_t>(b));
}

constexpr bool has_x(Pauli p) { return (static_cast<std::uint8_t>(p) & 1U) != 0; }
constexpr bool has_z(Pauli p) { return (static_cast<std::uint8_t>(p) & 2U) != 0; }

constexpr Pauli make_pauli(bool x, bool z) {
  return static_cast<Pauli>(static_cast<std::uint8_t>(x) | (static_cast<std::uint8_t>(z) << 1));
}

constexpr char to_char(Pauli p) {
  switch (p) {
    case Pauli::I: return 'I';
    case Pauli::X: return 'X';
    case Pauli::Y: return 'Y';
    case Pauli::Z: return 'Z';
  }
  return '?';
}

inline Pauli pauli_from_char(char c) {
  switch (c) {
    case 'I': return Pauli::I;
    case 'X': return Pauli::X;
    case 'Y': return Pauli::Y;
    case 'Z': return Pauli::Z;
    default: throw std::invalid_argument(std::string("not a Pauli label: '") + c + "'");
  }
}

/// The three non-identity labels, in the order errors are enumerated.
inline constexpr std::array<Pauli, 3> kErrorLabels{Pauli::X, Pauli::Y, Pauli::Z};

/// Fixed-width string of Pauli labels stored as two bit planes (X and Z),
/// one bit per qubit per plane. Capacity is 64 * Words qubits; position 0 is
/// the leftmost character of the textual form.
template <std::size_t Words = 1>
class PauliString {
 public:
  static_assert(Words >= 1);
  static constexpr std::size_t kWords = Words;
  static constexpr std::size_t kCapacity = 64 * Words;

  PauliString() = default;

  explicit PauliString(std::size_t width) : width_(static_cast<std::uint32_t>(width)) {
    if (width > kCapacity) {
      throw std::length_error("PauliString width " + std::to_string(width) +
                              " exceeds capacity " + std::to_string(kCapacity));
    }
  }

  static PauliString from_str(std::string_view text) {
    PauliString s(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) s.set(i, pauli_from_char(text[i]));
    return s;
  }

  std::size_t size() const { return width_; }

  bool x(std::size_t q) const { return (xs_[q >> 6] >> (q & 63)) & 1U; }
  bool z(std::size_t q) const { return (zs_[q >> 6] >> (q & 63)) & 1U; }

  Pauli operator[](std::size_t q) const {
    assert(q < width_);
    return make_pauli(x(q), z(q));
  }

  void set(std::size_t q, Pauli p) {
    assert(q < width_);
    const std::uint64_t bit = std::uint64_t{1} << (q & 63);
    xs_[q >> 6] = has_x(p) ? (xs_[q >> 6] | bit) : (xs_[q >> 6] & ~bit);
    zs_[q >> 6] = has_z(p) ? (zs_[q >> 6] | bit) : (zs_[q >> 6] & ~bit);
  }

  void compose_at(std::size_t q, Pauli p) {
    assert(q < width_);
    const std::uint64_t bit = std::uint64_t{1} << (q & 63);
    if (has_x(p)) xs_[q >> 6] ^= bit;
    if (has_z(p)) zs_[q >> 6] ^= bit;
  }

  void flip_x(std::size_t q) { xs_[q >> 6] ^= std::uint64_t{1} << (q & 63); }
  void flip_z(std::size_t q) { zs_[q >> 6] ^= std::uint64_t{1} << (q & 63); }
  void clear(std::size_t q) { set(q, Pauli::I); }

  std::size_t weight() const {
    std::size_t w = 0;
    for (std::size_t k = 0; k < Words; ++k) w += static_cast<std::size_t>(std::popcount(xs_[k] | zs_[k]));
    return w;
  }

  bool is_identity() const {
    for (std::size_t k = 0; k < Words; ++k) {
      if ((xs_[k] | zs_[k]) != 0) return false;
    }
    return true;
  }

  /// Conjugation by a Hadamard on qubit q: swaps the X and Z components.
  void hadamard(std::size_t q) {
    assert(q < width_);
    const bool xq = x(q);
    const bool zq = z(q);
    if (xq != zq) {
      flip_x(q);
      flip_z(q);
    }
  }

  /// Conjugation by CNOT(control, target): X on the control spreads to the
  /// target, Z on the target spreads to the control.
  void cnot(std::size_t control, std::size_t target) {
    assert(control < width_ && target < width_ && control != target);
    if (x(control)) flip_x(target);
    if (z(target)) flip_z(control);
  }

  std::string str() const {
    std::string out(width_, 'I');
    for (std::size_t q = 0; q < width_; ++q) out[q] = to_char((*this)[q]);
    return out;
  }

  /// Concatenation: `a` occupies positions [0, |a|), `b` the positions after.
  static PauliString concat(const PauliString& a, const PauliString& b) {
    PauliString out(a.size() + b.size());
    out.xs_ = a.xs_;
    out.zs_ = a.zs_;
    out.or_shifted(b, a.size());
    return out;
  }

  /// Restriction to the given positions, in the given order.
  PauliString project(std::span<const std::size_t> positions) const {
    PauliString out(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
      const std::size_t q = positions[i];
      if (x(q)) out.flip_x(i);
      if (z(q)) out.flip_z(i);
    }
    return out;
  }

  const std::array<std::uint64_t, Words>& x_words() const { return xs_; }
  const std::array<std::uint64_t, Words>& z_words() const { return zs_; }

  friend bool operator==(const PauliString&, const PauliString&) = default;

  template <typename H>
  friend H AbslHashValue(H h, const PauliString& s) {
    return H::combine(std::move(h), s.xs_, s.zs_, s.width_);
  }

 private:
  void or_shifted(const PauliString& b, std::size_t offset) {
    const std::size_t word_shift = offset >> 6;
    const std::size_t bit_shift = offset & 63;
    for (std::size_t k = 0; k < Words; ++k) {
      const std::size_t dst = k + word_shift;
      if (dst >= Words) break;
      xs_[dst] |= b.xs_[k] << bit_shift;
      zs_[dst] |= b.zs_[k] << bit_shift;
      if (bit_shift != 0 && dst + 1 < Words) {
        xs_[dst + 1] |= b.xs_[k] >> (64 - bit_shift);
        zs_[dst + 1] |= b.zs_[k] >> (64 - bit_shift);
      }
    }
  }

  std::array<std::uint64_t, Words> xs_{};
  std::array<std::uint64_t, Words> zs_{};
  std::uint32_t width_ = 0;
};

/// Seedless hash for PauliString keys. Unlike absl::Hash it does not vary
/// from process to process, so hash-table iteration order (and with it the
/// floating-point summation order) is reproducible across runs.
template <std::size_t Words>
struct PauliHash {
  static std::uint64_t mix(std::uint64_t v) {
    v ^= v >> 30;
    v *= 0xbf58476d1ce4e5b9ULL;
    v ^= v >> 27;
    v *= 0x94d049bb133111ebULL;
    return v ^ (v >> 31);
  }
  std::size_t operator()(const PauliString<Words>& s) const {
    std::uint64_t h = mix(s.size() + 0x9e3779b97f4a7c15ULL);
    for (std::size_t i = 0; i < Words; ++i) {
      h = mix(h ^ s.x_words()[i]);
      h = mix(h ^ (s.z_words()[i] + 0x632be59bd9b4e019ULL));
    }
    return static_cast<std::size_t>(h);
  }
};

template <std::size_t W>
std::size_t weight(const PauliString<W>& s) {
  return s.weight();
}

namespace detail {
inline void check_index(std::size_t q, std::size_t width) {
  if (q >= width) {
    throw std::out_of_range("qubit index " + std::to_string(q) + " out of range for width " +
                            std::to_string(width));
  }
}
}  // namespace detail

template <std::size_t W>
PauliString<W> apply_hadamard(PauliString<W> s, std::size_t q) {
  detail::check_index(q, s.size());
  s.hadamard(q);
  return s;
}

template <std::size_t W>
PauliString<W> apply_cnot(PauliString<W> s, std::size_t control, std::size_t target) {
  detail::check_index(control, s.size());
  detail::check_index(target, s.size());
  if (control == target) throw std::invalid_argument("CNOT control and target must differ");
  s.cnot(control, target);
  return s;
}

}  // namespace qfault
