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

#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "qfault/pauli.hpp"

namespace qfault {
namespace {

using PS = PauliString<1>;

// Reference algebra on explicit matrices, identified modulo global phase.
using C = std::complex<double>;
using M2 = std::array<C, 4>;
using M4 = std::array<C, 16>;

M2 matrix(char label) {
  const C i(0, 1);
  switch (label) {
    case 'X': return {0, 1, 1, 0};
    case 'Y': return {0, -i, i, 0};
    case 'Z': return {1, 0, 0, -1};
    default: return {1, 0, 0, 1};
  }
}

template <std::size_t N, std::size_t D>
std::array<C, N> matmul(const std::array<C, N>& a, const std::array<C, N>& b) {
  std::array<C, N> out{};
  for (std::size_t r = 0; r < D; ++r)
    for (std::size_t c = 0; c < D; ++c)
      for (std::size_t k = 0; k < D; ++k) out[r * D + c] += a[r * D + k] * b[k * D + c];
  return out;
}

template <std::size_t N>
bool equal_up_to_phase(const std::array<C, N>& a, const std::array<C, N>& b) {
  C phase = 0;
  for (std::size_t k = 0; k < N; ++k) {
    if (std::abs(b[k]) > 1e-9) {
      phase = a[k] / b[k];
      break;
    }
  }
  for (std::size_t k = 0; k < N; ++k) {
    if (std::abs(a[k] - phase * b[k]) > 1e-9) return false;
  }
  return std::abs(std::abs(phase) - 1.0) < 1e-9;
}

char identify(const M2& m) {
  for (char c : std::string("IXYZ")) {
    if (equal_up_to_phase(m, matrix(c))) return c;
  }
  return '?';
}

M4 kron(const M2& a, const M2& b) {
  M4 out{};
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) out[r * 4 + c] = a[(r / 2) * 2 + c / 2] * b[(r % 2) * 2 + c % 2];
  return out;
}

std::string identify2(const M4& m) {
  for (char a : std::string("IXYZ"))
    for (char b : std::string("IXYZ"))
      if (equal_up_to_phase(m, kron(matrix(a), matrix(b)))) return std::string{a, b};
  return "??";
}

TEST(PauliTest, ComposeMatchesMatrixProductsModuloPhase) {
  for (char a : std::string("IXYZ")) {
    for (char b : std::string("IXYZ")) {
      const char expected = identify(matmul<4, 2>(matrix(a), matrix(b)));
      EXPECT_EQ(to_char(compose(pauli_from_char(a), pauli_from_char(b))), expected) << a << "*" << b;
    }
  }
}

TEST(PauliTest, ComposeExamples) {
  EXPECT_EQ(compose(Pauli::I, Pauli::X), Pauli::X);
  EXPECT_EQ(compose(Pauli::X, Pauli::X), Pauli::I);
  EXPECT_EQ(compose(Pauli::X, Pauli::Z), Pauli::Y);
}

TEST(PauliTest, ComposeIsAnAbelianGroupOfSelfInverses) {
  const std::array<Pauli, 4> all{Pauli::I, Pauli::X, Pauli::Y, Pauli::Z};
  for (Pauli a : all) {
    EXPECT_EQ(compose(a, a), Pauli::I);
    EXPECT_EQ(compose(Pauli::I, a), a);
    for (Pauli b : all) {
      EXPECT_EQ(compose(a, b), compose(b, a));
      for (Pauli c : all) EXPECT_EQ(compose(compose(a, b), c), compose(a, compose(b, c)));
    }
  }
}

TEST(PauliTest, StringRoundTripAndWeight) {
  EXPECT_EQ(PS::from_str("IXYZ").str(), "IXYZ");
  EXPECT_EQ(weight(PS::from_str("III")), 0u);
  EXPECT_EQ(weight(PS::from_str("IXXYI")), 3u);
  EXPECT_EQ(weight(PS::from_str("XYZ")), 3u);
  EXPECT_EQ(PS::from_str("IXI")[1], Pauli::X);
  EXPECT_TRUE(PS(5).is_identity());
  EXPECT_THROW(PS::from_str("IQ"), std::invalid_argument);
  EXPECT_THROW(PS(65), std::length_error);
  EXPECT_NO_THROW(PauliString<2>(128));
}

TEST(PauliTest, EqualityIsPositionwise) {
  EXPECT_EQ(PS::from_str("XIZ"), PS::from_str("XIZ"));
  EXPECT_NE(PS::from_str("XIZ"), PS::from_str("ZIX"));
  EXPECT_NE(PS::from_str("II"), PS::from_str("III"));
}

TEST(PauliTest, WideStringsCrossWordBoundaries) {
  PauliString<2> s(100);
  s.set(63, Pauli::X);
  s.set(64, Pauli::Z);
  s.set(99, Pauli::Y);
  EXPECT_EQ(s.weight(), 3u);
  s.cnot(63, 64);
  EXPECT_EQ(s[63], Pauli::Y);
  EXPECT_EQ(s[64], Pauli::Y);
  const auto back = PauliString<2>::from_str(s.str());
  EXPECT_EQ(back, s);
}

TEST(PauliTest, HadamardExamples) {
  EXPECT_EQ(apply_hadamard(PS::from_str("IXI"), 1).str(), "IZI");
  EXPECT_EQ(apply_hadamard(PS::from_str("III"), 0).str(), "III");
  EXPECT_EQ(apply_hadamard(PS::from_str("IYI"), 1).str(), "IYI");
  EXPECT_THROW(apply_hadamard(PS::from_str("III"), 3), std::out_of_range);
}

TEST(PauliTest, HadamardMatchesMatrixConjugation) {
  const double r = 1.0 / std::sqrt(2.0);
  const M2 h{r, r, r, -r};
  for (char a : std::string("IXYZ")) {
    const char expected = identify(matmul<4, 2>(matmul<4, 2>(h, matrix(a)), h));
    EXPECT_EQ(apply_hadamard(PS::from_str(std::string(1, a)), 0).str(), std::string(1, expected));
  }
}

TEST(PauliTest, HadamardIsAnInvolutionPreservingWeight) {
  for (char a : std::string("IXYZ")) {
    for (std::size_t q = 0; q < 3; ++q) {
      std::string text = "XIZ";
      text[q] = a;
      const PS s = PS::from_str(text);
      EXPECT_EQ(apply_hadamard(apply_hadamard(s, q), q), s);
      EXPECT_EQ(weight(apply_hadamard(s, q)), weight(s));
    }
  }
}

TEST(PauliTest, CnotExamples) {
  EXPECT_EQ(apply_cnot(PS::from_str("XII"), 0, 1).str(), "XXI");
  EXPECT_EQ(apply_cnot(PS::from_str("III"), 0, 1).str(), "III");
  EXPECT_EQ(apply_cnot(PS::from_str("IZ"), 0, 1).str(), "ZZ");
  EXPECT_THROW(apply_cnot(PS::from_str("II"), 1, 1), std::invalid_argument);
  EXPECT_THROW(apply_cnot(PS::from_str("II"), 0, 2), std::out_of_range);
}

TEST(PauliTest, CnotMatchesMatrixConjugationOnAllSixteenPairs) {
  const M4 cx{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0};  // control = left factor
  for (char a : std::string("IXYZ")) {
    for (char b : std::string("IXYZ")) {
      const std::string expected = identify2(matmul<16, 4>(matmul<16, 4>(cx, kron(matrix(a), matrix(b))), cx));
      const PS s = PS::from_str(std::string{a, b});
      EXPECT_EQ(apply_cnot(s, 0, 1).str(), expected) << a << b;
      EXPECT_EQ(apply_cnot(apply_cnot(s, 0, 1), 0, 1), s);
      // Reversed operand order on the mirrored string.
      const PS m = PS::from_str(std::string{b, a});
      EXPECT_EQ(apply_cnot(m, 1, 0).str(), (std::string{expected[1], expected[0]}));
    }
  }
}

TEST(PauliTest, ConcatAndProject) {
  const PS a = PS::from_str("IXX");
  const PS b = PS::from_str("YI");
  const PS ab = PS::concat(a, b);
  EXPECT_EQ(ab.str(), "IXXYI");
  const std::size_t keep[] = {3, 1};
  EXPECT_EQ(ab.project(keep).str(), "YX");
}

TEST(PauliTest, HashIsStableAndSpreadsKeys) {
  PauliHash<1> h;
  EXPECT_EQ(h(PS::from_str("XYZ")), h(PS::from_str("XYZ")));
  EXPECT_NE(h(PS::from_str("XYZ")), h(PS::from_str("XYI")));
  EXPECT_NE(h(PS::from_str("II")), h(PS::from_str("III")));
}

}  // namespace
}  // namespace qfault
