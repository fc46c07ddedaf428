// Copyright 2026 The StarCast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Asymmetric (Type-III) bilinear group over BLS12-381, backed by blst.
//
// G1 and G2 are written additively (a + b, a * s); GT is written
// multiplicatively (a * b, a.pow(s)). All element types are plain values.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include <blst.h>

#include "starcast/bytes.hpp"
#include "starcast/rng.hpp"

namespace starcast {

/// Residue modulo the prime group order p.
class Scalar {
 public:
  static constexpr std::size_t kBytes = 32;

  Scalar();  // zero
  static Scalar from_u64(std::uint64_t v);
  /// Signed small integers, e.g. span-program entries; -1 maps to p - 1.
  static Scalar from_int(std::int64_t v);
  /// Big-endian, must be < p.
  static Scalar from_bytes(ByteView be);
  /// Rejection sampling over [0, p).
  static Scalar random(Rng& rng);
  /// Rejection sampling over [1, p).
  static Scalar random_nonzero(Rng& rng);

  std::array<std::uint8_t, kBytes> to_bytes() const;
  bool is_zero() const;
  Scalar inverse() const;

  Scalar operator+(const Scalar& o) const;
  Scalar operator-(const Scalar& o) const;
  Scalar operator*(const Scalar& o) const;
  Scalar operator-() const;
  Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }
  bool operator==(const Scalar& o) const;

  /// Little-endian canonical form, as consumed by blst point multiplication.
  blst_scalar raw() const;

 private:
  blst_fr v_;
};

class G1 {
 public:
  static constexpr std::size_t kBytes = 48;

  G1();  // identity
  static G1 generator();
  static G1 from_bytes(ByteView compressed);

  std::array<std::uint8_t, kBytes> to_bytes() const;
  bool is_identity() const;

  G1 operator+(const G1& o) const;
  G1 operator-(const G1& o) const;
  G1 operator-() const;
  G1 operator*(const Scalar& s) const;
  G1& operator+=(const G1& o) { return *this = *this + o; }
  G1& operator-=(const G1& o) { return *this = *this - o; }
  bool operator==(const G1& o) const;

  blst_p1_affine affine() const;
  const blst_p1& raw() const { return p_; }
  static G1 wrap(const blst_p1& p);

 private:
  blst_p1 p_;
};

class G2 {
 public:
  static constexpr std::size_t kBytes = 96;

  G2();  // identity
  static G2 generator();
  static G2 from_bytes(ByteView compressed);

  std::array<std::uint8_t, kBytes> to_bytes() const;
  bool is_identity() const;

  G2 operator+(const G2& o) const;
  G2 operator-(const G2& o) const;
  G2 operator-() const;
  G2 operator*(const Scalar& s) const;
  G2& operator+=(const G2& o) { return *this = *this + o; }
  bool operator==(const G2& o) const;

  blst_p2_affine affine() const;

 private:
  blst_p2 p_;
};

class Gt {
 public:
  static constexpr std::size_t kBytes = 576;

  Gt();  // identity
  static Gt from_bytes(ByteView bytes);
  /// Uniform-looking element e(g,h)^r, used as a test message.
  static Gt random(Rng& rng);

  /// Twelve big-endian base-field coefficients.
  std::array<std::uint8_t, kBytes> to_bytes() const;
  bool is_identity() const;

  Gt operator*(const Gt& o) const;
  Gt& operator*=(const Gt& o) { return *this = *this * o; }
  Gt inverse() const;
  Gt pow(const Scalar& e) const;
  bool operator==(const Gt& o) const;

  static Gt wrap(const blst_fp12& v);

 private:
  blst_fp12 v_;
};

/// Immutable description of the pairing group in use. Safe to share.
struct GroupContext {
  std::string level;
  std::string curve;
  unsigned security_bits = 0;
  /// Group order p, big-endian.
  std::array<std::uint8_t, Scalar::kBytes> order{};
  G1 g;
  G2 h;

  unsigned order_bits() const;
};

/// Named parameter sets: "128-bit" (alias "bls12-381"). Deterministic.
GroupContext generate_context(std::string_view security_level);
const GroupContext& default_context();

/// e: G1 x G2 -> GT (optimal ate, full final exponentiation).
Gt pair(const G1& a, const G2& b);

/// Pairings evaluated on the calling thread since the last reset.
std::uint64_t pairing_count();
void reset_pairing_count();

/// Input to the random oracle H: either (attribute, slot, side) or
/// (numeric index, slot, side). Slot is in {1,2,3}, side in {1,2}.
struct HashLabel {
  enum class Kind : std::uint8_t { kNumeric = 0x00, kAttribute = 0x01 };

  Kind kind = Kind::kAttribute;
  std::string attribute;
  std::uint32_t index = 0;
  std::uint8_t slot = 1;
  std::uint8_t side = 1;

  static HashLabel for_attribute(std::string_view name, int slot, int side);
  static HashLabel for_index(std::uint32_t j, int slot, int side);
};

inline constexpr std::string_view kHashToG1Dst = "STARCAST-H2G1-v1";

/// kind || (u8 len || bytes | be32 j) || slot || side. Injective over
/// well-formed labels.
Bytes encode_label(const HashLabel& label);

/// Hash-to-curve (SSWU, RFC 9380 suite for G1) of encode_label(label).
G1 hash_to_g1(const HashLabel& label);

}  // namespace starcast
