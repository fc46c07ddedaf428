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

#include "starcast/groups.hpp"

#include <algorithm>
#include <cstring>

#include "starcast/error.hpp"

namespace starcast {
namespace {

constexpr std::array<std::uint8_t, 32> kOrder = {
    0x73, 0xed, 0xa7, 0x53, 0x29, 0x9d, 0x7d, 0x48, 0x33, 0x39, 0xd8,
    0x08, 0x09, 0xa1, 0xd8, 0x05, 0x53, 0xbd, 0xa4, 0x02, 0xff, 0xfe,
    0x5b, 0xfe, 0xff, 0xff, 0xff, 0xff, 0x00, 0x00, 0x00, 0x01};

thread_local std::uint64_t tls_pairings = 0;

Gt pair_uncounted(const G1& a, const G2& b) {
  if (a.is_identity() || b.is_identity()) return Gt();
  blst_p1_affine pa = a.affine();
  blst_p2_affine pb = b.affine();
  blst_fp12 loop, out;
  blst_miller_loop(&loop, &pb, &pa);
  blst_final_exp(&out, &loop);
  return Gt::wrap(out);
}

const Gt& gt_generator() {
  static const Gt gen = pair_uncounted(G1::generator(), G2::generator());
  return gen;
}

}  // namespace

// ---- Scalar ---------------------------------------------------------------

Scalar::Scalar() { std::memset(&v_, 0, sizeof(v_)); }

Scalar Scalar::from_u64(std::uint64_t v) {
  const std::uint64_t limbs[4] = {v, 0, 0, 0};
  Scalar s;
  blst_fr_from_uint64(&s.v_, limbs);
  return s;
}

Scalar Scalar::from_int(std::int64_t v) {
  if (v >= 0) return from_u64(static_cast<std::uint64_t>(v));
  return -from_u64(static_cast<std::uint64_t>(-(v + 1)) + 1);
}

Scalar Scalar::from_bytes(ByteView be) {
  if (be.size() != kBytes) {
    fail(ErrorCode::kMalformedInput, "scalar must be 32 bytes");
  }
  blst_scalar raw;
  blst_scalar_from_bendian(&raw, be.data());
  if (!blst_scalar_fr_check(&raw)) {
    fail(ErrorCode::kMalformedInput, "scalar not reduced modulo the group order");
  }
  Scalar s;
  blst_fr_from_scalar(&s.v_, &raw);
  return s;
}

Scalar Scalar::random(Rng& rng) {
  std::array<std::uint8_t, kBytes> buf;
  blst_scalar raw;
  do {
    rng.fill(buf);
    buf[0] &= 0x7f;  // p has 255 bits
    blst_scalar_from_bendian(&raw, buf.data());
  } while (!blst_scalar_fr_check(&raw));
  Scalar s;
  blst_fr_from_scalar(&s.v_, &raw);
  return s;
}

Scalar Scalar::random_nonzero(Rng& rng) {
  for (;;) {
    Scalar s = random(rng);
    if (!s.is_zero()) return s;
  }
}

std::array<std::uint8_t, Scalar::kBytes> Scalar::to_bytes() const {
  blst_scalar raw;
  blst_scalar_from_fr(&raw, &v_);
  std::array<std::uint8_t, kBytes> out;
  blst_bendian_from_scalar(out.data(), &raw);
  return out;
}

blst_scalar Scalar::raw() const {
  blst_scalar raw;
  blst_scalar_from_fr(&raw, &v_);
  return raw;
}

bool Scalar::is_zero() const {
  static const blst_fr zero{};
  return std::memcmp(&v_, &zero, sizeof(v_)) == 0;
}

Scalar Scalar::inverse() const {
  if (is_zero()) fail(ErrorCode::kInvalidArgument, "inverse of zero scalar");
  Scalar s;
  blst_fr_eucl_inverse(&s.v_, &v_);
  return s;
}

Scalar Scalar::operator+(const Scalar& o) const {
  Scalar s;
  blst_fr_add(&s.v_, &v_, &o.v_);
  return s;
}

Scalar Scalar::operator-(const Scalar& o) const {
  Scalar s;
  blst_fr_sub(&s.v_, &v_, &o.v_);
  return s;
}

Scalar Scalar::operator*(const Scalar& o) const {
  Scalar s;
  blst_fr_mul(&s.v_, &v_, &o.v_);
  return s;
}

Scalar Scalar::operator-() const {
  Scalar s;
  blst_fr_cneg(&s.v_, &v_, true);
  return s;
}

bool Scalar::operator==(const Scalar& o) const {
  // Montgomery residues are kept fully reduced.
  return std::memcmp(&v_, &o.v_, sizeof(v_)) == 0;
}

// ---- G1 -------------------------------------------------------------------

G1::G1() { std::memset(&p_, 0, sizeof(p_)); }

G1 G1::generator() { return wrap(*blst_p1_generator()); }

G1 G1::wrap(const blst_p1& p) {
  G1 out;
  out.p_ = p;
  return out;
}

G1 G1::from_bytes(ByteView compressed) {
  if (compressed.size() != kBytes) fail(ErrorCode::kMalformedInput, "G1 element must be 48 bytes");
  blst_p1_affine a;
  if (blst_p1_uncompress(&a, compressed.data()) != BLST_SUCCESS) {
    fail(ErrorCode::kMalformedInput, "invalid G1 encoding");
  }
  if (!blst_p1_affine_in_g1(&a)) fail(ErrorCode::kMalformedInput, "G1 point outside prime-order subgroup");
  G1 out;
  blst_p1_from_affine(&out.p_, &a);
  auto canonical = out.to_bytes();
  if (!std::equal(compressed.begin(), compressed.end(), canonical.begin())) {
    fail(ErrorCode::kMalformedInput, "non-canonical G1 encoding");
  }
  return out;
}

std::array<std::uint8_t, G1::kBytes> G1::to_bytes() const {
  std::array<std::uint8_t, kBytes> out;
  blst_p1_compress(out.data(), &p_);
  return out;
}

bool G1::is_identity() const { return blst_p1_is_inf(&p_); }

G1 G1::operator+(const G1& o) const {
  G1 out;
  blst_p1_add_or_double(&out.p_, &p_, &o.p_);
  return out;
}

G1 G1::operator-() const {
  G1 out = *this;
  blst_p1_cneg(&out.p_, true);
  return out;
}

G1 G1::operator-(const G1& o) const { return *this + (-o); }

G1 G1::operator*(const Scalar& s) const {
  blst_scalar raw = s.raw();
  G1 out;
  blst_p1_mult(&out.p_, &p_, raw.b, 255);
  return out;
}

bool G1::operator==(const G1& o) const { return blst_p1_is_equal(&p_, &o.p_); }

blst_p1_affine G1::affine() const {
  blst_p1_affine a;
  blst_p1_to_affine(&a, &p_);
  return a;
}

// ---- G2 -------------------------------------------------------------------

G2::G2() { std::memset(&p_, 0, sizeof(p_)); }

G2 G2::generator() {
  G2 out;
  out.p_ = *blst_p2_generator();
  return out;
}

G2 G2::from_bytes(ByteView compressed) {
  if (compressed.size() != kBytes) fail(ErrorCode::kMalformedInput, "G2 element must be 96 bytes");
  blst_p2_affine a;
  if (blst_p2_uncompress(&a, compressed.data()) != BLST_SUCCESS) {
    fail(ErrorCode::kMalformedInput, "invalid G2 encoding");
  }
  if (!blst_p2_affine_in_g2(&a)) fail(ErrorCode::kMalformedInput, "G2 point outside prime-order subgroup");
  G2 out;
  blst_p2_from_affine(&out.p_, &a);
  auto canonical = out.to_bytes();
  if (!std::equal(compressed.begin(), compressed.end(), canonical.begin())) {
    fail(ErrorCode::kMalformedInput, "non-canonical G2 encoding");
  }
  return out;
}

std::array<std::uint8_t, G2::kBytes> G2::to_bytes() const {
  std::array<std::uint8_t, kBytes> out;
  blst_p2_compress(out.data(), &p_);
  return out;
}

bool G2::is_identity() const { return blst_p2_is_inf(&p_); }

G2 G2::operator+(const G2& o) const {
  G2 out;
  blst_p2_add_or_double(&out.p_, &p_, &o.p_);
  return out;
}

G2 G2::operator-() const {
  G2 out = *this;
  blst_p2_cneg(&out.p_, true);
  return out;
}

G2 G2::operator-(const G2& o) const { return *this + (-o); }

G2 G2::operator*(const Scalar& s) const {
  blst_scalar raw = s.raw();
  G2 out;
  blst_p2_mult(&out.p_, &p_, raw.b, 255);
  return out;
}

bool G2::operator==(const G2& o) const { return blst_p2_is_equal(&p_, &o.p_); }

blst_p2_affine G2::affine() const {
  blst_p2_affine a;
  blst_p2_to_affine(&a, &p_);
  return a;
}

// ---- GT -------------------------------------------------------------------

Gt::Gt() : v_(*blst_fp12_one()) {}

Gt Gt::wrap(const blst_fp12& v) {
  Gt out;
  out.v_ = v;
  return out;
}

Gt Gt::random(Rng& rng) { return gt_generator().pow(Scalar::random(rng)); }

std::array<std::uint8_t, Gt::kBytes> Gt::to_bytes() const {
  std::array<std::uint8_t, kBytes> out;
  blst_bendian_from_fp12(out.data(), &v_);
  return out;
}

Gt Gt::from_bytes(ByteView bytes) {
  if (bytes.size() != kBytes) fail(ErrorCode::kMalformedInput, "GT element must be 576 bytes");
  // Inverse of blst_bendian_from_fp12: coefficient order is
  // (fp2 index i, fp6 index j, fp component k).
  Gt out;
  const std::uint8_t* in = bytes.data();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        blst_fp_from_bendian(&out.v_.fp6[j].fp2[i].fp[k], in);
        in += 48;
      }
    }
  }
  auto canonical = out.to_bytes();
  if (!std::equal(bytes.begin(), bytes.end(), canonical.begin())) {
    fail(ErrorCode::kMalformedInput, "non-canonical GT encoding");
  }
  if (!blst_fp12_in_group(&out.v_)) fail(ErrorCode::kMalformedInput, "GT element outside the target group");
  return out;
}

bool Gt::is_identity() const { return blst_fp12_is_one(&v_); }

Gt Gt::operator*(const Gt& o) const {
  Gt out;
  blst_fp12_mul(&out.v_, &v_, &o.v_);
  return out;
}

Gt Gt::inverse() const {
  // Elements of GT are unitary, so the conjugate is the inverse.
  Gt out = *this;
  blst_fp12_conjugate(&out.v_);
  return out;
}

Gt Gt::pow(const Scalar& e) const {
  blst_scalar raw = e.raw();
  blst_fp12 acc = *blst_fp12_one();
  bool started = false;
  for (int bit = 254; bit >= 0; --bit) {
    if (started) blst_fp12_cyclotomic_sqr(&acc, &acc);
    if ((raw.b[bit / 8] >> (bit % 8)) & 1) {
      blst_fp12_mul(&acc, &acc, &v_);
      started = true;
    }
  }
  return wrap(acc);
}

bool Gt::operator==(const Gt& o) const { return blst_fp12_is_equal(&v_, &o.v_); }

// ---- context, pairing, hashing --------------------------------------------

unsigned GroupContext::order_bits() const {
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] != 0) {
      unsigned top = 8;
      while (!(order[i] >> (top - 1) & 1)) --top;
      return static_cast<unsigned>((order.size() - i - 1) * 8 + top);
    }
  }
  return 0;
}

GroupContext generate_context(std::string_view security_level) {
  if (security_level != "128-bit" && security_level != "bls12-381") {
    fail(ErrorCode::kUnsupportedLevel,
         "unsupported security level '" + std::string(security_level) + "' (supported: 128-bit)");
  }
  GroupContext ctx;
  ctx.level = "128-bit";
  ctx.curve = "BLS12-381";
  ctx.security_bits = 128;
  ctx.order = kOrder;
  ctx.g = G1::generator();
  ctx.h = G2::generator();
  return ctx;
}

const GroupContext& default_context() {
  static const GroupContext ctx = generate_context("128-bit");
  return ctx;
}

Gt pair(const G1& a, const G2& b) {
  ++tls_pairings;
  return pair_uncounted(a, b);
}

std::uint64_t pairing_count() { return tls_pairings; }
void reset_pairing_count() { tls_pairings = 0; }

HashLabel HashLabel::for_attribute(std::string_view name, int slot, int side) {
  HashLabel l;
  l.kind = Kind::kAttribute;
  l.attribute = std::string(name);
  l.slot = static_cast<std::uint8_t>(slot);
  l.side = static_cast<std::uint8_t>(side);
  return l;
}

HashLabel HashLabel::for_index(std::uint32_t j, int slot, int side) {
  HashLabel l;
  l.kind = Kind::kNumeric;
  l.index = j;
  l.slot = static_cast<std::uint8_t>(slot);
  l.side = static_cast<std::uint8_t>(side);
  return l;
}

Bytes encode_label(const HashLabel& label) {
  if (label.slot < 1 || label.slot > 3) fail(ErrorCode::kInvalidArgument, "label slot must be 1, 2 or 3");
  if (label.side < 1 || label.side > 2) fail(ErrorCode::kInvalidArgument, "label side must be 1 or 2");
  ByteWriter w;
  switch (label.kind) {
    case HashLabel::Kind::kAttribute:
      if (label.attribute.empty() || label.attribute.size() > 255) {
        fail(ErrorCode::kInvalidArgument, "attribute label must be 1-255 bytes");
      }
      w.u8(0x01);
      w.u8(static_cast<std::uint8_t>(label.attribute.size()));
      w.raw(label.attribute);
      break;
    case HashLabel::Kind::kNumeric:
      if (label.index == 0) fail(ErrorCode::kInvalidArgument, "numeric label index must be positive");
      w.u8(0x00);
      w.u32(label.index);
      break;
    default:
      fail(ErrorCode::kInvalidArgument, "unknown label kind");
  }
  w.u8(label.slot);
  w.u8(label.side);
  return std::move(w).bytes();
}

G1 hash_to_g1(const HashLabel& label) {
  Bytes msg = encode_label(label);
  blst_p1 out;
  blst_hash_to_g1(&out, msg.data(), msg.size(),
                  reinterpret_cast<const byte*>(kHashToG1Dst.data()), kHashToG1Dst.size(),
                  nullptr, 0);
  return G1::wrap(out);
}

}  // namespace starcast
