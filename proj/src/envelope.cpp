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

#include "starcast/envelope.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <memory>

#include "starcast/error.hpp"

namespace starcast {
namespace {

using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)>;

template <class Element>
void put(ByteWriter& w, const Element& e) {
  w.raw(e.to_bytes());
}

G1 get_g1(ByteReader& r) {
  std::size_t at = r.offset();
  try {
    return G1::from_bytes(r.take(G1::kBytes));
  } catch (const Error& e) {
    fail(ErrorCode::kMalformedInput, std::string(e.what()) + " at offset " + std::to_string(at));
  }
}

G2 get_g2(ByteReader& r) {
  std::size_t at = r.offset();
  try {
    return G2::from_bytes(r.take(G2::kBytes));
  } catch (const Error& e) {
    fail(ErrorCode::kMalformedInput, std::string(e.what()) + " at offset " + std::to_string(at));
  }
}

Gt get_gt(ByteReader& r) {
  std::size_t at = r.offset();
  try {
    return Gt::from_bytes(r.take(Gt::kBytes));
  } catch (const Error& e) {
    fail(ErrorCode::kMalformedInput, std::string(e.what()) + " at offset " + std::to_string(at));
  }
}

Scalar get_scalar(ByteReader& r, bool nonzero) {
  std::size_t at = r.offset();
  Scalar s;
  try {
    s = Scalar::from_bytes(r.take(Scalar::kBytes));
  } catch (const Error& e) {
    fail(ErrorCode::kMalformedInput, std::string(e.what()) + " at offset " + std::to_string(at));
  }
  if (nonzero && s.is_zero()) {
    fail(ErrorCode::kMalformedInput, "zero scalar at offset " + std::to_string(at));
  }
  return s;
}

void put_frame(ByteWriter& w, FileType type) {
  w.raw(kFileMagic);
  w.u8(kFormatVersion);
  w.u8(static_cast<std::uint8_t>(type));
}

// Consumes magic, version and type; the reader is left at the body.
void expect_frame(ByteReader& r, FileType type) {
  auto magic = r.take(kFileMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kFileMagic.begin())) {
    fail(ErrorCode::kMalformedInput, "bad magic at offset 0");
  }
  std::uint8_t version = r.u8();
  if (version != kFormatVersion) {
    fail(ErrorCode::kVersionUnsupported, "unsupported format version " + std::to_string(version));
  }
  std::size_t at = r.offset();
  auto got = static_cast<FileType>(r.u8());
  if (got != type) {
    fail(ErrorCode::kMalformedInput, "expected " + std::string(file_type_name(type)) + " but found type " +
                                         std::to_string(static_cast<int>(got)) + " at offset " +
                                         std::to_string(at));
  }
}

void write_header_body(ByteWriter& w, const abe::AbeHeader& hdr) {
  w.u8(static_cast<std::uint8_t>(hdr.mode));
  w.u64(hdr.epoch);
  w.blob(hdr.msp.policy);
  w.raw(msp_digest(hdr.msp));
  w.u32(static_cast<std::uint32_t>(hdr.rows.size()));
  for (const auto& e : hdr.c0) put(w, e);
  for (const auto& row : hdr.rows) {
    for (const auto& e : row) put(w, e);
  }
  if (hdr.mode == abe::HeaderMode::kElement) put(w, *hdr.c_prime);
}

abe::AbeHeader read_header_body(ByteReader& r) {
  abe::AbeHeader hdr;
  std::size_t at = r.offset();
  std::uint8_t mode = r.u8();
  if (mode > 1) fail(ErrorCode::kMalformedInput, "unknown header mode at offset " + std::to_string(at));
  hdr.mode = static_cast<abe::HeaderMode>(mode);
  hdr.epoch = r.u64();

  at = r.offset();
  std::string policy = r.blob_string(kMaxPolicyBytes);
  try {
    hdr.msp = to_msp(parse_policy(policy));
  } catch (const Error& e) {
    fail(ErrorCode::kMalformedInput, "embedded policy at offset " + std::to_string(at) + ": " + e.what());
  }
  if (hdr.msp.policy != policy) {
    fail(ErrorCode::kMalformedInput, "embedded policy not in canonical form at offset " + std::to_string(at));
  }
  at = r.offset();
  auto digest = r.take(32);
  auto expected = msp_digest(hdr.msp);
  if (!std::equal(digest.begin(), digest.end(), expected.begin())) {
    fail(ErrorCode::kMalformedInput, "span program digest mismatch at offset " + std::to_string(at));
  }
  at = r.offset();
  std::uint32_t n1 = r.u32();
  if (n1 != hdr.msp.rows) {
    fail(ErrorCode::kMalformedInput, "row count " + std::to_string(n1) + " does not match policy at offset " +
                                         std::to_string(at));
  }
  for (auto& e : hdr.c0) e = get_g2(r);
  hdr.rows.resize(n1);
  for (auto& row : hdr.rows) {
    for (auto& e : row) e = get_g1(r);
  }
  if (hdr.mode == abe::HeaderMode::kElement) hdr.c_prime = get_gt(r);
  return hdr;
}

void write_g1_triple(ByteWriter& w, const abe::G1Triple& t) {
  for (const auto& e : t) put(w, e);
}

abe::G1Triple read_g1_triple(ByteReader& r) {
  abe::G1Triple t;
  for (auto& e : t) e = get_g1(r);
  return t;
}

}  // namespace

std::string_view file_type_name(FileType type) {
  switch (type) {
    case FileType::kPublicKey: return "public key";
    case FileType::kMasterKey: return "master key";
    case FileType::kUserSecretKey: return "user secret key";
    case FileType::kEnvelope: return "envelope";
    case FileType::kHeader: return "header";
  }
  return "unknown";
}

FileType peek_file_type(ByteView bytes) {
  ByteReader r(bytes);
  auto magic = r.take(kFileMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kFileMagic.begin())) {
    fail(ErrorCode::kMalformedInput, "bad magic at offset 0");
  }
  std::uint8_t version = r.u8();
  // Standalone headers carry no version byte; their type byte sits at offset 4.
  if (version == static_cast<std::uint8_t>(FileType::kHeader)) return FileType::kHeader;
  if (version != kFormatVersion) {
    fail(ErrorCode::kVersionUnsupported, "unsupported format version " + std::to_string(version));
  }
  std::uint8_t type = r.u8();
  if (type < 1 || type > 4) fail(ErrorCode::kMalformedInput, "unknown file type at offset 5");
  return static_cast<FileType>(type);
}

// ---- header ----

Bytes serialize_header(const abe::AbeHeader& hdr) {
  ByteWriter w;
  w.raw(kFileMagic);
  w.u8(static_cast<std::uint8_t>(FileType::kHeader));
  write_header_body(w, hdr);
  return std::move(w).bytes();
}

abe::AbeHeader deserialize_header(ByteView bytes) {
  ByteReader r(bytes);
  auto magic = r.take(kFileMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kFileMagic.begin())) {
    fail(ErrorCode::kMalformedInput, "bad magic at offset 0");
  }
  if (r.u8() != static_cast<std::uint8_t>(FileType::kHeader)) {
    fail(ErrorCode::kMalformedInput, "expected header type byte at offset 4");
  }
  abe::AbeHeader hdr = read_header_body(r);
  r.expect_end();
  return hdr;
}

// ---- keys ----

Bytes serialize_public_key(const abe::PublicKey& pk) {
  ByteWriter w;
  put_frame(w, FileType::kPublicKey);
  w.u64(pk.epoch);
  put(w, pk.h);
  put(w, pk.t1);
  put(w, pk.h1);
  put(w, pk.t2);
  put(w, pk.h2);
  return std::move(w).bytes();
}

abe::PublicKey deserialize_public_key(ByteView bytes) {
  ByteReader r(bytes);
  expect_frame(r, FileType::kPublicKey);
  abe::PublicKey pk;
  pk.epoch = r.u64();
  pk.h = get_g2(r);
  pk.t1 = get_gt(r);
  pk.h1 = get_g2(r);
  pk.t2 = get_gt(r);
  pk.h2 = get_g2(r);
  r.expect_end();
  return pk;
}

Bytes serialize_master_key(const abe::MasterKey& mk) {
  ByteWriter w;
  put_frame(w, FileType::kMasterKey);
  w.u64(mk.epoch);
  for (const Scalar* s : {&mk.alpha1, &mk.beta1, &mk.alpha2, &mk.beta2}) w.raw(s->to_bytes());
  put(w, mk.g);
  put(w, mk.h);
  put(w, mk.g_delta1);
  put(w, mk.g_delta2);
  put(w, mk.g_delta3);
  for (const Scalar* s : {&mk.delta1, &mk.delta2, &mk.delta3}) w.raw(s->to_bytes());
  return std::move(w).bytes();
}

abe::MasterKey deserialize_master_key(ByteView bytes) {
  ByteReader r(bytes);
  expect_frame(r, FileType::kMasterKey);
  abe::MasterKey mk;
  mk.epoch = r.u64();
  for (Scalar* s : {&mk.alpha1, &mk.beta1, &mk.alpha2, &mk.beta2}) *s = get_scalar(r, true);
  mk.g = get_g1(r);
  mk.h = get_g2(r);
  mk.g_delta1 = get_g1(r);
  mk.g_delta2 = get_g1(r);
  mk.g_delta3 = get_g1(r);
  std::size_t at = r.offset();
  for (Scalar* s : {&mk.delta1, &mk.delta2, &mk.delta3}) *s = get_scalar(r, false);
  r.expect_end();
  if (!(mk.g * mk.delta1 == mk.g_delta1 && mk.g * mk.delta2 == mk.g_delta2 &&
        mk.g * mk.delta3 == mk.g_delta3)) {
    fail(ErrorCode::kMalformedInput, "master key delta components inconsistent at offset " + std::to_string(at));
  }
  return mk;
}

Bytes serialize_user_secret_key(const abe::UserSecretKey& sk) {
  ByteWriter w;
  put_frame(w, FileType::kUserSecretKey);
  w.u64(sk.epoch);
  for (const auto& e : sk.sk0) put(w, e);
  write_g1_triple(w, sk.sk_prime);
  w.u32(static_cast<std::uint32_t>(sk.attribute_keys.size()));
  for (const auto& [name, triple] : sk.attribute_keys) {
    w.u8(static_cast<std::uint8_t>(name.size()));
    w.raw(name);
    write_g1_triple(w, triple);
  }
  return std::move(w).bytes();
}

abe::UserSecretKey deserialize_user_secret_key(ByteView bytes) {
  ByteReader r(bytes);
  expect_frame(r, FileType::kUserSecretKey);
  abe::UserSecretKey sk;
  sk.epoch = r.u64();
  for (auto& e : sk.sk0) e = get_g2(r);
  sk.sk_prime = read_g1_triple(r);
  std::uint32_t count = r.u32();
  std::string previous;
  for (std::uint32_t k = 0; k < count; ++k) {
    std::size_t at = r.offset();
    auto name_bytes = r.take(r.u8());
    std::string name(name_bytes.begin(), name_bytes.end());
    try {
      validate_attribute_name(name);
    } catch (const Error& e) {
      fail(ErrorCode::kMalformedInput, std::string(e.what()) + " at offset " + std::to_string(at));
    }
    if (k > 0 && name <= previous) {
      fail(ErrorCode::kMalformedInput, "attributes not strictly sorted at offset " + std::to_string(at));
    }
    previous = name;
    sk.attribute_keys.emplace(std::move(name), read_g1_triple(r));
  }
  r.expect_end();
  return sk;
}

// ---- envelope ----

Bytes serialize_envelope(const Envelope& env) {
  ByteWriter w;
  w.raw(kFileMagic);
  w.u8(env.version);
  w.u8(static_cast<std::uint8_t>(FileType::kEnvelope));
  write_header_body(w, env.header);
  w.raw(env.nonce);
  w.raw(env.sealed);
  return std::move(w).bytes();
}

Envelope deserialize_envelope(ByteView bytes) {
  ByteReader r(bytes);
  expect_frame(r, FileType::kEnvelope);
  Envelope env;
  env.header = read_header_body(r);
  if (env.header.mode != abe::HeaderMode::kKem) {
    fail(ErrorCode::kMalformedInput, "envelope header must be in KEM mode");
  }
  auto nonce = r.take(kNonceBytes);
  std::copy(nonce.begin(), nonce.end(), env.nonce.begin());
  if (r.remaining() < kTagBytes) r.malformed("sealed body shorter than the authentication tag");
  auto body = r.take(r.remaining());
  env.sealed.assign(body.begin(), body.end());
  return env;
}

Envelope seal(const abe::PublicKey& pk, std::string_view policy_text, ByteView plaintext, Rng& rng) {
  const Msp msp = to_msp(parse_policy(policy_text));
  auto [hdr, key] = abe::encap(pk, msp, rng);

  Envelope env;
  env.header = std::move(hdr);
  rng.fill(env.nonce);
  const Bytes ad = serialize_header(env.header);

  CipherCtx ctx(EVP_CIPHER_CTX_new(), &EVP_CIPHER_CTX_free);
  env.sealed.resize(plaintext.size() + kTagBytes);
  int len = 0;
  bool ok = ctx && EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) == 1 &&
            EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kNonceBytes, nullptr) == 1 &&
            EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), env.nonce.data()) == 1 &&
            EVP_EncryptUpdate(ctx.get(), nullptr, &len, ad.data(), static_cast<int>(ad.size())) == 1;
  // EVP takes int lengths; feed large payloads in chunks.
  constexpr std::size_t kChunk = 1 << 30;
  for (std::size_t off = 0; ok && off < plaintext.size(); off += kChunk) {
    std::size_t n = std::min(kChunk, plaintext.size() - off);
    ok = EVP_EncryptUpdate(ctx.get(), env.sealed.data() + off, &len, plaintext.data() + off,
                           static_cast<int>(n)) == 1;
  }
  ok = ok && EVP_EncryptFinal_ex(ctx.get(), env.sealed.data() + plaintext.size(), &len) == 1 &&
       EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTagBytes,
                           env.sealed.data() + plaintext.size()) == 1;
  if (!ok) fail(ErrorCode::kInvalidArgument, "AES-256-GCM encryption failed");
  return env;
}

Bytes open(const Envelope& env, const abe::UserSecretKey& sk) {
  if (env.version != kFormatVersion) {
    fail(ErrorCode::kVersionUnsupported, "unsupported envelope version " + std::to_string(env.version));
  }
  if (env.sealed.size() < kTagBytes) fail(ErrorCode::kMalformedInput, "sealed body shorter than tag");
  const abe::SessionKey key = abe::decap(env.header, sk);
  const Bytes ad = serialize_header(env.header);

  const std::size_t n = env.sealed.size() - kTagBytes;
  Bytes plain(n);
  CipherCtx ctx(EVP_CIPHER_CTX_new(), &EVP_CIPHER_CTX_free);
  int len = 0;
  bool ok = ctx && EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) == 1 &&
            EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kNonceBytes, nullptr) == 1 &&
            EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), env.nonce.data()) == 1 &&
            EVP_DecryptUpdate(ctx.get(), nullptr, &len, ad.data(), static_cast<int>(ad.size())) == 1;
  constexpr std::size_t kChunk = 1 << 30;
  for (std::size_t off = 0; ok && off < n; off += kChunk) {
    std::size_t m = std::min(kChunk, n - off);
    ok = EVP_DecryptUpdate(ctx.get(), plain.data() + off, &len, env.sealed.data() + off,
                           static_cast<int>(m)) == 1;
  }
  Bytes tag(env.sealed.end() - kTagBytes, env.sealed.end());
  ok = ok && EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kTagBytes, tag.data()) == 1 &&
       EVP_DecryptFinal_ex(ctx.get(), plain.data() + n, &len) == 1;
  if (!ok) fail(ErrorCode::kAuthenticationFailure, "authentication failure: envelope rejected");
  return plain;
}

std::string fingerprint(ByteView serialized) {
  std::array<std::uint8_t, 32> digest;
  SHA256(serialized.data(), serialized.size(), digest.data());
  return to_base64(digest);
}

}  // namespace starcast
