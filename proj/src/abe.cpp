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

#include "starcast/abe.hpp"

#include <openssl/core_names.h>
#include <openssl/kdf.h>
#include <openssl/params.h>

#include <memory>
#include <unordered_map>

#include "starcast/error.hpp"

namespace starcast::abe {
namespace {

thread_local std::uint64_t tls_encaps = 0;

G1 h_attr(const std::string& x, int slot, int side) {
  return hash_to_g1(HashLabel::for_attribute(x, slot, side));
}

G1 h_index(std::uint32_t j, int slot, int side) {
  return hash_to_g1(HashLabel::for_index(j, slot, side));
}

void check_epoch(const AbeHeader& hdr, const UserSecretKey& sk) {
  if (hdr.epoch != sk.epoch) {
    fail(ErrorCode::kEpochMismatch, "ciphertext epoch " + std::to_string(hdr.epoch) +
                                        " does not match key epoch " + std::to_string(sk.epoch));
  }
}

}  // namespace

AttributeSet UserSecretKey::attributes() const {
  AttributeSet s;
  for (const auto& [name, _] : attribute_keys) s.insert(name);
  return s;
}

bool AbeHeader::operator==(const AbeHeader& o) const {
  return mode == o.mode && epoch == o.epoch && msp.policy == o.msp.policy &&
         msp.entries == o.msp.entries && msp.row_attribute == o.msp.row_attribute &&
         msp.rows == o.msp.rows && msp.cols == o.msp.cols && c0 == o.c0 && rows == o.rows &&
         c_prime == o.c_prime;
}

KeyPair setup(const GroupContext& ctx, Rng& rng, std::uint64_t epoch) {
  KeyPair kp;
  MasterKey& mk = kp.mk;
  mk.alpha1 = Scalar::random_nonzero(rng);
  mk.beta1 = Scalar::random_nonzero(rng);
  mk.alpha2 = Scalar::random_nonzero(rng);
  mk.beta2 = Scalar::random_nonzero(rng);
  mk.delta1 = Scalar::random(rng);
  mk.delta2 = Scalar::random(rng);
  mk.delta3 = Scalar::random(rng);
  mk.g = ctx.g;
  mk.h = ctx.h;
  mk.g_delta1 = ctx.g * mk.delta1;
  mk.g_delta2 = ctx.g * mk.delta2;
  mk.g_delta3 = ctx.g * mk.delta3;
  mk.epoch = epoch;

  const Gt egh = pair(ctx.g, ctx.h);
  PublicKey& pk = kp.pk;
  pk.h = ctx.h;
  pk.h1 = ctx.h * mk.alpha1;
  pk.h2 = ctx.h * mk.alpha2;
  pk.t1 = egh.pow(mk.delta1 * mk.alpha1 + mk.delta3);
  pk.t2 = egh.pow(mk.delta2 * mk.alpha2 + mk.delta3);
  pk.epoch = epoch;
  return kp;
}

UserSecretKey keygen(const MasterKey& mk, const AttributeSet& attrs, Rng& rng) {
  const Scalar rho1 = Scalar::random(rng);
  const Scalar rho2 = Scalar::random(rng);

  UserSecretKey sk;
  sk.epoch = mk.epoch;
  sk.sk0 = {mk.h * (mk.beta1 * rho1), mk.h * (mk.beta2 * rho2), mk.h * (rho1 + rho2)};

  const Scalar br1 = mk.beta1 * rho1, br2 = mk.beta2 * rho2, r12 = rho1 + rho2;
  const std::array<Scalar, 2> inv_alpha = {mk.alpha1.inverse(), mk.alpha2.inverse()};

  for (const auto& x : attrs) {
    const Scalar sigma = Scalar::random(rng);
    G1Triple k;
    for (int t = 1; t <= 2; ++t) {
      const Scalar& ia = inv_alpha[t - 1];
      k[t - 1] = h_attr(x, 1, t) * (br1 * ia) + h_attr(x, 2, t) * (br2 * ia) +
                 h_attr(x, 3, t) * (r12 * ia) + mk.g * (sigma * ia);
    }
    k[2] = mk.g * (-sigma);
    sk.attribute_keys.emplace(x, k);
  }

  const Scalar sigma_p = Scalar::random(rng);
  const std::array<const G1*, 2> g_delta = {&mk.g_delta1, &mk.g_delta2};
  for (int t = 1; t <= 2; ++t) {
    const Scalar& ia = inv_alpha[t - 1];
    sk.sk_prime[t - 1] = *g_delta[t - 1] + h_index(1, 1, t) * (br1 * ia) +
                         h_index(1, 2, t) * (br2 * ia) + h_index(1, 3, t) * (r12 * ia) +
                         mk.g * (sigma_p * ia);
  }
  sk.sk_prime[2] = mk.g_delta3 + mk.g * (-sigma_p);
  return sk;
}

namespace detail {

Gt blinding_factor(const PublicKey& pk, const Scalar& s1, const Scalar& s2) {
  return pk.t1.pow(s1) * pk.t2.pow(s2);
}

AbeHeader encrypt_with(const PublicKey& pk, const Msp& msp, const Scalar& s1, const Scalar& s2,
                       const std::optional<Gt>& message) {
  if (msp.rows == 0 || msp.cols == 0) fail(ErrorCode::kInvalidArgument, "empty span program");

  AbeHeader hdr;
  hdr.epoch = pk.epoch;
  hdr.msp = msp;
  hdr.c0 = {pk.h1 * s1, pk.h2 * s2, pk.h * (s1 + s2)};

  // Column terms H(0 j l 1)^s1 * H(0 j l 2)^s2, shared by every row.
  std::vector<std::array<G1, 3>> column(msp.cols);
  std::vector<bool> column_used(msp.cols, false);
  for (std::size_t i = 0; i < msp.rows; ++i) {
    for (std::size_t j = 0; j < msp.cols; ++j) column_used[j] = column_used[j] || msp.at(i, j) != 0;
  }
  for (std::size_t j = 0; j < msp.cols; ++j) {
    if (!column_used[j]) continue;
    const auto idx = static_cast<std::uint32_t>(j + 1);
    for (int l = 1; l <= 3; ++l) column[j][l - 1] = h_index(idx, l, 1) * s1 + h_index(idx, l, 2) * s2;
  }

  std::unordered_map<std::string, std::array<G1, 3>> attribute_terms;
  hdr.rows.reserve(msp.rows);
  for (std::size_t i = 0; i < msp.rows; ++i) {
    const std::string& x = msp.row_attribute[i];
    auto it = attribute_terms.find(x);
    if (it == attribute_terms.end()) {
      std::array<G1, 3> terms;
      for (int l = 1; l <= 3; ++l) terms[l - 1] = h_attr(x, l, 1) * s1 + h_attr(x, l, 2) * s2;
      it = attribute_terms.emplace(x, terms).first;
    }
    G1Triple row = it->second;
    for (std::size_t j = 0; j < msp.cols; ++j) {
      const std::int8_t e = msp.at(i, j);
      if (e == 0) continue;
      for (int l = 0; l < 3; ++l) {
        if (e > 0) {
          row[l] += column[j][l];
        } else {
          row[l] -= column[j][l];
        }
      }
    }
    hdr.rows.push_back(row);
  }

  if (message) {
    hdr.mode = HeaderMode::kElement;
    hdr.c_prime = blinding_factor(pk, s1, s2) * *message;
  } else {
    hdr.mode = HeaderMode::kKem;
  }
  return hdr;
}

Gt unblind(const AbeHeader& hdr, const UserSecretKey& sk) {
  check_epoch(hdr, sk);
  if (hdr.rows.size() != hdr.msp.rows) fail(ErrorCode::kMalformedInput, "header row count mismatch");
  auto rec = reconstruct(hdr.msp, sk.attributes());
  if (!rec) fail(ErrorCode::kPolicyNotSatisfied, "policy not satisfied by key attributes");

  std::array<G1, 3> ct_side, key_side = sk.sk_prime;
  for (std::size_t k = 0; k < rec->rows.size(); ++k) {
    const std::size_t i = rec->rows[k];
    const Scalar& gamma = rec->coefficients[k];
    const G1Triple& key = sk.attribute_keys.at(hdr.msp.row_attribute[i]);
    for (int l = 0; l < 3; ++l) {
      ct_side[l] += hdr.rows[i][l] * gamma;
      key_side[l] += key[l] * gamma;
    }
  }

  Gt z1 = hdr.c_prime.value_or(Gt());
  Gt z2;
  for (int l = 0; l < 3; ++l) {
    z1 *= pair(ct_side[l], sk.sk0[l]);
    z2 *= pair(key_side[l], hdr.c0[l]);
  }
  return z1 * z2.inverse();
}

}  // namespace detail

AbeHeader encrypt_element(const PublicKey& pk, const Msp& msp, const Gt& message, Rng& rng) {
  const Scalar s1 = Scalar::random(rng);
  const Scalar s2 = Scalar::random(rng);
  return detail::encrypt_with(pk, msp, s1, s2, message);
}

Gt decrypt_element(const AbeHeader& hdr, const UserSecretKey& sk) {
  if (hdr.mode != HeaderMode::kElement || !hdr.c_prime) {
    fail(ErrorCode::kInvalidArgument, "header is not in element mode");
  }
  return detail::unblind(hdr, sk);
}

std::pair<AbeHeader, SessionKey> encap(const PublicKey& pk, const Msp& msp, Rng& rng) {
  const Scalar s1 = Scalar::random(rng);
  const Scalar s2 = Scalar::random(rng);
  ++tls_encaps;
  AbeHeader hdr = detail::encrypt_with(pk, msp, s1, s2, std::nullopt);
  return {std::move(hdr), derive_session_key(detail::blinding_factor(pk, s1, s2))};
}

SessionKey decap(const AbeHeader& hdr, const UserSecretKey& sk) {
  if (hdr.mode != HeaderMode::kKem || hdr.c_prime) fail(ErrorCode::kInvalidArgument, "header is not in KEM mode");
  // With c' = 1 the quotient is (T1^s1 T2^s2)^-1.
  return derive_session_key(detail::unblind(hdr, sk).inverse());
}

SessionKey derive_session_key(const Gt& blinding) {
  const auto ikm = blinding.to_bytes();
  std::unique_ptr<EVP_KDF, decltype(&EVP_KDF_free)> kdf(EVP_KDF_fetch(nullptr, "HKDF", nullptr),
                                                        &EVP_KDF_free);
  if (!kdf) fail(ErrorCode::kInvalidArgument, "HKDF unavailable");
  std::unique_ptr<EVP_KDF_CTX, decltype(&EVP_KDF_CTX_free)> kctx(EVP_KDF_CTX_new(kdf.get()),
                                                                 &EVP_KDF_CTX_free);
  char digest[] = "SHA256";
  std::string info(kKemContext);
  OSSL_PARAM params[] = {
      OSSL_PARAM_construct_utf8_string(OSSL_KDF_PARAM_DIGEST, digest, 0),
      OSSL_PARAM_construct_octet_string(OSSL_KDF_PARAM_KEY, const_cast<std::uint8_t*>(ikm.data()),
                                        ikm.size()),
      OSSL_PARAM_construct_octet_string(OSSL_KDF_PARAM_INFO, info.data(), info.size()),
      OSSL_PARAM_construct_end()};
  SessionKey key;
  if (EVP_KDF_derive(kctx.get(), key.data(), key.size(), params) != 1) {
    fail(ErrorCode::kInvalidArgument, "HKDF derivation failed");
  }
  return key;
}

std::uint64_t encap_count() { return tls_encaps; }
void reset_encap_count() { tls_encaps = 0; }

}  // namespace starcast::abe
