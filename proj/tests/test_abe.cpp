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

#include <gtest/gtest.h>
#include <openssl/evp.h>
#include <openssl/kdf.h>

#include <random>

#include "starcast/abe.hpp"
#include "starcast/error.hpp"
#include "test_util.hpp"

namespace starcast::abe {
namespace {

using starcast::testing::kExamplePolicy;

class AbeTest : public ::testing::Test {
 protected:
  void SetUp() override {
    DeterministicRng rng(1);
    keys_ = setup(default_context(), rng);
  }
  Msp example_msp() const { return to_msp(parse_policy(kExamplePolicy)); }

  KeyPair keys_;
  DeterministicRng rng_{2};
};

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidArgument;
}

// HKDF-SHA256 through the EVP_PKEY interface, empty salt.
SessionKey reference_kdf(const Gt& t) {
  const auto ikm = t.to_bytes();
  EVP_PKEY_CTX* ctx = EVP_PKEY_CTX_new_id(EVP_PKEY_HKDF, nullptr);
  SessionKey out{};
  std::size_t len = out.size();
  EXPECT_EQ(EVP_PKEY_derive_init(ctx), 1);
  EXPECT_EQ(EVP_PKEY_CTX_set_hkdf_md(ctx, EVP_sha256()), 1);
  EXPECT_EQ(EVP_PKEY_CTX_set1_hkdf_key(ctx, ikm.data(), static_cast<int>(ikm.size())), 1);
  EXPECT_EQ(EVP_PKEY_CTX_add1_hkdf_info(ctx, reinterpret_cast<const unsigned char*>(kKemContext.data()),
                                        static_cast<int>(kKemContext.size())),
            1);
  EXPECT_EQ(EVP_PKEY_derive(ctx, out.data(), &len), 1);
  EVP_PKEY_CTX_free(ctx);
  return out;
}

// T1^s1 T2^s2 rebuilt from master-key scalars.
Gt reference_blinding(const MasterKey& mk, const Scalar& s1, const Scalar& s2) {
  const Scalar e1 = mk.delta1 * mk.alpha1 + mk.delta3;
  const Scalar e2 = mk.delta2 * mk.alpha2 + mk.delta3;
  return pair(mk.g, mk.h).pow(e1 * s1 + e2 * s2);
}

TEST_F(AbeTest, SetupConsistency) {
  const auto& [pk, mk] = keys_;
  EXPECT_EQ(pair(mk.g_delta1, mk.h).pow(mk.alpha1) * pair(mk.g_delta3, mk.h), pk.t1);
  EXPECT_EQ(pair(mk.g_delta2, mk.h).pow(mk.alpha2) * pair(mk.g_delta3, mk.h), pk.t2);
  EXPECT_EQ(pair(mk.g, pk.h1), pair(mk.g, mk.h).pow(mk.alpha1));
  EXPECT_EQ(pair(mk.g, pk.h2), pair(mk.g, mk.h).pow(mk.alpha2));
  EXPECT_EQ(mk.g * mk.delta1, mk.g_delta1);
  EXPECT_FALSE(mk.alpha1.is_zero());
  EXPECT_FALSE(mk.beta2.is_zero());
  EXPECT_EQ(pk.epoch, 0u);
  EXPECT_EQ(mk.epoch, 0u);
}

TEST_F(AbeTest, SetupIsFresh) {
  SystemRng rng;
  EXPECT_FALSE(setup(default_context(), rng).pk.t1 == setup(default_context(), rng).pk.t1);
}

TEST_F(AbeTest, KeygenShapeAndRandomization) {
  const auto a = keygen(keys_.mk, {"Alpha", "Blue", "Leader"}, rng_);
  const auto b = keygen(keys_.mk, {"Alpha", "Blue", "Leader"}, rng_);
  EXPECT_EQ(a.attribute_keys.size(), 3u);
  EXPECT_EQ(a.attributes(), (AttributeSet{"Alpha", "Blue", "Leader"}));
  EXPECT_FALSE(a.sk0[0] == b.sk0[0]);
  EXPECT_FALSE(a.attribute_keys.at("Blue")[0] == b.attribute_keys.at("Blue")[0]);
  EXPECT_FALSE(a.sk_prime[2] == b.sk_prime[2]);
}

TEST_F(AbeTest, WorkedExampleElementRoundTrip) {
  const Gt m = Gt::random(rng_);
  const AbeHeader hdr = encrypt_element(keys_.pk, example_msp(), m, rng_);
  EXPECT_EQ(decrypt_element(hdr, keygen(keys_.mk, {"Alpha", "Blue", "Leader"}, rng_)), m);
  EXPECT_EQ(code_of([&] { decrypt_element(hdr, keygen(keys_.mk, {"Beta", "Blue", "Member"}, rng_)); }),
            ErrorCode::kPolicyNotSatisfied);
}

TEST_F(AbeTest, IdentityMessage) {
  const AbeHeader hdr = encrypt_element(keys_.pk, example_msp(), Gt(), rng_);
  EXPECT_TRUE(decrypt_element(hdr, keygen(keys_.mk, {"Alpha", "Leader"}, rng_)).is_identity());
}

TEST_F(AbeTest, SingleAttributeHandExpansion) {
  // Policy "A": M = [[1]], gamma = 1. Rebuild z1 and z2 term by term.
  const Msp msp = to_msp(parse_policy("A"));
  const Scalar s1 = Scalar::random(rng_), s2 = Scalar::random(rng_);
  const Gt m = Gt::random(rng_);
  const AbeHeader hdr = detail::encrypt_with(keys_.pk, msp, s1, s2, m);
  const UserSecretKey sk = keygen(keys_.mk, {"A"}, rng_);

  Gt z1 = *hdr.c_prime, z2;
  for (int l = 0; l < 3; ++l) {
    z1 *= pair(hdr.rows[0][l], sk.sk0[l]);
    z2 *= pair(sk.sk_prime[l] + sk.attribute_keys.at("A")[l], hdr.c0[l]);
  }
  EXPECT_EQ(z1 * z2.inverse(), m);
  EXPECT_EQ(decrypt_element(hdr, sk), m);
}

TEST_F(AbeTest, HeaderComponentsMatchDirectFormula) {
  const Msp msp = example_msp();
  const Scalar s1 = Scalar::random(rng_), s2 = Scalar::random(rng_);
  const AbeHeader hdr = detail::encrypt_with(keys_.pk, msp, s1, s2, std::nullopt);
  EXPECT_EQ(hdr.c0[0], keys_.pk.h1 * s1);
  EXPECT_EQ(hdr.c0[1], keys_.pk.h2 * s2);
  EXPECT_EQ(hdr.c0[2], keys_.pk.h * (s1 + s2));
  ASSERT_EQ(hdr.rows.size(), msp.rows);
  for (std::size_t i = 0; i < msp.rows; ++i) {
    for (int l = 1; l <= 3; ++l) {
      G1 want = hash_to_g1(HashLabel::for_attribute(msp.row_attribute[i], l, 1)) * s1 +
                hash_to_g1(HashLabel::for_attribute(msp.row_attribute[i], l, 2)) * s2;
      for (std::size_t j = 0; j < msp.cols; ++j) {
        const G1 col = hash_to_g1(HashLabel::for_index(static_cast<std::uint32_t>(j + 1), l, 1)) * s1 +
                       hash_to_g1(HashLabel::for_index(static_cast<std::uint32_t>(j + 1), l, 2)) * s2;
        want += col * Scalar::from_int(msp.at(i, j));
      }
      EXPECT_EQ(hdr.rows[i][l - 1], want) << "row " << i << " slot " << l;
    }
  }
  EXPECT_FALSE(hdr.c_prime);
  EXPECT_EQ(hdr.mode, HeaderMode::kKem);
}

TEST_F(AbeTest, KemMatchesIndependentRecomputation) {
  DeterministicRng enc_rng(77), mirror(77);
  const auto [hdr, key] = encap(keys_.pk, example_msp(), enc_rng);
  const Scalar s1 = Scalar::random(mirror), s2 = Scalar::random(mirror);
  const SessionKey want = reference_kdf(reference_blinding(keys_.mk, s1, s2));
  EXPECT_EQ(key, want);
  EXPECT_EQ(decap(hdr, keygen(keys_.mk, {"Alpha", "Blue", "Leader"}, rng_)), want);
}

TEST_F(AbeTest, EncapIsFresh) {
  const auto a = encap(keys_.pk, example_msp(), rng_);
  const auto b = encap(keys_.pk, example_msp(), rng_);
  EXPECT_NE(a.second, b.second);
  EXPECT_FALSE(a.first == b.first);
  EXPECT_EQ(a.second.size(), 32u);
}

TEST_F(AbeTest, DecapRejections) {
  const auto [hdr, key] = encap(keys_.pk, example_msp(), rng_);
  EXPECT_EQ(code_of([&] { decap(hdr, keygen(keys_.mk, {"Beta", "Blue", "Member"}, rng_)); }),
            ErrorCode::kPolicyNotSatisfied);
  EXPECT_EQ(code_of([&] { decap(hdr, UserSecretKey{}); }), ErrorCode::kPolicyNotSatisfied);

  DeterministicRng other(9);
  const KeyPair next = setup(default_context(), other, 1);
  EXPECT_EQ(code_of([&] { decap(hdr, keygen(next.mk, {"Alpha", "Leader"}, rng_)); }), ErrorCode::kEpochMismatch);

  EXPECT_EQ(code_of([&] { decrypt_element(hdr, keygen(keys_.mk, {"Alpha", "Leader"}, rng_)); }),
            ErrorCode::kInvalidArgument);
}

TEST_F(AbeTest, EmptyKeyFailsEverything) {
  const auto sk = keygen(keys_.mk, {}, rng_);
  EXPECT_TRUE(sk.attribute_keys.empty());
  const auto [hdr, key] = encap(keys_.pk, to_msp(parse_policy("A")), rng_);
  EXPECT_EQ(code_of([&] { decap(hdr, sk); }), ErrorCode::kPolicyNotSatisfied);
}

TEST_F(AbeTest, SixPairingsRegardlessOfSize) {
  for (std::size_t n : {1u, 7u, 30u}) {
    std::string policy = "x0";
    AttributeSet attrs{"x0"};
    for (std::size_t i = 1; i < n; ++i) {
      policy += " AND x" + std::to_string(i);
      attrs.insert("x" + std::to_string(i));
    }
    const auto [hdr, key] = encap(keys_.pk, to_msp(parse_policy(policy)), rng_);
    const auto sk = keygen(keys_.mk, attrs, rng_);
    reset_pairing_count();
    EXPECT_EQ(decap(hdr, sk), key);
    EXPECT_EQ(pairing_count(), 6u) << n;
  }
}

TEST_F(AbeTest, MixAndMatchKeysFail) {
  const auto [hdr, key] = encap(keys_.pk, example_msp(), rng_);
  const auto a = keygen(keys_.mk, {"Alpha", "Blue"}, rng_);
  const auto b = keygen(keys_.mk, {"Leader", "Member"}, rng_);
  EXPECT_EQ(code_of([&] { decap(hdr, a); }), ErrorCode::kPolicyNotSatisfied);
  EXPECT_EQ(code_of([&] { decap(hdr, b); }), ErrorCode::kPolicyNotSatisfied);

  for (const auto* base : {&a, &b}) {
    for (const auto* prime : {&a, &b}) {
      UserSecretKey mix = *base;
      mix.sk_prime = prime->sk_prime;
      for (const auto& [name, triple] : a.attribute_keys) mix.attribute_keys[name] = triple;
      for (const auto& [name, triple] : b.attribute_keys) mix.attribute_keys[name] = triple;
      EXPECT_NE(decap(hdr, mix), key);
    }
  }
}

TEST_F(AbeTest, RandomPolicyCorrectness) {
  std::mt19937_64 rng(31);
  int accepted = 0, rejected = 0;
  while (accepted < 25 || rejected < 25) {
    const PolicyAst ast = starcast::testing::random_policy(rng, 1 + rng() % 6, 5);
    const Msp msp = to_msp(ast);
    const auto names = starcast::testing::distinct_leaves(ast);
    const AttributeSet s = starcast::testing::subset(names, rng());
    const bool ok = starcast::testing::brute_evaluate(ast.root(), s);
    if ((ok && accepted >= 25) || (!ok && rejected >= 25)) continue;
    const Gt m = Gt::random(rng_);
    const AbeHeader hdr = encrypt_element(keys_.pk, msp, m, rng_);
    const auto sk = keygen(keys_.mk, s, rng_);
    if (ok) {
      EXPECT_EQ(decrypt_element(hdr, sk), m) << ast.render();
      ++accepted;
    } else {
      EXPECT_EQ(code_of([&] { decrypt_element(hdr, sk); }), ErrorCode::kPolicyNotSatisfied) << ast.render();
      ++rejected;
    }
  }
}

}  // namespace
}  // namespace starcast::abe
