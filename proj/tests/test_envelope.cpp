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

#include <cstdlib>
#include <fstream>
#include <random>

#include "starcast/envelope.hpp"
#include "starcast/error.hpp"
#include "test_util.hpp"

namespace starcast {
namespace {

using testing::kExamplePolicy;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidArgument;
}

class EnvelopeTest : public ::testing::Test {
 protected:
  void SetUp() override {
    DeterministicRng rng(100);
    keys_ = abe::setup(default_context(), rng);
    s1_ = abe::keygen(keys_.mk, {"Alpha", "Blue", "Leader"}, rng);
    s4_ = abe::keygen(keys_.mk, {"Beta", "Blue", "Member"}, rng);
  }

  abe::KeyPair keys_;
  abe::UserSecretKey s1_, s4_;
  DeterministicRng rng_{101};
};

TEST_F(EnvelopeTest, RoundTripVariousLengths) {
  for (std::size_t n : {0u, 1u, 15u, 16u, 17u, 1000u, 70000u}) {
    Bytes msg(n);
    rng_.fill(msg);
    const Envelope env = seal(keys_.pk, kExamplePolicy, msg, rng_);
    EXPECT_EQ(env.sealed.size(), n + kTagBytes);
    const Envelope back = deserialize_envelope(serialize_envelope(env));
    EXPECT_TRUE(back == env);
    EXPECT_EQ(open(back, s1_), msg);
  }
}

TEST_F(EnvelopeTest, LargePayloadUsesOneEncapsulation) {
  Bytes msg(10u << 20);
  for (std::size_t i = 0; i < msg.size(); ++i) msg[i] = static_cast<std::uint8_t>(i * 131);
  abe::reset_encap_count();
  const Envelope env = seal(keys_.pk, kExamplePolicy, msg, rng_);
  EXPECT_EQ(abe::encap_count(), 1u);
  EXPECT_EQ(open(env, s1_), msg);
}

TEST_F(EnvelopeTest, NonSatisfyingKey) {
  const Envelope env = seal(keys_.pk, kExamplePolicy, as_bytes("hi"), rng_);
  EXPECT_EQ(code_of([&] { open(env, s4_); }), ErrorCode::kPolicyNotSatisfied);
}

TEST_F(EnvelopeTest, BodyBitFlipsFailAuthentication) {
  Bytes msg(40, 0x5a);
  const Envelope env = seal(keys_.pk, kExamplePolicy, msg, rng_);
  for (std::size_t byte = 0; byte < env.sealed.size(); byte += 7) {
    Envelope bad = env;
    bad.sealed[byte] ^= 0x10;
    EXPECT_EQ(code_of([&] { open(bad, s1_); }), ErrorCode::kAuthenticationFailure) << byte;
  }
  Envelope bad = env;
  bad.nonce[0] ^= 1;
  EXPECT_EQ(code_of([&] { open(bad, s1_); }), ErrorCode::kAuthenticationFailure);
}

TEST_F(EnvelopeTest, TamperedHeaderFailsAuthentication) {
  const Envelope env = seal(keys_.pk, kExamplePolicy, as_bytes("payload"), rng_);
  Envelope bad = env;
  bad.header.rows[0][0] += default_context().g;  // still a valid point
  EXPECT_EQ(code_of([&] { open(bad, s1_); }), ErrorCode::kAuthenticationFailure);
  bad = env;
  bad.header.c0[2] += default_context().h;
  EXPECT_EQ(code_of([&] { open(bad, s1_); }), ErrorCode::kAuthenticationFailure);
}

TEST_F(EnvelopeTest, UnsupportedVersion) {
  Envelope env = seal(keys_.pk, "A", as_bytes("x"), rng_);
  env.version = 2;
  EXPECT_EQ(code_of([&] { open(env, s1_); }), ErrorCode::kVersionUnsupported);
  Bytes raw = serialize_envelope(env);
  EXPECT_EQ(code_of([&] { deserialize_envelope(raw); }), ErrorCode::kVersionUnsupported);
}

TEST_F(EnvelopeTest, PolicySyntaxSurfacesFromSeal) {
  EXPECT_EQ(code_of([&] { seal(keys_.pk, "A AND", as_bytes("x"), rng_); }), ErrorCode::kPolicySyntax);
}

TEST_F(EnvelopeTest, SizeLaw) {
  for (std::size_t n1 : {1u, 4u, 16u, 64u}) {
    std::string policy = "r0";
    for (std::size_t i = 1; i < n1; ++i) policy += " OR r" + std::to_string(i);
    const Msp msp = to_msp(parse_policy(policy));
    const auto [kem, key] = abe::encap(keys_.pk, msp, rng_);
    const std::size_t framing = kHeaderFraming + msp.policy.size();
    EXPECT_EQ(serialize_header(kem).size(), 3 * n1 * G1::kBytes + 3 * G2::kBytes + framing);
    const auto elem = abe::encrypt_element(keys_.pk, msp, Gt(), rng_);
    EXPECT_EQ(serialize_header(elem).size(), 3 * n1 * G1::kBytes + 3 * G2::kBytes + Gt::kBytes + framing);

    const Envelope env = seal(keys_.pk, policy, Bytes(33, 1), rng_);
    EXPECT_EQ(serialize_envelope(env).size(), serialize_header(env.header).size() + 33 + kEnvelopeOverhead);
  }
}

TEST_F(EnvelopeTest, KeyRoundTrips) {
  EXPECT_TRUE(deserialize_public_key(serialize_public_key(keys_.pk)) == keys_.pk);
  const abe::MasterKey mk = deserialize_master_key(serialize_master_key(keys_.mk));
  EXPECT_EQ(serialize_master_key(mk), serialize_master_key(keys_.mk));
  EXPECT_TRUE(deserialize_user_secret_key(serialize_user_secret_key(s1_)) == s1_);
  const auto empty = abe::keygen(keys_.mk, {}, rng_);
  EXPECT_TRUE(deserialize_user_secret_key(serialize_user_secret_key(empty)) == empty);
}

TEST_F(EnvelopeTest, RandomValueRoundTrips) {
  std::mt19937_64 rng(55);
  for (int i = 0; i < 100; ++i) {
    switch (i % 5) {
      case 0: {
        auto kp = abe::setup(default_context(), rng_, rng() % 1000);
        ASSERT_TRUE(deserialize_public_key(serialize_public_key(kp.pk)) == kp.pk);
        const Bytes mk = serialize_master_key(kp.mk);
        ASSERT_EQ(serialize_master_key(deserialize_master_key(mk)), mk);
        break;
      }
      case 1: {
        AttributeSet s;
        for (std::size_t k = rng() % 6; k > 0; --k) s.insert("attr" + std::to_string(rng() % 20));
        const auto sk = abe::keygen(keys_.mk, s, rng_);
        ASSERT_TRUE(deserialize_user_secret_key(serialize_user_secret_key(sk)) == sk);
        break;
      }
      case 2: {
        const Msp msp = to_msp(testing::random_policy(rng, 1 + rng() % 6, 4));
        const auto hdr = abe::encrypt_element(keys_.pk, msp, Gt::random(rng_), rng_);
        ASSERT_TRUE(deserialize_header(serialize_header(hdr)) == hdr);
        break;
      }
      case 3: {
        const Msp msp = to_msp(testing::random_policy(rng, 1 + rng() % 6, 4));
        const auto hdr = abe::encap(keys_.pk, msp, rng_).first;
        ASSERT_TRUE(deserialize_header(serialize_header(hdr)) == hdr);
        break;
      }
      case 4: {
        Bytes msg(rng() % 300);
        rng_.fill(msg);
        const auto env = seal(keys_.pk, testing::random_policy(rng, 1 + rng() % 6, 4).render(), msg, rng_);
        ASSERT_TRUE(deserialize_envelope(serialize_envelope(env)) == env);
        break;
      }
    }
  }
}

TEST_F(EnvelopeTest, PeekAndFingerprint) {
  const Bytes pk = serialize_public_key(keys_.pk);
  EXPECT_EQ(peek_file_type(pk), FileType::kPublicKey);
  EXPECT_EQ(peek_file_type(serialize_user_secret_key(s1_)), FileType::kUserSecretKey);
  EXPECT_EQ(peek_file_type(serialize_header(abe::encap(keys_.pk, to_msp(parse_policy("A")), rng_).first)),
            FileType::kHeader);
  EXPECT_EQ(code_of([] { peek_file_type(as_bytes("nope")); }), ErrorCode::kMalformedInput);
  EXPECT_EQ(fingerprint(pk), fingerprint(pk));
  EXPECT_EQ(fingerprint(pk).size(), 44u);
}

// Every strict prefix, and a family of targeted corruptions, must be refused.
TEST_F(EnvelopeTest, MalformedInputsRejected) {
  const Envelope env = seal(keys_.pk, kExamplePolicy, as_bytes("fixture"), rng_);
  const Bytes good = serialize_envelope(env);
  for (std::size_t n = 0; n < good.size() - kTagBytes - 7; ++n) {
    EXPECT_THROW(deserialize_envelope(ByteView(good.data(), n)), Error) << n;
  }

  const std::size_t policy_len_at = 4 + 1 + 1 + 1 + 8;
  const std::size_t policy_at = policy_len_at + 4;
  const std::size_t digest_at = policy_at + env.header.msp.policy.size();
  const std::size_t n1_at = digest_at + 32;
  const std::size_t c0_at = n1_at + 4;
  const std::size_t rows_at = c0_at + 3 * G2::kBytes;

  struct Case {
    const char* name;
    std::function<void(Bytes&)> mutate;
    ErrorCode want;
  };
  const std::vector<Case> cases = {
      {"bad magic", [](Bytes& b) { b[0] = 'X'; }, ErrorCode::kMalformedInput},
      {"wrong type", [](Bytes& b) { b[5] = 1; }, ErrorCode::kMalformedInput},
      {"unknown type", [](Bytes& b) { b[5] = 99; }, ErrorCode::kMalformedInput},
      {"header type inside envelope", [](Bytes& b) { b[5] = 5; }, ErrorCode::kMalformedInput},
      {"element mode in envelope", [](Bytes& b) { b[6] = 0; }, ErrorCode::kMalformedInput},
      {"unknown mode", [](Bytes& b) { b[6] = 7; }, ErrorCode::kMalformedInput},
      {"huge policy length", [&](Bytes& b) { b[policy_len_at] = 0x7f; }, ErrorCode::kMalformedInput},
      {"non-canonical policy", [&](Bytes& b) { b[policy_at] = ' '; }, ErrorCode::kMalformedInput},
      {"policy swapped", [&](Bytes& b) { b[policy_at + 2] = 'B'; }, ErrorCode::kMalformedInput},
      {"digest mismatch", [&](Bytes& b) { b[digest_at] ^= 1; }, ErrorCode::kMalformedInput},
      {"row count", [&](Bytes& b) { b[n1_at + 3] = 5; }, ErrorCode::kMalformedInput},
      {"c0 not a point", [&](Bytes& b) { b[c0_at + 50] ^= 0x55; }, ErrorCode::kMalformedInput},
      {"row not a point", [&](Bytes& b) { b[rows_at + 20] ^= 0x55; }, ErrorCode::kMalformedInput},
      {"compression flag cleared", [&](Bytes& b) { b[rows_at] &= 0x7f; }, ErrorCode::kMalformedInput},
      {"tag truncated", [](Bytes& b) { b.resize(b.size() - 8 - 7 - 2); }, ErrorCode::kMalformedInput},
  };
  for (const auto& c : cases) {
    Bytes b = good;
    c.mutate(b);
    EXPECT_EQ(code_of([&] { deserialize_envelope(b); }), c.want) << c.name;
  }

  const Bytes pk = serialize_public_key(keys_.pk);
  Bytes b = pk;
  b.push_back(0);
  EXPECT_EQ(code_of([&] { deserialize_public_key(b); }), ErrorCode::kMalformedInput);
  EXPECT_EQ(code_of([&] { deserialize_public_key(ByteView(pk.data(), pk.size() - 1)); }),
            ErrorCode::kMalformedInput);
  b = pk;
  b[4] = 9;
  EXPECT_EQ(code_of([&] { deserialize_public_key(b); }), ErrorCode::kVersionUnsupported);
  EXPECT_EQ(code_of([&] { deserialize_user_secret_key(pk); }), ErrorCode::kMalformedInput);

  const Bytes mk = serialize_master_key(keys_.mk);
  b = mk;
  b[b.size() - 1] ^= 1;  // delta3 no longer matches g^delta3
  EXPECT_EQ(code_of([&] { deserialize_master_key(b); }), ErrorCode::kMalformedInput);

  const Bytes sk = serialize_user_secret_key(s1_);
  b = sk;
  b.resize(b.size() - 1);
  EXPECT_EQ(code_of([&] { deserialize_user_secret_key(b); }), ErrorCode::kMalformedInput);
}

// Frozen bytes for a fixed-seed setup, keygen and seal.
struct Golden {
  Bytes pk, mk, usk, env;
};

Golden make_golden() {
  DeterministicRng rng(20240601);
  const auto kp = abe::setup(default_context(), rng);
  const auto usk = abe::keygen(kp.mk, {"Alpha", "Blue", "Leader"}, rng);
  const auto env = seal(kp.pk, kExamplePolicy, as_bytes("golden payload"), rng);
  return {serialize_public_key(kp.pk), serialize_master_key(kp.mk), serialize_user_secret_key(usk),
          serialize_envelope(env)};
}

Bytes read_hex_fixture(const std::string& name) {
  std::ifstream in(std::string(STARCAST_FIXTURE_DIR) + "/" + name);
  std::string hex((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  while (!hex.empty() && std::isspace(static_cast<unsigned char>(hex.back()))) hex.pop_back();
  return from_hex(hex);
}

TEST(Golden, MatchesFrozenFixtures) {
  const Golden g = make_golden();
  if (std::getenv("STARCAST_WRITE_GOLDEN")) {
    for (const auto& [name, bytes] : {std::pair{"golden_pk.hex", &g.pk}, std::pair{"golden_mk.hex", &g.mk},
                                      std::pair{"golden_usk.hex", &g.usk}, std::pair{"golden_env.hex", &g.env}}) {
      std::ofstream(std::string(STARCAST_FIXTURE_DIR) + "/" + name) << to_hex(*bytes) << "\n";
    }
    GTEST_SKIP() << "fixtures rewritten";
  }
  EXPECT_EQ(to_hex(g.pk), to_hex(read_hex_fixture("golden_pk.hex")));
  EXPECT_EQ(to_hex(g.mk), to_hex(read_hex_fixture("golden_mk.hex")));
  EXPECT_EQ(to_hex(g.usk), to_hex(read_hex_fixture("golden_usk.hex")));
  EXPECT_EQ(to_hex(g.env), to_hex(read_hex_fixture("golden_env.hex")));

  const auto env = deserialize_envelope(read_hex_fixture("golden_env.hex"));
  const auto usk = deserialize_user_secret_key(read_hex_fixture("golden_usk.hex"));
  const Bytes plain = open(env, usk);
  EXPECT_EQ(std::string(plain.begin(), plain.end()), "golden payload");
}

}  // namespace
}  // namespace starcast
