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

#include <random>
#include <set>

#include "starcast/error.hpp"
#include "starcast/groups.hpp"

namespace starcast {
namespace {

constexpr std::string_view kBls12381Order = "73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001";

TEST(Context, StandardCurveOrder) {
  const GroupContext ctx = generate_context("128-bit");
  EXPECT_EQ(to_hex(ctx.order), kBls12381Order);
  EXPECT_GT(ctx.order_bits(), 250u);
  EXPECT_FALSE(ctx.g.is_identity());
  EXPECT_FALSE(ctx.h.is_identity());
}

TEST(Context, DeterministicPerLevel) {
  const GroupContext a = generate_context("128-bit"), b = generate_context("128-bit");
  EXPECT_EQ(a.order, b.order);
  EXPECT_EQ(a.g, b.g);
  EXPECT_EQ(a.h, b.h);
}

TEST(Context, UnknownLevelRejected) {
  try {
    generate_context("unknown");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsupportedLevel);
  }
}

TEST(Pairing, SmallExponentBilinearity) {
  const auto& ctx = default_context();
  EXPECT_EQ(pair(ctx.g * Scalar::from_u64(3), ctx.h * Scalar::from_u64(5)),
            pair(ctx.g, ctx.h).pow(Scalar::from_u64(15)));
}

TEST(Pairing, IdentityInputs) {
  const auto& ctx = default_context();
  EXPECT_TRUE(pair(G1(), ctx.h).is_identity());
  EXPECT_TRUE(pair(ctx.g, G2()).is_identity());
}

TEST(Pairing, NonDegenerate) {
  const auto& ctx = default_context();
  EXPECT_FALSE(pair(ctx.g, ctx.h).is_identity());
}

TEST(Pairing, RandomExponentsBothOrders) {
  const auto& ctx = default_context();
  DeterministicRng rng(11);
  for (int i = 0; i < 5; ++i) {
    Scalar u = Scalar::random(rng), v = Scalar::random(rng);
    const Gt lhs = pair(ctx.g * u, ctx.h * v);
    EXPECT_EQ(lhs, pair(ctx.g * (u * v), ctx.h));
    EXPECT_EQ(lhs, pair(ctx.g, ctx.h * (u * v)));
    EXPECT_EQ(lhs, pair(ctx.g, ctx.h).pow(u * v));
  }
}

TEST(Pairing, CounterTracksEvaluations) {
  const auto& ctx = default_context();
  reset_pairing_count();
  pair(ctx.g, ctx.h);
  pair(ctx.g, ctx.h);
  EXPECT_EQ(pairing_count(), 2u);
  reset_pairing_count();
  EXPECT_EQ(pairing_count(), 0u);
}

TEST(Scalar, FieldArithmetic) {
  DeterministicRng rng(3);
  const Scalar a = Scalar::random_nonzero(rng);
  EXPECT_EQ(a * a.inverse(), Scalar::from_u64(1));
  EXPECT_EQ(Scalar::from_int(-1) + Scalar::from_u64(1), Scalar());
  EXPECT_EQ(a - a, Scalar());
  EXPECT_EQ(-a + a, Scalar());
  EXPECT_EQ(Scalar::from_bytes(a.to_bytes()), a);
}

TEST(Scalar, RejectsOutOfRangeEncoding) {
  const Bytes p = from_hex(kBls12381Order);
  EXPECT_THROW(Scalar::from_bytes(p), Error);
  Bytes p_minus_1 = p;
  p_minus_1.back() = 0x00;
  EXPECT_EQ(Scalar::from_bytes(p_minus_1), Scalar::from_int(-1));
  EXPECT_THROW(Scalar::from_bytes(Bytes(31, 0)), Error);
}

TEST(Groups, PointEncodingRoundTrip) {
  const auto& ctx = default_context();
  DeterministicRng rng(5);
  const Scalar k = Scalar::random(rng);
  const G1 p = ctx.g * k;
  const G2 q = ctx.h * k;
  EXPECT_EQ(G1::from_bytes(p.to_bytes()), p);
  EXPECT_EQ(G2::from_bytes(q.to_bytes()), q);
  EXPECT_EQ(G1::from_bytes(G1().to_bytes()), G1());
  const Gt t = pair(p, q);
  EXPECT_EQ(Gt::from_bytes(t.to_bytes()), t);
  EXPECT_EQ(Gt::from_bytes(Gt().to_bytes()), Gt());
}

TEST(Groups, MalformedPointsRejected) {
  const auto& ctx = default_context();
  auto g1 = ctx.g.to_bytes();
  g1[47] ^= 0x01;  // almost surely off the curve
  EXPECT_THROW(G1::from_bytes(g1), Error);
  EXPECT_THROW(G1::from_bytes(Bytes(47, 0)), Error);
  auto g2 = ctx.h.to_bytes();
  g2[95] ^= 0x01;
  EXPECT_THROW(G2::from_bytes(g2), Error);
  auto gt = pair(ctx.g, ctx.h).to_bytes();
  gt[575] ^= 0x01;
  EXPECT_THROW(Gt::from_bytes(gt), Error);
  EXPECT_THROW(Gt::from_bytes(Bytes(576, 0xff)), Error);
}

TEST(Groups, GtInverseAndPow) {
  const auto& ctx = default_context();
  const Gt e = pair(ctx.g, ctx.h);
  EXPECT_TRUE((e * e.inverse()).is_identity());
  EXPECT_TRUE(e.pow(Scalar::from_int(-1)) == e.inverse());
  EXPECT_TRUE(e.pow(Scalar()).is_identity());
}

TEST(Labels, AttributeFraming) {
  const Bytes got = encode_label(HashLabel::for_attribute("Blue", 2, 1));
  Bytes want = {0x01, 0x04, 'B', 'l', 'u', 'e', 0x02, 0x01};
  EXPECT_EQ(got, want);
}

TEST(Labels, NumericFraming) {
  const Bytes got = encode_label(HashLabel::for_index(3, 1, 2));
  Bytes want = {0x00, 0x00, 0x00, 0x00, 0x03, 0x01, 0x02};
  EXPECT_EQ(got, want);
}

TEST(Labels, RangeChecks) {
  EXPECT_THROW(encode_label(HashLabel::for_attribute("A", 0, 1)), Error);
  EXPECT_THROW(encode_label(HashLabel::for_attribute("A", 4, 1)), Error);
  EXPECT_THROW(encode_label(HashLabel::for_attribute("A", 1, 3)), Error);
  EXPECT_THROW(encode_label(HashLabel::for_attribute("", 1, 1)), Error);
  EXPECT_THROW(encode_label(HashLabel::for_attribute(std::string(256, 'x'), 1, 1)), Error);
  EXPECT_NO_THROW(encode_label(HashLabel::for_attribute(std::string(255, 'x'), 1, 1)));
  EXPECT_THROW(encode_label(HashLabel::for_index(0, 1, 1)), Error);
}

TEST(Labels, InjectiveOverSmallDomain) {
  std::set<Bytes> seen;
  std::size_t total = 0;
  auto add = [&](const HashLabel& l) {
    ++total;
    seen.insert(encode_label(l));
  };
  for (int slot = 1; slot <= 3; ++slot) {
    for (int side = 1; side <= 2; ++side) {
      for (int a = 0; a < 256; ++a) {
        add(HashLabel::for_attribute(std::string(1, static_cast<char>(a)), slot, side));
        for (int b = 0; b < 256; ++b) {
          add(HashLabel::for_attribute(std::string{static_cast<char>(a), static_cast<char>(b)}, slot, side));
        }
      }
      for (std::uint32_t j = 1; j <= 4; ++j) add(HashLabel::for_index(j, slot, side));
    }
  }
  EXPECT_EQ(seen.size(), total);
}

TEST(Labels, InjectiveOnRandomLongLabels) {
  std::mt19937_64 rng(17);
  std::set<Bytes> seen;
  std::set<std::tuple<std::string, int, int>> inputs;
  for (int i = 0; i < 3000; ++i) {
    std::string s(std::uniform_int_distribution<int>(1, 12)(rng), '\0');
    for (auto& c : s) c = static_cast<char>(rng() % 3 + 'a');
    const int slot = static_cast<int>(rng() % 3) + 1, side = static_cast<int>(rng() % 2) + 1;
    inputs.emplace(s, slot, side);
    seen.insert(encode_label(HashLabel::for_attribute(s, slot, side)));
  }
  EXPECT_EQ(seen.size(), inputs.size());
}

TEST(HashToG1, DeterministicAndSeparated) {
  const G1 a = hash_to_g1(HashLabel::for_attribute("Alpha", 1, 1));
  EXPECT_EQ(a, hash_to_g1(HashLabel::for_attribute("Alpha", 1, 1)));
  EXPECT_FALSE(a.is_identity());
  EXPECT_FALSE(a == hash_to_g1(HashLabel::for_attribute("Alpha", 1, 2)));
  EXPECT_FALSE(hash_to_g1(HashLabel::for_index(1, 1, 1)) == hash_to_g1(HashLabel::for_attribute("1", 1, 1)));
  // Output is a valid subgroup point, so it survives the checked decoder.
  EXPECT_EQ(G1::from_bytes(a.to_bytes()), a);
}

}  // namespace
}  // namespace starcast
