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

#include "starcast/error.hpp"
#include "starcast/policy.hpp"
#include "test_util.hpp"

namespace starcast {
namespace {

using testing::brute_evaluate;
using testing::kExamplePolicy;

std::vector<std::int8_t> row(const Msp& m, std::size_t i) {
  return {m.entries.begin() + static_cast<std::ptrdiff_t>(i * m.cols),
          m.entries.begin() + static_cast<std::ptrdiff_t>((i + 1) * m.cols)};
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidArgument;
}

TEST(Parse, ExamplePolicyShape) {
  const PolicyAst got = parse_policy(kExamplePolicy);
  const PolicyAst want = PolicyAst::conj(
      PolicyAst::leaf("Alpha"),
      PolicyAst::disj(PolicyAst::leaf("Leader"),
                      PolicyAst::conj(PolicyAst::leaf("Blue"), PolicyAst::leaf("Member"))));
  EXPECT_TRUE(got == want);
  EXPECT_EQ(got.render(), R"(("Alpha" AND ("Leader" OR ("Blue" AND "Member"))))");
}

TEST(Parse, SingleLeaf) {
  EXPECT_TRUE(parse_policy(R"("A")") == PolicyAst::leaf("A"));
  EXPECT_TRUE(parse_policy("A") == PolicyAst::leaf("A"));
}

TEST(Parse, AndBindsTighterThanOr) {
  EXPECT_TRUE(parse_policy("a OR b AND c") ==
              PolicyAst::disj(PolicyAst::leaf("a"), PolicyAst::conj(PolicyAst::leaf("b"), PolicyAst::leaf("c"))));
  EXPECT_TRUE(parse_policy("a and b or c") ==
              PolicyAst::disj(PolicyAst::conj(PolicyAst::leaf("a"), PolicyAst::leaf("b")), PolicyAst::leaf("c")));
}

TEST(Parse, LeftAssociative) {
  EXPECT_TRUE(parse_policy("a AND b AND c") ==
              PolicyAst::conj(PolicyAst::conj(PolicyAst::leaf("a"), PolicyAst::leaf("b")), PolicyAst::leaf("c")));
}

TEST(Parse, QuotedEscapesAndKeywordsAsNames) {
  const PolicyAst ast = parse_policy(R"("AND" OR "say \"hi\"")");
  EXPECT_EQ(ast.leaves(), (std::vector<std::string>{"AND", "say \"hi\""}));
  EXPECT_TRUE(parse_policy(ast.render()) == ast);
}

TEST(Parse, SyntaxErrors) {
  for (std::string_view bad : {R"("A" AND)", "", "   ", "(a", "a)", "a b", "AND a", R"("unterminated)", "a OR OR b",
                               "()", R"("")"}) {
    EXPECT_EQ(code_of([&] { parse_policy(bad); }), ErrorCode::kPolicySyntax) << bad;
  }
}

TEST(Parse, ErrorCarriesOffset) {
  try {
    parse_policy("a AND (b OR )");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("offset 12"), std::string::npos) << e.what();
  }
}

TEST(Parse, RenderRoundTripOnRandomFormulas) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 200; ++i) {
    const PolicyAst ast = testing::random_policy(rng, 1 + rng() % 10, 6);
    EXPECT_TRUE(parse_policy(ast.render()) == ast);
  }
}

TEST(Attributes, Validation) {
  EXPECT_NO_THROW(validate_attribute_name("Alpha"));
  EXPECT_NO_THROW(validate_attribute_name("\xc3\xa9quipe"));
  EXPECT_THROW(validate_attribute_name(""), Error);
  EXPECT_THROW(validate_attribute_name(std::string(256, 'a')), Error);
  EXPECT_THROW(validate_attribute_name(std::string("\0a", 2)), Error);
  EXPECT_THROW(validate_attribute_name("\xff"), Error);
  EXPECT_THROW(validate_attribute_name("\xc3"), Error);
}

TEST(Attributes, CsvAndDuplicates) {
  const AttributeSet s = AttributeSet::parse_csv(" Alpha, Blue ,Leader");
  EXPECT_EQ(s.size(), 3u);
  EXPECT_TRUE(s.contains("Blue"));
  EXPECT_EQ(s.to_csv(), "Alpha,Blue,Leader");
  EXPECT_THROW(AttributeSet::parse_csv("A,A"), Error);
  EXPECT_THROW(AttributeSet::from_list({"x", "x"}), Error);
}

TEST(Msp, SingleLeaf) {
  const Msp m = to_msp(PolicyAst::leaf("A"));
  EXPECT_EQ(m.rows, 1u);
  EXPECT_EQ(m.cols, 1u);
  EXPECT_EQ(row(m, 0), (std::vector<std::int8_t>{1}));
  EXPECT_EQ(m.row_attribute[0], "A");
}

TEST(Msp, SingleAnd) {
  const Msp m = to_msp(parse_policy("A AND B"));
  ASSERT_EQ(m.rows, 2u);
  EXPECT_EQ(row(m, 0), (std::vector<std::int8_t>{1, 1}));
  EXPECT_EQ(row(m, 1), (std::vector<std::int8_t>{0, -1}));
}

TEST(Msp, ExamplePolicyMatrix) {
  const Msp m = to_msp(parse_policy(kExamplePolicy));
  ASSERT_EQ(m.rows, 4u);
  ASSERT_EQ(m.cols, 3u);
  EXPECT_EQ(m.row_attribute, (std::vector<std::string>{"Alpha", "Leader", "Blue", "Member"}));
  EXPECT_EQ(row(m, 0), (std::vector<std::int8_t>{1, 1, 0}));
  EXPECT_EQ(row(m, 1), (std::vector<std::int8_t>{0, -1, 0}));
  EXPECT_EQ(row(m, 2), (std::vector<std::int8_t>{0, -1, 1}));
  EXPECT_EQ(row(m, 3), (std::vector<std::int8_t>{0, 0, -1}));
}

TEST(Msp, ExamplePolicyAllSubsets) {
  const PolicyAst ast = parse_policy(kExamplePolicy);
  const Msp m = to_msp(ast);
  const std::vector<std::string> names = {"Alpha", "Leader", "Blue", "Member"};
  for (std::uint64_t mask = 0; mask < 16; ++mask) {
    const AttributeSet s = testing::subset(names, mask);
    EXPECT_EQ(accepts(m, s), brute_evaluate(ast.root(), s)) << mask;
  }
}

TEST(Msp, WorkedExampleKeys) {
  const Msp m = to_msp(parse_policy(kExamplePolicy));
  EXPECT_TRUE(accepts(m, {"Alpha", "Blue", "Leader"}));
  EXPECT_FALSE(accepts(m, {"Beta", "Blue", "Member"}));
}

TEST(Reconstruct, SingleAnd) {
  const Msp m = to_msp(parse_policy("A AND B"));
  const auto rec = reconstruct(m, {"A", "B"});
  ASSERT_TRUE(rec);
  EXPECT_EQ(rec->rows, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(rec->coefficients[0], Scalar::from_u64(1));
  EXPECT_EQ(rec->coefficients[1], Scalar::from_u64(1));
}

TEST(Reconstruct, S1UsesAlphaAndLeader) {
  const Msp m = to_msp(parse_policy(kExamplePolicy));
  const auto rec = reconstruct(m, {"Alpha", "Blue", "Leader"});
  ASSERT_TRUE(rec);
  EXPECT_EQ(rec->rows, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(rec->coefficients[0], Scalar::from_u64(1));
  EXPECT_EQ(rec->coefficients[1], Scalar::from_u64(1));
  EXPECT_TRUE(testing::reconstruction_hits_target(m, *rec));
}

TEST(Reconstruct, S4None) {
  const Msp m = to_msp(parse_policy(kExamplePolicy));
  EXPECT_FALSE(reconstruct(m, {"Beta", "Blue", "Member"}));
}

TEST(Reconstruct, DuplicateLeavesGetOwnRows) {
  const Msp m = to_msp(parse_policy("a AND (a OR b)"));
  EXPECT_EQ(m.rows, 3u);
  const auto rec = reconstruct(m, {"a"});
  ASSERT_TRUE(rec);
  EXPECT_TRUE(testing::reconstruction_hits_target(m, *rec));
}

TEST(Msp, BruteForceEquivalenceAndExactReconstruction) {
  std::mt19937_64 rng(2024);
  for (int f = 0; f < 60; ++f) {
    const std::size_t leaves = 1 + rng() % 10;
    const PolicyAst ast = testing::random_policy(rng, leaves, leaves);
    const Msp m = to_msp(ast);
    ASSERT_EQ(m.rows, leaves);
    ASSERT_EQ(m.cols, ast.and_gates() + 1);
    for (auto e : m.entries) ASSERT_TRUE(e >= -1 && e <= 1);
    const auto names = testing::distinct_leaves(ast);
    for (std::uint64_t mask = 0; mask < (1ULL << names.size()); ++mask) {
      const AttributeSet s = testing::subset(names, mask);
      const bool want = brute_evaluate(ast.root(), s);
      const auto rec = reconstruct(m, s);
      ASSERT_EQ(rec.has_value(), want) << ast.render() << " mask " << mask;
      if (rec) ASSERT_TRUE(testing::reconstruction_hits_target(m, *rec));
    }
  }
}

TEST(Msp, Monotone) {
  std::mt19937_64 rng(8);
  for (int f = 0; f < 50; ++f) {
    const PolicyAst ast = testing::random_policy(rng, 1 + rng() % 8, 6);
    const Msp m = to_msp(ast);
    const auto names = testing::distinct_leaves(ast);
    const std::uint64_t mask = rng() & ((1ULL << names.size()) - 1);
    AttributeSet s = testing::subset(names, mask);
    if (!accepts(m, s)) continue;
    s.insert(names[rng() % names.size()]);
    s.insert("unrelated");
    EXPECT_TRUE(accepts(m, s));
  }
  const Msp m = to_msp(parse_policy(kExamplePolicy));
  EXPECT_TRUE(accepts(m, {"Alpha", "Leader", "Blue", "Member"}));
}

TEST(Msp, SerializationRoundTripAndFormat) {
  const Msp m = to_msp(parse_policy("A AND B"));
  const Bytes b = serialize_msp(m);
  const Bytes want = {0, 0, 0, 2, 0, 0, 0, 2, 1, 1, 0, 0xff, 1, 'A', 1, 'B'};
  EXPECT_EQ(b, want);
  const Msp back = deserialize_msp(b);
  EXPECT_EQ(back.entries, m.entries);
  EXPECT_EQ(back.row_attribute, m.row_attribute);

  Bytes bad = b;
  bad[8] = 2;  // entry outside {-1, 0, 1}
  EXPECT_THROW(deserialize_msp(bad), Error);
  bad = b;
  bad.push_back(0);
  EXPECT_THROW(deserialize_msp(bad), Error);
  EXPECT_THROW(deserialize_msp(ByteView(b.data(), b.size() - 1)), Error);
}

TEST(Msp, DigestDependsOnPolicy) {
  EXPECT_NE(msp_digest(to_msp(parse_policy("A AND B"))), msp_digest(to_msp(parse_policy("A OR B"))));
  EXPECT_EQ(msp_digest(to_msp(parse_policy("A AND B"))), msp_digest(to_msp(parse_policy("\"A\" and \"B\""))));
}

}  // namespace
}  // namespace starcast
