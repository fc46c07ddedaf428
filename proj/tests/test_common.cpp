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
#include <openssl/sha.h>

#include "starcast/bytes.hpp"
#include "starcast/error.hpp"
#include "starcast/rng.hpp"

namespace starcast {
namespace {

TEST(Bytes, WriterReaderRoundTrip) {
  ByteWriter w;
  w.u8(0xab);
  w.u16(0x1234);
  w.u32(0xdeadbeef);
  w.u64(0x0102030405060708ULL);
  w.blob(std::string_view("xyz"));
  const Bytes b = std::move(w).bytes();
  EXPECT_EQ(to_hex(b), "ab1234deadbeef010203040506070800000003" + to_hex(as_bytes("xyz")));

  ByteReader r(b);
  EXPECT_EQ(r.u8(), 0xab);
  EXPECT_EQ(r.u16(), 0x1234);
  EXPECT_EQ(r.u32(), 0xdeadbeefu);
  EXPECT_EQ(r.u64(), 0x0102030405060708ULL);
  EXPECT_EQ(r.blob_string(8), "xyz");
  EXPECT_NO_THROW(r.expect_end());
}

TEST(Bytes, ReaderReportsOffsetOnTruncation) {
  const Bytes b = {0, 0, 0};
  ByteReader r(b);
  r.u8();
  try {
    r.u32();
    FAIL() << "expected throw";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedInput);
    EXPECT_NE(std::string(e.what()).find("offset 1"), std::string::npos);
  }
}

TEST(Bytes, BlobLengthIsBounded) {
  ByteWriter w;
  w.blob(std::string_view("abcdef"));
  ByteReader r(w.bytes());
  EXPECT_THROW(r.blob(3), Error);
}

TEST(Bytes, TrailingBytesRejected) {
  const Bytes b = {1, 2};
  ByteReader r(b);
  r.u8();
  EXPECT_THROW(r.expect_end(), Error);
}

TEST(Bytes, HexAndBase64) {
  EXPECT_EQ(from_hex("00ff10"), (Bytes{0x00, 0xff, 0x10}));
  EXPECT_THROW(from_hex("abc"), Error);
  EXPECT_THROW(from_hex("zz"), Error);
  EXPECT_EQ(to_base64(as_bytes("foobar")), "Zm9vYmFy");
  EXPECT_EQ(to_base64(as_bytes("fo")), "Zm8=");
}

TEST(Rng, DeterministicStreamMatchesHashCounterConstruction) {
  DeterministicRng rng(7);
  Bytes got(40);
  rng.fill(got);

  // Independent rebuild: SHA-256(be64 seed || be64 counter) blocks.
  Bytes expect;
  for (std::uint64_t ctr = 0; ctr < 2; ++ctr) {
    std::uint8_t in[16] = {};
    in[7] = 7;
    for (int i = 0; i < 8; ++i) in[8 + i] = static_cast<std::uint8_t>(ctr >> (56 - 8 * i));
    std::uint8_t out[32];
    SHA256(in, sizeof in, out);
    expect.insert(expect.end(), out, out + 32);
  }
  expect.resize(40);
  EXPECT_EQ(got, expect);
}

TEST(Rng, SplitReadsMatchOneRead) {
  DeterministicRng a(99), b(99);
  Bytes whole(100), parts(100);
  a.fill(whole);
  b.fill(std::span(parts).subspan(0, 3));
  b.fill(std::span(parts).subspan(3, 50));
  b.fill(std::span(parts).subspan(53));
  EXPECT_EQ(whole, parts);
}

TEST(Rng, SystemRngProducesVaryingOutput) {
  SystemRng rng;
  Bytes a(32), b(32);
  rng.fill(a);
  rng.fill(b);
  EXPECT_NE(a, b);
}

TEST(Error, CodeNamesAreDistinct) {
  EXPECT_EQ(error_code_name(ErrorCode::kPolicyNotSatisfied), "policy not satisfied");
  EXPECT_NE(error_code_name(ErrorCode::kIo), error_code_name(ErrorCode::kNetwork));
}

}  // namespace
}  // namespace starcast
