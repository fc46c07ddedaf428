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

#include <openssl/evp.h>
#include <openssl/rand.h>
#include <openssl/sha.h>

#include <algorithm>
#include <cstring>

#include "starcast/bytes.hpp"
#include "starcast/error.hpp"
#include "starcast/rng.hpp"

namespace starcast {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kPolicySyntax: return "policy syntax error";
    case ErrorCode::kPolicyNotSatisfied: return "policy not satisfied";
    case ErrorCode::kAuthenticationFailure: return "authentication failure";
    case ErrorCode::kEpochMismatch: return "epoch mismatch";
    case ErrorCode::kMalformedInput: return "malformed input";
    case ErrorCode::kVersionUnsupported: return "version unsupported";
    case ErrorCode::kUnsupportedLevel: return "unsupported security level";
    case ErrorCode::kRngFailure: return "rng failure";
    case ErrorCode::kNotFound: return "not found";
    case ErrorCode::kAlreadyExists: return "already exists";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kNetwork: return "network error";
  }
  return "unknown error";
}

std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) fail(ErrorCode::kInvalidArgument, "odd-length hex string");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]), lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) fail(ErrorCode::kInvalidArgument, "invalid hex digit");
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

std::string to_base64(ByteView bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                          static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

void ByteWriter::u16(std::uint16_t v) {
  u8(static_cast<std::uint8_t>(v >> 8));
  u8(static_cast<std::uint8_t>(v));
}

void ByteWriter::u32(std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) u8(static_cast<std::uint8_t>(v >> s));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int s = 56; s >= 0; s -= 8) u8(static_cast<std::uint8_t>(v >> s));
}

void ByteWriter::blob(ByteView bytes) {
  if (bytes.size() > UINT32_MAX) fail(ErrorCode::kInvalidArgument, "field exceeds 4 GiB");
  u32(static_cast<std::uint32_t>(bytes.size()));
  raw(bytes);
}

void ByteReader::malformed(const std::string& what) const {
  fail(ErrorCode::kMalformedInput, what + " at offset " + std::to_string(pos_));
}

ByteView ByteReader::take(std::size_t n) {
  if (remaining() < n) {
    malformed("truncated input: need " + std::to_string(n) + " bytes, have " +
              std::to_string(remaining()));
  }
  auto out = in_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t ByteReader::u8() { return take(1)[0]; }

std::uint16_t ByteReader::u16() {
  auto b = take(2);
  return static_cast<std::uint16_t>(b[0] << 8 | b[1]);
}

std::uint32_t ByteReader::u32() {
  auto b = take(4);
  std::uint32_t v = 0;
  for (auto x : b) v = v << 8 | x;
  return v;
}

std::uint64_t ByteReader::u64() {
  auto b = take(8);
  std::uint64_t v = 0;
  for (auto x : b) v = v << 8 | x;
  return v;
}

ByteView ByteReader::blob(std::size_t max_len) {
  std::size_t at = pos_;
  std::uint32_t n = u32();
  if (n > max_len) {
    pos_ = at;
    malformed("length field " + std::to_string(n) + " exceeds limit " + std::to_string(max_len));
  }
  return take(n);
}

std::string ByteReader::blob_string(std::size_t max_len) {
  auto b = blob(max_len);
  return {b.begin(), b.end()};
}

void ByteReader::expect_end() const {
  if (remaining() != 0) malformed(std::to_string(remaining()) + " trailing bytes");
}

void SystemRng::fill(std::span<std::uint8_t> out) {
  if (out.empty()) return;
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    fail(ErrorCode::kRngFailure, "RAND_bytes failed");
  }
}

DeterministicRng::DeterministicRng(std::uint64_t seed) {
  ByteWriter w;
  w.u64(seed);
  seed_ = std::move(w).bytes();
}

DeterministicRng::DeterministicRng(ByteView seed) : seed_(seed.begin(), seed.end()) {}

void DeterministicRng::refill() {
  ByteWriter w;
  w.raw(seed_);
  w.u64(counter_++);
  SHA256(w.bytes().data(), w.size(), block_);
  used_ = 0;
}

void DeterministicRng::fill(std::span<std::uint8_t> out) {
  std::lock_guard lock(mu_);
  std::size_t pos = 0;
  while (pos < out.size()) {
    if (used_ == sizeof(block_)) refill();
    std::size_t n = std::min(out.size() - pos, sizeof(block_) - used_);
    std::memcpy(out.data() + pos, block_ + used_, n);
    used_ += n;
    pos += n;
  }
}

}  // namespace starcast
