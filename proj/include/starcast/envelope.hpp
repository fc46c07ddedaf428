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

// Hybrid sealing (ABE KEM + AES-256-GCM) and the binary file formats.
//
// Every file starts with "SCST", a format version byte and a type byte.
// Integers are big-endian; variable fields carry a u32 length prefix.
//
//   envelope  := "SCST" ver type=4 header-body nonce[12] ciphertext tag[16]
//   header    := "SCST" type=5 header-body         (AEAD associated data)
//   header-body := mode u8 | epoch u64 | policy blob | msp digest[32] |
//                  n1 u32 | c0 (3 x G2) | n1 x (3 x G1) | [c' GT]
//
// so |envelope| = |header| + |plaintext| + 29.

#include <array>
#include <cstdint>
#include <string_view>

#include "starcast/abe.hpp"
#include "starcast/bytes.hpp"
#include "starcast/rng.hpp"

namespace starcast {

inline constexpr std::string_view kFileMagic = "SCST";
inline constexpr std::uint8_t kFormatVersion = 1;
inline constexpr std::size_t kNonceBytes = 12;
inline constexpr std::size_t kTagBytes = 16;
/// Version byte + nonce + tag.
inline constexpr std::size_t kEnvelopeOverhead = 1 + kNonceBytes + kTagBytes;
inline constexpr std::size_t kMaxPolicyBytes = 1 << 16;

enum class FileType : std::uint8_t {
  kPublicKey = 1,
  kMasterKey = 2,
  kUserSecretKey = 3,
  kEnvelope = 4,
  kHeader = 5,
};

std::string_view file_type_name(FileType type);

/// Validates magic and version and returns the type byte.
FileType peek_file_type(ByteView bytes);

struct Envelope {
  std::uint8_t version = kFormatVersion;
  abe::AbeHeader header;
  std::array<std::uint8_t, kNonceBytes> nonce{};
  Bytes sealed;  // ciphertext || tag

  bool operator==(const Envelope&) const = default;
};

/// parse -> compile -> encap -> AES-256-GCM with the serialized header as
/// associated data. Exactly one encapsulation regardless of payload size.
Envelope seal(const abe::PublicKey& pk, std::string_view policy_text, ByteView plaintext, Rng& rng);

/// Throws kPolicyNotSatisfied, kEpochMismatch, kAuthenticationFailure or
/// kVersionUnsupported.
Bytes open(const Envelope& env, const abe::UserSecretKey& sk);

Bytes serialize_header(const abe::AbeHeader& hdr);
abe::AbeHeader deserialize_header(ByteView bytes);

Bytes serialize_public_key(const abe::PublicKey& pk);
abe::PublicKey deserialize_public_key(ByteView bytes);

Bytes serialize_master_key(const abe::MasterKey& mk);
abe::MasterKey deserialize_master_key(ByteView bytes);

Bytes serialize_user_secret_key(const abe::UserSecretKey& sk);
abe::UserSecretKey deserialize_user_secret_key(ByteView bytes);

Bytes serialize_envelope(const Envelope& env);
Envelope deserialize_envelope(ByteView bytes);

/// Fixed part of a serialized header other than group elements:
/// magic, type, mode, epoch, policy length, digest and row count.
inline constexpr std::size_t kHeaderFraming = 4 + 1 + 1 + 8 + 4 + 32 + 4;

/// SHA-256 over the serialized key, base64.
std::string fingerprint(ByteView serialized);

}  // namespace starcast
