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

// Ciphertext-policy ABE over a Type-III pairing: Setup, KeyGen, Enc and Dec
// in element mode (message in GT) and KEM mode (32-byte session key).

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "starcast/groups.hpp"
#include "starcast/policy.hpp"
#include "starcast/rng.hpp"

namespace starcast::abe {

struct PublicKey {
  G2 h;
  Gt t1;  // e(g,h)^(delta1*alpha1 + delta3)
  G2 h1;  // h^alpha1
  Gt t2;  // e(g,h)^(delta2*alpha2 + delta3)
  G2 h2;  // h^alpha2
  std::uint64_t epoch = 0;

  bool operator==(const PublicKey&) const = default;
};

struct MasterKey {
  Scalar alpha1, beta1, alpha2, beta2;
  G1 g;
  G2 h;
  G1 g_delta1, g_delta2, g_delta3;
  Scalar delta1, delta2, delta3;
  std::uint64_t epoch = 0;

  bool operator==(const MasterKey&) const = default;
};

using G1Triple = std::array<G1, 3>;
using G2Triple = std::array<G2, 3>;

struct UserSecretKey {
  G2Triple sk0;
  /// One triple per attribute: (sk_{x,1}, sk_{x,2}, g^{-sigma_x}).
  std::map<std::string, G1Triple> attribute_keys;
  /// Third slot stores g^{delta3} * g^{-sigma'}.
  G1Triple sk_prime;
  std::uint64_t epoch = 0;

  AttributeSet attributes() const;
  bool operator==(const UserSecretKey&) const = default;
};

enum class HeaderMode : std::uint8_t { kElement = 0, kKem = 1 };

struct AbeHeader {
  HeaderMode mode = HeaderMode::kKem;
  std::uint64_t epoch = 0;
  Msp msp;
  G2Triple c0;
  std::vector<G1Triple> rows;
  std::optional<Gt> c_prime;  // element mode only

  bool operator==(const AbeHeader& o) const;
};

struct KeyPair {
  PublicKey pk;
  MasterKey mk;
};

inline constexpr std::size_t kSessionKeyBytes = 32;
using SessionKey = std::array<std::uint8_t, kSessionKeyBytes>;
inline constexpr std::string_view kKemContext = "STARCAST-KEM-v1";

KeyPair setup(const GroupContext& ctx, Rng& rng, std::uint64_t epoch = 0);

UserSecretKey keygen(const MasterKey& mk, const AttributeSet& attrs, Rng& rng);

AbeHeader encrypt_element(const PublicKey& pk, const Msp& msp, const Gt& message, Rng& rng);

/// Throws kPolicyNotSatisfied or kEpochMismatch. Exactly six pairings.
Gt decrypt_element(const AbeHeader& hdr, const UserSecretKey& sk);

std::pair<AbeHeader, SessionKey> encap(const PublicKey& pk, const Msp& msp, Rng& rng);

SessionKey decap(const AbeHeader& hdr, const UserSecretKey& sk);

/// HKDF-SHA256 over the canonical GT encoding, info = kKemContext.
SessionKey derive_session_key(const Gt& blinding);

/// Encapsulations performed on the calling thread since the last reset.
std::uint64_t encap_count();
void reset_encap_count();

namespace detail {

/// Encryption with caller-chosen randomness (s1, s2); the random paths
/// above draw s1, s2 and delegate here. c_prime absent selects KEM mode.
AbeHeader encrypt_with(const PublicKey& pk, const Msp& msp, const Scalar& s1, const Scalar& s2,
                       const std::optional<Gt>& message);

/// T1^s1 * T2^s2.
Gt blinding_factor(const PublicKey& pk, const Scalar& s1, const Scalar& s2);

/// z1 / z2 for the header's c' (identity in KEM mode).
Gt unblind(const AbeHeader& hdr, const UserSecretKey& sk);

}  // namespace detail
}  // namespace starcast::abe
