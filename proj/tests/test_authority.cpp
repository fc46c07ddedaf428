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

#include "starcast/authority.hpp"
#include "starcast/envelope.hpp"
#include "starcast/error.hpp"
#include "test_util.hpp"

namespace starcast::authority {
namespace {

using starcast::testing::kExamplePolicy;
using starcast::testing::TempDir;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidArgument;
}

class RegistryTest : public ::testing::Test {
 protected:
  DeterministicRng rng_{500};
  Registry reg_ = Registry::create(default_context(), rng_);
};

TEST_F(RegistryTest, StartsEmptyAtEpochZero) {
  EXPECT_EQ(reg_.epoch(), 0u);
  EXPECT_TRUE(reg_.users().empty());
  EXPECT_EQ(reg_.master_key().epoch, 0u);
}

TEST_F(RegistryTest, RegisterRotatesAndReissues) {
  const auto alice = reg_.register_user("alice", {"Alpha", "Blue", "Leader"}, rng_);
  EXPECT_EQ(reg_.epoch(), 1u);
  EXPECT_EQ(alice.key.epoch, 1u);
  const auto bob = reg_.register_user("bob", {"Beta", "Blue", "Member"}, rng_);
  EXPECT_EQ(reg_.epoch(), 2u);
  EXPECT_EQ(reg_.current_keys().size(), 2u);
  EXPECT_EQ(reg_.current_keys().at(alice.user_id).epoch, 2u);
  EXPECT_EQ(reg_.user(alice.user_id).key_epoch, 2u);
  EXPECT_EQ(reg_.user(bob.user_id).fingerprint,
            fingerprint(serialize_user_secret_key(reg_.current_keys().at(bob.user_id))));
}

TEST_F(RegistryTest, NewUserCannotOpenEarlierEnvelopes) {
  const auto v = reg_.register_user("v", {"Alpha", "Leader"}, rng_);
  const Envelope old = seal(reg_.public_key(), kExamplePolicy, as_bytes("before"), rng_);
  const auto u = reg_.register_user("u", {"Alpha", "Leader"}, rng_);
  EXPECT_EQ(code_of([&] { open(old, u.key); }), ErrorCode::kEpochMismatch);

  const Envelope fresh = seal(reg_.public_key(), kExamplePolicy, as_bytes("after"), rng_);
  EXPECT_EQ(open(fresh, reg_.current_keys().at(v.user_id)), Bytes(as_bytes("after").begin(), as_bytes("after").end()));
}

TEST_F(RegistryTest, DuplicateNameRejected) {
  reg_.register_user("alice", {"A"}, rng_);
  const std::uint64_t epoch = reg_.epoch();
  EXPECT_EQ(code_of([&] { reg_.register_user("alice", {"B"}, rng_); }), ErrorCode::kAlreadyExists);
  EXPECT_EQ(reg_.epoch(), epoch);
}

TEST_F(RegistryTest, NameValidation) {
  EXPECT_NO_THROW(validate_user_name("bob_1.x-y"));
  EXPECT_THROW(validate_user_name(""), Error);
  EXPECT_THROW(validate_user_name(".hidden"), Error);
  EXPECT_THROW(validate_user_name("a/b"), Error);
  EXPECT_THROW(validate_user_name(std::string(65, 'a')), Error);
}

TEST_F(RegistryTest, Revocation) {
  const auto alice = reg_.register_user("alice", {"Alpha", "Leader"}, rng_);
  const auto carol = reg_.register_user("carol", {"Alpha", "Blue", "Member"}, rng_);
  const auto carol_old = reg_.current_keys().at(carol.user_id);
  reg_.revoke_user(carol.user_id, rng_);
  EXPECT_EQ(reg_.epoch(), 3u);
  EXPECT_EQ(reg_.user(carol.user_id).status, UserStatus::kRevoked);
  EXPECT_EQ(reg_.current_keys().count(carol.user_id), 0u);

  const Envelope env = seal(reg_.public_key(), kExamplePolicy, as_bytes("post"), rng_);
  EXPECT_EQ(code_of([&] { open(env, carol_old); }), ErrorCode::kEpochMismatch);
  EXPECT_NO_THROW(open(env, reg_.current_keys().at(alice.user_id)));

  EXPECT_EQ(code_of([&] { reg_.revoke_user(carol.user_id, rng_); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { reg_.revoke_user(999, rng_); }), ErrorCode::kNotFound);
}

TEST_F(RegistryTest, ForgedEpochOnOldKeyStillFails) {
  // Relabeling a revoked key with the new epoch must not help.
  reg_.register_user("alice", {"Alpha", "Leader"}, rng_);
  const auto mallory = reg_.register_user("mallory", {"Alpha", "Leader"}, rng_);
  auto stale = mallory.key;
  reg_.revoke_user(mallory.user_id, rng_);
  stale.epoch = reg_.epoch();
  const Envelope env = seal(reg_.public_key(), kExamplePolicy, as_bytes("post"), rng_);
  EXPECT_EQ(code_of([&] { open(env, stale); }), ErrorCode::kAuthenticationFailure);
}

TEST_F(RegistryTest, SealingNeverMutatesRegistry) {
  const auto p1_user = reg_.register_user("p1", {"Alpha", "Leader"}, rng_);
  const std::string before = reg_.to_json();
  const auto key = reg_.current_keys().at(p1_user.user_id);
  const std::string fp = fingerprint(serialize_user_secret_key(key));
  for (int i = 0; i < 50; ++i) {
    seal(reg_.public_key(), "Alpha AND x" + std::to_string(i), as_bytes("m"), rng_);
  }
  EXPECT_EQ(reg_.to_json(), before);
  EXPECT_EQ(fingerprint(serialize_user_secret_key(reg_.current_keys().at(p1_user.user_id))), fp);

  const Envelope e1 = seal(reg_.public_key(), "Alpha AND Leader", as_bytes("one"), rng_);
  const Envelope e2 = seal(reg_.public_key(), "Alpha AND Blue", as_bytes("two"), rng_);
  EXPECT_NO_THROW(open(e1, key));
  EXPECT_EQ(code_of([&] { open(e2, key); }), ErrorCode::kPolicyNotSatisfied);
}

TEST_F(RegistryTest, RandomOperationSequencesKeepInvariants) {
  std::mt19937_64 rng(3);
  std::uint64_t last_epoch = reg_.epoch();
  for (int step = 0; step < 25; ++step) {
    std::vector<std::uint64_t> active;
    for (const auto& u : reg_.users()) {
      if (u.status == UserStatus::kActive) active.push_back(u.id);
    }
    if (active.empty() || rng() % 3) {
      reg_.register_user("u" + std::to_string(step), {"a" + std::to_string(rng() % 3)}, rng_);
    } else {
      reg_.revoke_user(active[rng() % active.size()], rng_);
    }
    EXPECT_GT(reg_.epoch(), last_epoch);
    last_epoch = reg_.epoch();
    EXPECT_EQ(reg_.master_key().epoch, reg_.public_key().epoch);
    for (const auto& u : reg_.users()) {
      if (u.status == UserStatus::kActive) {
        EXPECT_EQ(u.key_epoch, reg_.epoch());
        EXPECT_EQ(reg_.current_keys().at(u.id).epoch, reg_.epoch());
      } else {
        EXPECT_LT(u.key_epoch, reg_.epoch());
        EXPECT_EQ(reg_.current_keys().count(u.id), 0u);
      }
    }
  }
}

TEST(Keystore, SaveLoadLayout) {
  TempDir dir;
  Keystore ks(dir / "ks");
  EXPECT_FALSE(ks.exists());
  DeterministicRng rng(8);
  Registry reg = Registry::create(default_context(), rng);
  ks.save(reg);
  EXPECT_TRUE(ks.exists());
  reg.register_user("alice", {"Alpha", "Leader"}, rng);
  ks.save(reg);
  reg.register_user("bob", {"Beta"}, rng);
  ks.save(reg);

  EXPECT_TRUE(std::filesystem::exists(dir / "ks/registry.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "ks/pk-epoch-2.scpk"));
  EXPECT_TRUE(std::filesystem::exists(dir / "ks/keys/epoch-2/alice.scsk"));
  EXPECT_TRUE(std::filesystem::exists(dir / "ks/keys/epoch-2/bob.scsk"));
  EXPECT_FALSE(std::filesystem::exists(dir / "ks/keys/epoch-1"));
  EXPECT_EQ(ks.current_public_key_path(), dir / "ks/pk-epoch-2.scpk");

  Registry back = ks.load();
  EXPECT_EQ(back.to_json(), reg.to_json());
  EXPECT_TRUE(back.public_key() == reg.public_key());
  const auto alice_file = deserialize_user_secret_key(read_file(dir / "ks/keys/epoch-2/alice.scsk"));
  EXPECT_EQ(fingerprint(serialize_user_secret_key(alice_file)), back.find("alice")->fingerprint);

  // A loaded registry keeps working.
  back.register_user("carol", {"Alpha"}, rng);
  ks.save(back);
  EXPECT_EQ(ks.load().epoch(), 3u);
}

TEST(Keystore, MissingOrCorrupt) {
  TempDir dir;
  Keystore ks(dir / "nothing");
  EXPECT_EQ(code_of([&] { ks.load(); }), ErrorCode::kIo);

  Keystore bad(dir.path());
  write_file_atomic(bad.registry_path(), as_bytes("{not json"));
  EXPECT_EQ(code_of([&] { bad.load(); }), ErrorCode::kMalformedInput);
}

TEST(Files, AtomicWriteLeavesNoTemp) {
  TempDir dir;
  write_file_atomic(dir / "a/b/c.bin", as_bytes("abc"));
  EXPECT_EQ(read_file(dir / "a/b/c.bin"), Bytes({'a', 'b', 'c'}));
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir / "a/b")) ++n;
  EXPECT_EQ(n, 1u);
}

}  // namespace
}  // namespace starcast::authority
