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

// User registry and key lifecycle. Every membership change (join or
// revocation) rotates the master key and re-issues keys to the remaining
// active users, so keys never outlive the epoch they were issued in.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "starcast/abe.hpp"
#include "starcast/groups.hpp"
#include "starcast/policy.hpp"
#include "starcast/rng.hpp"

namespace starcast::authority {

enum class UserStatus { kActive, kRevoked };

struct UserRecord {
  std::uint64_t id = 0;
  std::string name;
  AttributeSet attributes;
  std::uint64_t key_epoch = 0;
  UserStatus status = UserStatus::kActive;
  std::string fingerprint;  // of the most recently issued key

  bool operator==(const UserRecord&) const = default;
};

struct IssuedKey {
  std::uint64_t user_id = 0;
  abe::UserSecretKey key;
};

/// Names double as key file stems: [A-Za-z0-9._-], 1-64 chars, no leading dot.
void validate_user_name(std::string_view name);

class Registry {
 public:
  /// Epoch 0 with no users.
  static Registry create(const GroupContext& ctx, Rng& rng);
  static Registry restore(const GroupContext& ctx, abe::KeyPair keys, std::vector<UserRecord> users,
                          std::uint64_t next_id);

  /// Rotates, re-issues every active user's key, then issues the new key.
  IssuedKey register_user(std::string_view name, const AttributeSet& attrs, Rng& rng);
  /// Marks the user revoked, rotates and re-issues to the remaining users.
  void revoke_user(std::uint64_t id, Rng& rng);

  std::uint64_t epoch() const { return keys_.pk.epoch; }
  const abe::PublicKey& public_key() const { return keys_.pk; }
  const abe::MasterKey& master_key() const { return keys_.mk; }
  const GroupContext& context() const { return ctx_; }
  const std::vector<UserRecord>& users() const { return users_; }
  std::uint64_t next_id() const { return next_id_; }

  const UserRecord& user(std::uint64_t id) const;
  const UserRecord* find(std::string_view name) const;

  /// Keys issued by the most recent rotation, by user id. Empty after
  /// restore() until the next mutation.
  const std::map<std::uint64_t, abe::UserSecretKey>& current_keys() const { return keys_by_user_; }

  /// registry.json document (no secrets).
  std::string to_json() const;

 private:
  Registry(const GroupContext& ctx, abe::KeyPair keys) : ctx_(ctx), keys_(std::move(keys)) {}

  void rotate(Rng& rng);
  UserRecord& mutable_user(std::uint64_t id);

  GroupContext ctx_;
  abe::KeyPair keys_;
  std::vector<UserRecord> users_;
  std::uint64_t next_id_ = 1;
  std::map<std::uint64_t, abe::UserSecretKey> keys_by_user_;
};

/// On-disk layout:
///   registry.json, master.scmk, pk-epoch-<n>.scpk, keys/epoch-<n>/<user>.scsk
/// Only the current epoch's key directory is kept.
class Keystore {
 public:
  explicit Keystore(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const { return dir_; }
  bool exists() const;
  Registry load() const;
  void save(const Registry& reg) const;

  std::filesystem::path registry_path() const { return dir_ / "registry.json"; }
  std::filesystem::path master_key_path() const { return dir_ / "master.scmk"; }
  std::filesystem::path public_key_path(std::uint64_t epoch) const;
  std::filesystem::path user_key_path(std::uint64_t epoch, std::string_view name) const;
  /// Public key of the current epoch per registry.json.
  std::filesystem::path current_public_key_path() const;

 private:
  std::filesystem::path dir_;
};

Bytes read_file(const std::filesystem::path& path);
/// Write to a sibling temporary, then rename over the target.
void write_file_atomic(const std::filesystem::path& path, ByteView bytes);

}  // namespace starcast::authority
