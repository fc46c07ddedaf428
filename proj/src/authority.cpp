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

#include "starcast/authority.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "starcast/envelope.hpp"
#include "starcast/error.hpp"

namespace starcast::authority {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string status_name(UserStatus s) { return s == UserStatus::kActive ? "active" : "revoked"; }

UserStatus parse_status(const std::string& s) {
  if (s == "active") return UserStatus::kActive;
  if (s == "revoked") return UserStatus::kRevoked;
  fail(ErrorCode::kMalformedInput, "registry.json: unknown user status '" + s + "'");
}

}  // namespace

void validate_user_name(std::string_view name) {
  if (name.empty() || name.size() > 64) fail(ErrorCode::kInvalidArgument, "user name must be 1-64 characters");
  if (name.front() == '.') fail(ErrorCode::kInvalidArgument, "user name may not start with '.'");
  for (char c : name) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
              c == '_' || c == '-';
    if (!ok) fail(ErrorCode::kInvalidArgument, "user name '" + std::string(name) + "' contains invalid characters");
  }
}

// ---- Registry ----

Registry Registry::create(const GroupContext& ctx, Rng& rng) { return Registry(ctx, abe::setup(ctx, rng, 0)); }

Registry Registry::restore(const GroupContext& ctx, abe::KeyPair keys, std::vector<UserRecord> users,
                           std::uint64_t next_id) {
  if (keys.pk.epoch != keys.mk.epoch) fail(ErrorCode::kMalformedInput, "public/master key epoch mismatch");
  Registry reg(ctx, std::move(keys));
  for (const auto& u : users) {
    if (u.id >= next_id) fail(ErrorCode::kMalformedInput, "user id beyond next_id");
    if (u.status == UserStatus::kActive && u.key_epoch != reg.epoch()) {
      fail(ErrorCode::kMalformedInput, "active user '" + u.name + "' holds a stale key epoch");
    }
  }
  reg.users_ = std::move(users);
  reg.next_id_ = next_id;
  return reg;
}

const UserRecord& Registry::user(std::uint64_t id) const {
  for (const auto& u : users_) {
    if (u.id == id) return u;
  }
  fail(ErrorCode::kNotFound, "unknown user id " + std::to_string(id));
}

UserRecord& Registry::mutable_user(std::uint64_t id) { return const_cast<UserRecord&>(user(id)); }

const UserRecord* Registry::find(std::string_view name) const {
  for (const auto& u : users_) {
    if (u.name == name) return &u;
  }
  return nullptr;
}

void Registry::rotate(Rng& rng) {
  // Build the next epoch completely before committing any of it.
  abe::KeyPair next = abe::setup(ctx_, rng, epoch() + 1);
  std::map<std::uint64_t, abe::UserSecretKey> reissued;
  std::vector<UserRecord> users = users_;
  for (auto& u : users) {
    if (u.status != UserStatus::kActive) continue;
    abe::UserSecretKey key = abe::keygen(next.mk, u.attributes, rng);
    u.key_epoch = next.pk.epoch;
    u.fingerprint = fingerprint(serialize_user_secret_key(key));
    reissued.emplace(u.id, std::move(key));
  }
  keys_ = std::move(next);
  users_ = std::move(users);
  keys_by_user_ = std::move(reissued);
}

IssuedKey Registry::register_user(std::string_view name, const AttributeSet& attrs, Rng& rng) {
  validate_user_name(name);
  if (find(name)) fail(ErrorCode::kAlreadyExists, "user '" + std::string(name) + "' already exists");

  Registry next = *this;
  next.rotate(rng);
  UserRecord rec;
  rec.id = next.next_id_++;
  rec.name = std::string(name);
  rec.attributes = attrs;
  rec.status = UserStatus::kActive;
  abe::UserSecretKey key = abe::keygen(next.keys_.mk, attrs, rng);
  rec.key_epoch = key.epoch;
  rec.fingerprint = fingerprint(serialize_user_secret_key(key));
  next.users_.push_back(rec);
  next.keys_by_user_.emplace(rec.id, key);
  *this = std::move(next);
  return {rec.id, std::move(key)};
}

void Registry::revoke_user(std::uint64_t id, Rng& rng) {
  const UserRecord& u = user(id);
  if (u.status == UserStatus::kRevoked) fail(ErrorCode::kInvalidArgument, "user '" + u.name + "' is already revoked");
  Registry next = *this;
  next.mutable_user(id).status = UserStatus::kRevoked;
  next.rotate(rng);
  *this = std::move(next);
}

std::string Registry::to_json() const {
  json doc;
  doc["format"] = "starcast-registry-v1";
  doc["level"] = ctx_.level;
  doc["epoch"] = epoch();
  doc["next_id"] = next_id_;
  doc["public_key"] = "pk-epoch-" + std::to_string(epoch()) + ".scpk";
  json users = json::array();
  for (const auto& u : users_) {
    users.push_back({{"id", u.id},
                     {"name", u.name},
                     {"attributes", std::vector<std::string>(u.attributes.begin(), u.attributes.end())},
                     {"key_epoch", u.key_epoch},
                     {"status", status_name(u.status)},
                     {"fingerprint", u.fingerprint}});
  }
  doc["users"] = std::move(users);
  return doc.dump(2) + "\n";
}

// ---- files ----

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  Bytes out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::kIo, "error reading " + path.string());
  return out;
}

void write_file_atomic(const fs::path& path, ByteView bytes) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) fail(ErrorCode::kIo, "cannot create " + path.parent_path().string() + ": " + ec.message());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) fail(ErrorCode::kIo, "error writing " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::kIo, "cannot rename " + tmp.string() + ": " + ec.message());
}

// ---- Keystore ----

fs::path Keystore::public_key_path(std::uint64_t epoch) const {
  return dir_ / ("pk-epoch-" + std::to_string(epoch) + ".scpk");
}

fs::path Keystore::user_key_path(std::uint64_t epoch, std::string_view name) const {
  return dir_ / "keys" / ("epoch-" + std::to_string(epoch)) / (std::string(name) + ".scsk");
}

bool Keystore::exists() const { return fs::exists(registry_path()); }

fs::path Keystore::current_public_key_path() const {
  Bytes raw = read_file(registry_path());
  try {
    json doc = json::parse(raw.begin(), raw.end());
    return public_key_path(doc.at("epoch").get<std::uint64_t>());
  } catch (const json::exception& e) {
    fail(ErrorCode::kMalformedInput, std::string("registry.json: ") + e.what());
  }
}

Registry Keystore::load() const {
  if (!exists()) fail(ErrorCode::kIo, "no keystore at " + dir_.string() + " (run setup first)");
  Bytes raw = read_file(registry_path());
  std::vector<UserRecord> users;
  std::uint64_t epoch = 0, next_id = 1;
  std::string level;
  try {
    json doc = json::parse(raw.begin(), raw.end());
    if (doc.at("format").get<std::string>() != "starcast-registry-v1") {
      fail(ErrorCode::kVersionUnsupported, "registry.json: unsupported format");
    }
    level = doc.at("level").get<std::string>();
    epoch = doc.at("epoch").get<std::uint64_t>();
    next_id = doc.at("next_id").get<std::uint64_t>();
    for (const auto& u : doc.at("users")) {
      UserRecord rec;
      rec.id = u.at("id").get<std::uint64_t>();
      rec.name = u.at("name").get<std::string>();
      rec.attributes = AttributeSet::from_list(u.at("attributes").get<std::vector<std::string>>());
      rec.key_epoch = u.at("key_epoch").get<std::uint64_t>();
      rec.status = parse_status(u.at("status").get<std::string>());
      rec.fingerprint = u.at("fingerprint").get<std::string>();
      users.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kMalformedInput, std::string("registry.json: ") + e.what());
  }

  abe::KeyPair keys;
  keys.pk = deserialize_public_key(read_file(public_key_path(epoch)));
  keys.mk = deserialize_master_key(read_file(master_key_path()));
  if (keys.pk.epoch != epoch || keys.mk.epoch != epoch) {
    fail(ErrorCode::kMalformedInput, "keystore key files do not match registry epoch " + std::to_string(epoch));
  }
  return Registry::restore(generate_context(level), std::move(keys), std::move(users), next_id);
}

void Keystore::save(const Registry& reg) const {
  const std::uint64_t epoch = reg.epoch();
  write_file_atomic(public_key_path(epoch), serialize_public_key(reg.public_key()));
  write_file_atomic(master_key_path(), serialize_master_key(reg.master_key()));
  for (const auto& [id, key] : reg.current_keys()) {
    write_file_atomic(user_key_path(epoch, reg.user(id).name), serialize_user_secret_key(key));
  }
  std::string doc = reg.to_json();
  write_file_atomic(registry_path(), as_bytes(doc));

  // Drop secret keys of earlier epochs.
  std::error_code ec;
  const fs::path keys_dir = dir_ / "keys";
  if (fs::exists(keys_dir)) {
    const std::string keep = "epoch-" + std::to_string(epoch);
    for (const auto& entry : fs::directory_iterator(keys_dir)) {
      if (entry.is_directory() && entry.path().filename() != keep) fs::remove_all(entry.path(), ec);
    }
  }
}

}  // namespace starcast::authority
