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

#include <filesystem>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "starcast/authority.hpp"
#include "starcast/cli.hpp"
#include "starcast/error.hpp"
#include "test_util.hpp"

namespace starcast::cli {
namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::initializer_list<std::string> args) {
  std::vector<std::string> owned{"starcast"};
  owned.insert(owned.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : owned) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Keys live under keys/epoch-N/<name>.scsk; joins and revocations advance N.
std::string current_key(const std::string& keystore, const std::string& name) {
  std::filesystem::path best;
  unsigned long best_epoch = 0;
  for (const auto& e : std::filesystem::directory_iterator(std::filesystem::path(keystore) / "keys")) {
    const unsigned long epoch = std::stoul(e.path().filename().string().substr(6));
    const auto key = e.path() / (name + ".scsk");
    if (std::filesystem::exists(key) && epoch >= best_epoch) {
      best_epoch = epoch;
      best = key;
    }
  }
  return best.string();
}

std::string trimmed(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code_for(ErrorCode::kInvalidArgument), 1);
  EXPECT_EQ(exit_code_for(ErrorCode::kPolicySyntax), 1);
  EXPECT_EQ(exit_code_for(ErrorCode::kPolicyNotSatisfied), 2);
  EXPECT_EQ(exit_code_for(ErrorCode::kAuthenticationFailure), 2);
  EXPECT_EQ(exit_code_for(ErrorCode::kEpochMismatch), 2);
  EXPECT_EQ(exit_code_for(ErrorCode::kIo), 3);
  EXPECT_EQ(exit_code_for(ErrorCode::kMalformedInput), 3);
}

class CliTest : public ::testing::Test {
 protected:
  std::string ks() const { return (dir_ / "ks").string(); }
  std::string file(const std::string& name) const { return (dir_ / name).string(); }

  testing::TempDir dir_;
};

TEST_F(CliTest, FullWorkflow) {
  auto r = invoke({"setup", "--keystore", ks()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::filesystem::exists(trimmed(r.out)));
  EXPECT_EQ(invoke({"setup", "--keystore", ks()}).code, 1);

  r = invoke({"user-add", "--keystore", ks(), "--name", "alice", "--attrs", "Alpha,Blue,Leader"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::filesystem::exists(trimmed(r.out)));
  r = invoke({"user-add", "--keystore", ks(), "--name", "bob", "--attrs", "Beta,Blue,Member"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string bob_key = trimmed(r.out);
  const std::string alice_key = current_key(ks(), "alice");
  EXPECT_NE(alice_key, "");
  EXPECT_EQ(invoke({"user-add", "--keystore", ks(), "--name", "alice", "--attrs", "X"}).code, 1);

  const ByteView view = as_bytes("telemetry frame 0042");
  const Bytes message(view.begin(), view.end());
  authority::write_file_atomic(file("msg"), message);
  r = invoke({"seal", "--keystore", ks(), "--policy", std::string(testing::kExamplePolicy), "--in", file("msg"), "--out",
              file("env")});
  ASSERT_EQ(r.code, 0) << r.err;

  r = invoke({"open", "--key", alice_key, "--in", file("env"), "--out", file("plain")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(authority::read_file(file("plain")), message);

  r = invoke({"open", "--key", bob_key, "--in", file("env"), "--out", file("plain2")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
  EXPECT_FALSE(std::filesystem::exists(file("plain2")));

  r = invoke({"user-list", "--keystore", ks(), "--json"});
  ASSERT_EQ(r.code, 0);
  const auto users = nlohmann::json::parse(r.out);
  ASSERT_EQ(users.size(), 2u);
  EXPECT_EQ(users[0]["name"], "alice");

  ASSERT_EQ(invoke({"user-revoke", "--keystore", ks(), "--name", "bob"}).code, 0);
  EXPECT_EQ(invoke({"user-revoke", "--keystore", ks(), "--name", "bob"}).code, 1);

  // Envelopes from the previous epoch no longer open with re-issued keys.
  r = invoke({"user-list", "--keystore", ks()});
  EXPECT_NE(r.out.find("bob,revoked"), std::string::npos);
  const std::string reissued = current_key(ks(), "alice");
  EXPECT_NE(reissued, alice_key);
  EXPECT_FALSE(std::filesystem::exists(current_key(ks(), "bob")) &&
               current_key(ks(), "bob").find(std::filesystem::path(reissued).parent_path().string()) == 0);
  EXPECT_EQ(invoke({"open", "--key", reissued, "--in", file("env"), "--out", file("p3")}).code, 2);
}

TEST_F(CliTest, SealFromPublicKeyFile) {
  auto r = invoke({"setup", "--keystore", ks()});
  ASSERT_EQ(r.code, 0);
  const std::string pk = trimmed(r.out);
  authority::write_file_atomic(file("msg"), as_bytes("x"));
  EXPECT_EQ(invoke({"seal", "--pk", pk, "--policy", "A AND B", "--in", file("msg"), "--out", file("e")}).code,
            0);
  EXPECT_EQ(invoke({"seal", "--pk", pk, "--keystore", ks(), "--policy", "A", "--in", file("msg")}).code, 1);
  EXPECT_EQ(invoke({"seal", "--pk", pk, "--policy", "A AND (", "--in", file("msg")}).code, 1);

  r = invoke({"inspect", file("e")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_FALSE(j.dump().empty());
  r = invoke({"inspect", pk});
  EXPECT_EQ(r.code, 0);
}

TEST_F(CliTest, InspectKeyOmitsSecrets) {
  ASSERT_EQ(invoke({"setup", "--keystore", ks()}).code, 0);
  auto r = invoke({"user-add", "--keystore", ks(), "--name", "u", "--attrs", "A"});
  ASSERT_EQ(r.code, 0);
  r = invoke({"inspect", trimmed(r.out)});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out)["secret_material"], "omitted");
}

TEST_F(CliTest, IoAndMalformedInputs) {
  EXPECT_EQ(invoke({"open", "--key", file("nope"), "--in", file("nope2")}).code, 3);
  authority::write_file_atomic(file("junk"), as_bytes("not an envelope"));
  EXPECT_EQ(invoke({"inspect", file("junk")}).code, 3);
  EXPECT_EQ(invoke({"bogus-command"}).code, 1);
  EXPECT_EQ(invoke({"user-revoke", "--keystore", ks(), "--name", "a", "--id", "1"}).code, 1);
}

TEST_F(CliTest, SimulateCsv) {
  auto r = invoke({"simulate", "--seed", "42", "--users", "40", "--groups", "4", "--group", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "framework,group,users,beamwidth_deg,sum_rate_bps,ciphertexts,keys");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
  EXPECT_EQ(invoke({"simulate", "--users", "40", "--groups", "4", "--group", "5"}).code, 1);

  r = invoke({"simulate", "--seed", "42", "--users", "40", "--groups", "4", "--group", "2", "--per-user",
              file("pu.csv")});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(std::filesystem::exists(file("pu.csv")));

  r = invoke({"place-users", "--seed", "7", "--users", "10", "--groups", "2"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("user,x_m,y_m,group\n", 0), 0u);
}

}  // namespace
}  // namespace starcast::cli
