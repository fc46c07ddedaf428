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

#include "starcast/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "starcast/authority.hpp"
#include "starcast/envelope.hpp"
#include "starcast/lathare.hpp"
#include "starcast/linksim.hpp"
#include "starcast/policy.hpp"

namespace starcast::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string default_keystore() {
  const char* env = std::getenv("STARCAST_KEYSTORE");
  return env ? env : "";
}

fs::path require_keystore(const std::string& flag) {
  if (flag.empty()) fail(ErrorCode::kInvalidArgument, "no keystore given (use --keystore or STARCAST_KEYSTORE)");
  return flag;
}

Bytes read_input(const std::string& path) {
  if (path == "-") {
    std::string data((std::istreambuf_iterator<char>(std::cin)), std::istreambuf_iterator<char>());
    return Bytes(data.begin(), data.end());
  }
  return authority::read_file(path);
}

void write_output(const std::string& path, ByteView bytes, std::ostream& out) {
  if (path.empty() || path == "-") {
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    return;
  }
  authority::write_file_atomic(path, bytes);
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  write_output(path, as_bytes(text), out);
}

std::string status_name(authority::UserStatus s) {
  return s == authority::UserStatus::kActive ? "active" : "revoked";
}

json describe_header(const abe::AbeHeader& hdr) {
  return {{"mode", hdr.mode == abe::HeaderMode::kKem ? "kem" : "element"},
          {"epoch", hdr.epoch},
          {"policy", hdr.msp.policy},
          {"msp_rows", hdr.msp.rows},
          {"msp_cols", hdr.msp.cols},
          {"msp_digest", to_hex(msp_digest(hdr.msp))}};
}

json inspect_bytes(ByteView bytes) {
  const FileType type = peek_file_type(bytes);
  json doc = {{"type", file_type_name(type)}, {"bytes", bytes.size()}};
  switch (type) {
    case FileType::kPublicKey: {
      auto pk = deserialize_public_key(bytes);
      doc["epoch"] = pk.epoch;
      doc["fingerprint"] = fingerprint(bytes);
      break;
    }
    case FileType::kMasterKey: {
      auto mk = deserialize_master_key(bytes);
      doc["epoch"] = mk.epoch;
      doc["secret_material"] = "omitted";
      break;
    }
    case FileType::kUserSecretKey: {
      auto sk = deserialize_user_secret_key(bytes);
      doc["epoch"] = sk.epoch;
      doc["attributes"] = sk.attributes().to_csv();
      doc["fingerprint"] = fingerprint(bytes);
      doc["secret_material"] = "omitted";
      break;
    }
    case FileType::kEnvelope: {
      auto env = deserialize_envelope(bytes);
      doc["version"] = env.version;
      doc["header"] = describe_header(env.header);
      doc["payload_bytes"] = env.sealed.size() - kTagBytes;
      break;
    }
    case FileType::kHeader:
      doc["header"] = describe_header(deserialize_header(bytes));
      break;
  }
  return doc;
}

lathare::Mode parse_mode(const std::string& s) {
  if (s == "echo") return lathare::Mode::kEcho;
  if (s == "one-way") return lathare::Mode::kOneWay;
  fail(ErrorCode::kInvalidArgument, "mode must be 'echo' or 'one-way'");
}

linksim::ScenarioConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  Bytes raw = authority::read_file(path);
  return linksim::parse_scenario_config(std::string_view(reinterpret_cast<const char*>(raw.data()), raw.size()));
}

void write_csv_file(const std::string& path, const std::function<void(std::ostream&)>& body, std::ostream& out) {
  std::ostringstream ss;
  body(ss);
  write_text(path, ss.str(), out);
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kPolicyNotSatisfied:
    case ErrorCode::kAuthenticationFailure:
    case ErrorCode::kEpochMismatch:
      return 2;
    case ErrorCode::kIo:
    case ErrorCode::kMalformedInput:
    case ErrorCode::kVersionUnsupported:
    case ErrorCode::kNetwork:
    case ErrorCode::kRngFailure:
      return 3;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kPolicySyntax:
    case ErrorCode::kUnsupportedLevel:
    case ErrorCode::kNotFound:
    case ErrorCode::kAlreadyExists:
      return 1;
  }
  return 1;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"StarCast policy-sealed group messaging and link simulation", "starcast"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string keystore = default_keystore();
  auto add_keystore = [&](CLI::App* sub) {
    sub->add_option("--keystore", keystore, "keystore directory (default $STARCAST_KEYSTORE)");
  };

  // setup
  std::string level = "128-bit";
  auto* setup_cmd = app.add_subcommand("setup", "create a keystore with fresh epoch-0 keys");
  add_keystore(setup_cmd);
  setup_cmd->add_option("--level", level, "security level (128-bit)");

  // user-add
  std::string user_name, attrs_csv;
  auto* add_cmd = app.add_subcommand("user-add", "register a user; rotates keys for everyone");
  add_keystore(add_cmd);
  add_cmd->add_option("--name", user_name, "user name")->required();
  add_cmd->add_option("--attrs", attrs_csv, "comma-separated attributes")->required();

  // user-revoke
  std::uint64_t user_id = 0;
  auto* revoke_cmd = app.add_subcommand("user-revoke", "revoke a user; rotates keys for the rest");
  add_keystore(revoke_cmd);
  auto* revoke_name = revoke_cmd->add_option("--name", user_name, "user name");
  auto* revoke_id = revoke_cmd->add_option("--id", user_id, "user id");
  revoke_name->excludes(revoke_id);
  revoke_id->excludes(revoke_name);

  // user-list
  bool list_json = false;
  auto* list_cmd = app.add_subcommand("user-list", "print the user table");
  add_keystore(list_cmd);
  list_cmd->add_flag("--json", list_json, "emit JSON instead of CSV");

  // seal
  std::string policy_text, in_path, out_path, pk_path;
  auto* seal_cmd = app.add_subcommand("seal", "encrypt a file under a policy");
  auto* seal_ks = seal_cmd->add_option("--keystore", keystore, "keystore holding the current public key");
  auto* seal_pk = seal_cmd->add_option("--pk", pk_path, "public key file");
  seal_ks->excludes(seal_pk);
  seal_pk->excludes(seal_ks);
  seal_cmd->add_option("--policy", policy_text, "access policy")->required();
  seal_cmd->add_option("--in", in_path, "plaintext file or -")->required();
  seal_cmd->add_option("--out", out_path, "envelope output (default stdout)");

  // open
  std::string key_path;
  auto* open_cmd = app.add_subcommand("open", "decrypt an envelope");
  open_cmd->add_option("--key", key_path, "user secret key file")->required();
  open_cmd->add_option("--in", in_path, "envelope file or -")->required();
  open_cmd->add_option("--out", out_path, "plaintext output (default stdout)");

  // simulate
  std::string config_path, per_user_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> users, groups;
  std::optional<double> spread;
  std::size_t group = 0;
  auto add_scenario_flags = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "scenario JSON");
    sub->add_option("--seed", seed, "placement seed (default 42)");
    sub->add_option("--users", users, "number of users");
    sub->add_option("--groups", groups, "number of groups");
    sub->add_option("--spread", spread, "cluster spread in meters");
  };
  auto* sim_cmd = app.add_subcommand("simulate", "compare unicast, broadcast and groupcast sum rates");
  add_scenario_flags(sim_cmd);
  sim_cmd->add_option("--group", group, "legitimate group (1-based)")->required();
  sim_cmd->add_option("--out", out_path, "rate CSV (default stdout)");
  sim_cmd->add_option("--per-user", per_user_path, "per-user CSV");

  auto* place_cmd = app.add_subcommand("place-users", "generate a clustered user layout");
  add_scenario_flags(place_cmd);
  place_cmd->add_option("--out", out_path, "layout CSV (default stdout)");

  // latency-send
  std::string host = "127.0.0.1", mode_text = "echo", csv_path, summary_path, payload_path;
  std::uint16_t port = 0;
  double rate = 100;
  std::size_t count = 100, filler = 0, budget = lathare::kDefaultDatagramBudget, max_probes = 0;
  int timeout_ms = 1000, idle_ms = 0;
  bool broadcast = false;
  auto* send_cmd = app.add_subcommand("latency-send", "send UDP probes and report latency");
  send_cmd->add_option("--host", host, "target address");
  send_cmd->add_option("--port", port, "target port")->required();
  send_cmd->add_option("--mode", mode_text, "echo or one-way (one-way requires synchronized clocks)");
  send_cmd->add_option("--rate", rate, "probes per second");
  send_cmd->add_option("--count", count, "number of probes");
  auto* send_payload = send_cmd->add_option("--payload", payload_path, "envelope file carried by each probe");
  auto* send_filler = send_cmd->add_option("--filler", filler, "carry N zero bytes instead of an envelope");
  send_payload->excludes(send_filler);
  send_filler->excludes(send_payload);
  send_cmd->add_option("--budget", budget, "datagram size budget in bytes");
  send_cmd->add_option("--timeout-ms", timeout_ms, "wait for late echoes");
  send_cmd->add_flag("--broadcast", broadcast, "enable SO_BROADCAST");
  send_cmd->add_option("--csv", csv_path, "per-probe CSV");
  send_cmd->add_option("--summary", summary_path, "summary JSON (default stdout)");

  // latency-recv
  std::string bind_address = "0.0.0.0";
  auto* recv_cmd = app.add_subcommand("latency-recv", "receive probes, echo and open them");
  recv_cmd->add_option("--bind", bind_address, "bind address");
  recv_cmd->add_option("--port", port, "port (0 picks one)");
  recv_cmd->add_option("--key", key_path, "user secret key for opening envelopes");
  recv_cmd->add_option("--max-probes", max_probes, "stop after N probes (0: unbounded)");
  recv_cmd->add_option("--idle-timeout-ms", idle_ms, "stop after this long without traffic (0: never)");
  recv_cmd->add_option("--budget", budget, "datagram size budget in bytes");
  recv_cmd->add_option("--csv", csv_path, "per-probe CSV");
  recv_cmd->add_option("--summary", summary_path, "summary JSON (default stdout)");

  // inspect
  auto* inspect_cmd = app.add_subcommand("inspect", "describe a .sc* file without secrets");
  inspect_cmd->add_option("file", in_path, "file to inspect")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*setup_cmd) {
      authority::Keystore ks(require_keystore(keystore));
      if (ks.exists()) fail(ErrorCode::kAlreadyExists, "keystore already initialized at " + ks.dir().string());
      SystemRng rng;
      auto reg = authority::Registry::create(generate_context(level), rng);
      ks.save(reg);
      out << ks.current_public_key_path().string() << "\n";
    } else if (*add_cmd) {
      authority::Keystore ks(require_keystore(keystore));
      auto reg = ks.load();
      SystemRng rng;
      auto issued = reg.register_user(user_name, AttributeSet::parse_csv(attrs_csv), rng);
      ks.save(reg);
      out << ks.user_key_path(reg.epoch(), user_name).string() << "\n";
      err << "registered " << user_name << " (id " << issued.user_id << ") at epoch " << reg.epoch() << "\n";
    } else if (*revoke_cmd) {
      authority::Keystore ks(require_keystore(keystore));
      auto reg = ks.load();
      std::uint64_t id = user_id;
      if (!revoke_name->empty()) {
        const auto* rec = reg.find(user_name);
        if (!rec) fail(ErrorCode::kNotFound, "no user named " + user_name);
        id = rec->id;
      } else if (revoke_id->empty()) {
        fail(ErrorCode::kInvalidArgument, "user-revoke needs --name or --id");
      }
      SystemRng rng;
      reg.revoke_user(id, rng);
      ks.save(reg);
      err << "revoked user " << id << "; now at epoch " << reg.epoch() << "\n";
    } else if (*list_cmd) {
      authority::Keystore ks(require_keystore(keystore));
      auto reg = ks.load();
      if (list_json) {
        json arr = json::array();
        for (const auto& u : reg.users()) {
          arr.push_back({{"id", u.id},
                         {"name", u.name},
                         {"status", status_name(u.status)},
                         {"key_epoch", u.key_epoch},
                         {"attributes", u.attributes.to_csv()},
                         {"fingerprint", u.fingerprint}});
        }
        out << arr.dump(2) << "\n";
      } else {
        out << "id,name,status,key_epoch,attributes,fingerprint\n";
        for (const auto& u : reg.users()) {
          out << u.id << ',' << u.name << ',' << status_name(u.status) << ',' << u.key_epoch << ",\""
              << u.attributes.to_csv() << "\"," << u.fingerprint << "\n";
        }
      }
    } else if (*seal_cmd) {
      abe::PublicKey pk;
      if (!pk_path.empty()) {
        pk = deserialize_public_key(authority::read_file(pk_path));
      } else {
        authority::Keystore ks(require_keystore(keystore));
        pk = deserialize_public_key(authority::read_file(ks.current_public_key_path()));
      }
      SystemRng rng;
      Envelope env = seal(pk, policy_text, read_input(in_path), rng);
      write_output(out_path, serialize_envelope(env), out);
    } else if (*open_cmd) {
      auto sk = deserialize_user_secret_key(authority::read_file(key_path));
      Envelope env = deserialize_envelope(read_input(in_path));
      write_output(out_path, open(env, sk), out);
    } else if (*sim_cmd || *place_cmd) {
      linksim::ScenarioConfig cfg = load_config(config_path);
      if (seed) cfg.seed = *seed;
      if (users) cfg.users = *users;
      if (groups) cfg.groups = *groups;
      if (spread) cfg.spread_m = *spread;
      auto scenario =
          linksim::place_users(cfg.seed, cfg.users, cfg.groups, cfg.spread_m, cfg.params.max_beam_radius_m);
      if (*place_cmd) {
        write_csv_file(out_path, [&](std::ostream& s) { linksim::write_scenario_csv(s, scenario); }, out);
      } else {
        auto report = linksim::simulate(scenario, cfg.params, group, cfg.channel);
        write_csv_file(out_path, [&](std::ostream& s) { linksim::write_rate_csv(s, report); }, out);
        if (!per_user_path.empty()) {
          write_csv_file(per_user_path, [&](std::ostream& s) { linksim::write_user_csv(s, scenario, report); },
                         out);
        }
      }
    } else if (*send_cmd) {
      lathare::SenderConfig cfg;
      cfg.host = host;
      cfg.port = port;
      cfg.mode = parse_mode(mode_text);
      cfg.rate_hz = rate;
      cfg.count = count;
      cfg.payload = payload_path.empty() ? Bytes(filler, 0) : authority::read_file(payload_path);
      cfg.datagram_budget = budget;
      cfg.timeout_ms = timeout_ms;
      cfg.broadcast = broadcast;
      if (cfg.mode == lathare::Mode::kOneWay) err << "note: one-way latency requires synchronized clocks\n";
      auto result = lathare::run_sender(cfg);
      if (!csv_path.empty()) {
        write_csv_file(csv_path, [&](std::ostream& s) { lathare::write_probe_csv(s, result.records); }, out);
      }
      write_text(summary_path, lathare::stats_json(result.stats), out);
    } else if (*recv_cmd) {
      lathare::ReceiverConfig cfg;
      cfg.bind_address = bind_address;
      cfg.port = port;
      if (!key_path.empty()) cfg.key = deserialize_user_secret_key(authority::read_file(key_path));
      cfg.max_probes = max_probes;
      cfg.idle_timeout_ms = idle_ms;
      cfg.datagram_budget = budget;
      lathare::Receiver receiver(cfg);
      err << "listening on port " << receiver.port() << "\n";
      auto log = receiver.run();
      if (!csv_path.empty()) {
        write_csv_file(csv_path, [&](std::ostream& s) { lathare::write_probe_csv(s, log); }, out);
      }
      write_text(summary_path, lathare::stats_json(lathare::summarize_received(log)), out);
    } else if (*inspect_cmd) {
      out << inspect_bytes(authority::read_file(in_path)).dump(2) << "\n";
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace starcast::cli
