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

// UDP latency probes carrying sealed envelopes, with echo-RTT and one-way
// timing and application-layer fragmentation.

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "starcast/abe.hpp"
#include "starcast/bytes.hpp"

namespace starcast::lathare {

inline constexpr std::string_view kWireMagic = "SCLT";
inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr std::size_t kWireHeaderBytes = 4 + 1 + 1 + 8 + 8 + 2 + 2;
inline constexpr std::size_t kDefaultDatagramBudget = 1200;

enum class Mode : std::uint8_t { kEcho = 0, kOneWay = 1, kEchoReply = 2 };

std::string_view mode_name(Mode mode);

struct Fragment {
  Mode mode = Mode::kEcho;
  std::uint64_t seq = 0;
  std::uint64_t timestamp_ns = 0;
  std::uint16_t index = 0;
  std::uint16_t count = 1;
  Bytes payload;

  bool operator==(const Fragment&) const = default;
};

Bytes encode_fragment(const Fragment& frag);
Fragment decode_fragment(ByteView datagram);

// Splits a probe payload into datagrams no larger than `budget` bytes.
std::vector<Fragment> fragment_probe(Mode mode, std::uint64_t seq, std::uint64_t timestamp_ns, ByteView payload,
                                     std::size_t budget = kDefaultDatagramBudget);

struct Probe {
  Mode mode = Mode::kEcho;
  std::uint64_t seq = 0;
  std::uint64_t timestamp_ns = 0;
  Bytes payload;
};

class Reassembler {
 public:
  explicit Reassembler(std::size_t max_pending = 256) : max_pending_(max_pending) {}

  // Returns the whole probe once its last missing fragment arrives.
  std::optional<Probe> add(Fragment frag);
  std::size_t pending() const { return pending_.size(); }

 private:
  struct Partial {
    Mode mode;
    std::uint64_t timestamp_ns;
    std::vector<std::optional<Bytes>> parts;
    std::size_t have = 0;
    std::uint64_t order;
  };
  std::size_t max_pending_;
  std::uint64_t next_order_ = 0;
  std::map<std::uint64_t, Partial> pending_;
};

struct LatencyStats {
  std::size_t sent = 0;
  std::size_t count = 0;
  std::size_t loss = 0;
  double mean_ms = 0;
  double stddev_ms = 0;
  double p50_ms = 0;
  double p95_ms = 0;
  double p99_ms = 0;
  double min_ms = 0;
  double max_ms = 0;
};

// Sample standard deviation and nearest-rank percentiles.
LatencyStats compute_stats(std::span<const double> latencies_ms, std::size_t sent);
std::string stats_json(const LatencyStats& stats);

struct ProbeRecord {
  std::uint64_t seq = 0;
  std::uint64_t send_ns = 0;
  std::uint64_t recv_ns = 0;
  std::optional<double> rtt_ms;
  std::string open_result;
};

// Receiver-side summary; losses are inferred from gaps below the highest seq seen.
LatencyStats summarize_received(std::span<const ProbeRecord> records);

void write_probe_csv(std::ostream& out, std::span<const ProbeRecord> records);

struct SenderConfig {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  Mode mode = Mode::kEcho;
  double rate_hz = 100;
  std::size_t count = 100;
  Bytes payload;
  std::size_t datagram_budget = kDefaultDatagramBudget;
  int timeout_ms = 1000;  // wait for stragglers after the last send
  bool broadcast = false;
};

struct SenderResult {
  LatencyStats stats;
  std::vector<ProbeRecord> records;  // one per probe sent, in seq order
};

SenderResult run_sender(const SenderConfig& cfg);

struct ReceiverConfig {
  std::string bind_address = "0.0.0.0";
  std::uint16_t port = 0;
  std::optional<abe::UserSecretKey> key;
  std::size_t max_probes = 0;  // 0: unbounded
  int idle_timeout_ms = 0;     // 0: wait forever
  std::size_t datagram_budget = kDefaultDatagramBudget;
};

class Receiver {
 public:
  // Binds immediately so the port is known before run().
  explicit Receiver(ReceiverConfig cfg);
  ~Receiver();
  Receiver(const Receiver&) = delete;
  Receiver& operator=(const Receiver&) = delete;

  std::uint16_t port() const { return port_; }

  // Records are returned in arrival order.
  std::vector<ProbeRecord> run();
  void stop() { stop_.store(true); }

 private:
  ReceiverConfig cfg_;
  int fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stop_{false};
};

// Classifies an envelope payload against a key: "ok", "policy-not-satisfied", ...
std::string open_outcome(ByteView payload, const abe::UserSecretKey& key);

}  // namespace starcast::lathare
