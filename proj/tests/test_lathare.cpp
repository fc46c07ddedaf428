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

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "starcast/envelope.hpp"
#include "starcast/error.hpp"
#include "starcast/lathare.hpp"
#include "test_util.hpp"

namespace starcast::lathare {
namespace {

TEST(Wire, HeaderLayout) {
  const Fragment f{Mode::kOneWay, 0x0102030405060708ULL, 0x1112131415161718ULL, 2, 3, {0xaa, 0xbb}};
  const Bytes b = encode_fragment(f);
  ASSERT_EQ(b.size(), kWireHeaderBytes + 2);
  EXPECT_EQ(kWireHeaderBytes, 26u);
  EXPECT_EQ(to_hex(b), "53434c54" "01" "01" "0102030405060708" "1112131415161718" "0002" "0003" "aabb");
  EXPECT_TRUE(decode_fragment(b) == f);
}

TEST(Wire, Rejections) {
  Bytes b = encode_fragment(Fragment{});
  Bytes bad = b;
  bad[0] = 'X';
  EXPECT_THROW(decode_fragment(bad), Error);
  bad = b;
  bad[4] = 9;
  EXPECT_THROW(decode_fragment(bad), Error);
  bad = b;
  bad[5] = 3;
  EXPECT_THROW(decode_fragment(bad), Error);
  bad = b;
  bad[23] = 1;  // index 1 of count 1
  EXPECT_THROW(decode_fragment(bad), Error);
  EXPECT_THROW(decode_fragment(ByteView(b.data(), 25)), Error);
}

TEST(Fragmentation, BudgetBoundaries) {
  const std::size_t chunk = kDefaultDatagramBudget - kWireHeaderBytes;
  EXPECT_EQ(fragment_probe(Mode::kEcho, 1, 0, {}).size(), 1u);
  EXPECT_EQ(fragment_probe(Mode::kEcho, 1, 0, Bytes(chunk)).size(), 1u);
  EXPECT_EQ(fragment_probe(Mode::kEcho, 1, 0, Bytes(chunk + 1)).size(), 2u);
  for (const auto& f : fragment_probe(Mode::kEcho, 1, 0, Bytes(10000))) {
    EXPECT_LE(encode_fragment(f).size(), kDefaultDatagramBudget);
  }
  EXPECT_THROW(fragment_probe(Mode::kEcho, 1, 0, Bytes(10), 26), Error);
}

TEST(Fragmentation, ReassemblyOutOfOrderWithDuplicates) {
  Bytes payload(5000);
  std::iota(payload.begin(), payload.end(), 0);
  auto frags = fragment_probe(Mode::kEcho, 9, 123, payload, 300);
  ASSERT_GT(frags.size(), 10u);
  std::mt19937_64 rng(1);
  std::shuffle(frags.begin(), frags.end(), rng);

  Reassembler r;
  std::optional<Probe> done;
  for (std::size_t i = 0; i < frags.size(); ++i) {
    auto out = r.add(frags[i]);
    if (i + 1 < frags.size()) {
      EXPECT_FALSE(out);
      EXPECT_FALSE(r.add(frags[i]));  // duplicate
    } else {
      done = out;
    }
  }
  ASSERT_TRUE(done);
  EXPECT_EQ(done->seq, 9u);
  EXPECT_EQ(done->timestamp_ns, 123u);
  EXPECT_EQ(done->payload, payload);
  EXPECT_EQ(r.pending(), 0u);
}

TEST(Fragmentation, PendingIsBounded) {
  Reassembler r(4);
  for (std::uint64_t seq = 0; seq < 10; ++seq) r.add(Fragment{Mode::kEcho, seq, 0, 0, 2, {1}});
  EXPECT_EQ(r.pending(), 4u);
}

TEST(Stats, KnownValues) {
  const std::vector<double> v = {3, 1, 2, 10, 4, 5, 6, 7, 8, 9};
  const LatencyStats s = compute_stats(v, 12);
  EXPECT_EQ(s.count, 10u);
  EXPECT_EQ(s.loss, 2u);
  EXPECT_DOUBLE_EQ(s.mean_ms, 5.5);
  EXPECT_NEAR(s.stddev_ms, std::sqrt(82.5 / 9), 1e-12);
  EXPECT_EQ(s.min_ms, 1);
  EXPECT_EQ(s.p50_ms, 5);
  EXPECT_EQ(s.p95_ms, 10);
  EXPECT_EQ(s.p99_ms, 10);
  EXPECT_EQ(s.max_ms, 10);
}

TEST(Stats, InvariantChainOnRandomSamples) {
  std::mt19937_64 rng(6);
  std::lognormal_distribution<double> d(0, 1);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> v(1 + rng() % 300);
    double sum = 0;
    for (auto& x : v) sum += (x = d(rng));
    const LatencyStats s = compute_stats(v, v.size());
    EXPECT_LE(s.min_ms, s.p50_ms);
    EXPECT_LE(s.p50_ms, s.p95_ms);
    EXPECT_LE(s.p95_ms, s.p99_ms);
    EXPECT_LE(s.p99_ms, s.max_ms);
    EXPECT_NEAR(s.mean_ms, sum / static_cast<double>(v.size()), 1e-12 * sum);
    EXPECT_EQ(s.loss, 0u);
  }
}

TEST(Stats, EmptyAndReceiverGaps) {
  const LatencyStats empty = compute_stats({}, 0);
  EXPECT_EQ(empty.count, 0u);
  EXPECT_EQ(empty.mean_ms, 0.0);
  const std::vector<ProbeRecord> recs = {{0, 0, 0, 1.0, ""}, {3, 0, 0, 2.0, ""}, {1, 0, 0, 3.0, ""}};
  const LatencyStats s = summarize_received(recs);
  EXPECT_EQ(s.count, 3u);
  EXPECT_EQ(s.loss, 1u);
  EXPECT_DOUBLE_EQ(s.mean_ms, 2.0);
  EXPECT_NE(stats_json(s).find("\"p99_ms\""), std::string::npos);
}

TEST(Csv, ProbeTable) {
  std::ostringstream out;
  const std::vector<ProbeRecord> recs = {{0, 10, 20, 0.5, "ok"}, {1, 11, 0, std::nullopt, "lost"}};
  write_probe_csv(out, recs);
  EXPECT_EQ(out.str(), "seq,send_ns,recv_ns,rtt_ms,open_result\n0,10,20,0.5,ok\n1,11,0,,lost\n");
}

std::uint16_t closed_port() {
  const int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
  sockaddr_in a{};
  a.sin_family = AF_INET;
  a.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ::bind(fd, reinterpret_cast<sockaddr*>(&a), sizeof a);
  socklen_t len = sizeof a;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&a), &len);
  ::close(fd);
  return ntohs(a.sin_port);
}

TEST(Sender, ZeroCountIsEmpty) {
  SenderConfig cfg;
  cfg.port = 9;
  cfg.count = 0;
  const auto r = run_sender(cfg);
  EXPECT_EQ(r.stats.count, 0u);
  EXPECT_EQ(r.stats.sent, 0u);
  EXPECT_TRUE(r.records.empty());
}

TEST(Sender, UnreachableTargetIsFullLoss) {
  SenderConfig cfg;
  cfg.port = closed_port();
  cfg.count = 5;
  cfg.rate_hz = 200;
  cfg.timeout_ms = 200;
  const auto r = run_sender(cfg);
  EXPECT_EQ(r.stats.sent, 5u);
  EXPECT_EQ(r.stats.loss, 5u);
  EXPECT_EQ(r.stats.count, 0u);
  for (const auto& rec : r.records) EXPECT_EQ(rec.open_result, "lost");
}

class LoopbackTest : public ::testing::Test {
 protected:
  void SetUp() override {
    DeterministicRng rng(3);
    keys_ = abe::setup(default_context(), rng);
    good_ = abe::keygen(keys_.mk, {"Alpha", "Blue", "Leader"}, rng);
    bad_ = abe::keygen(keys_.mk, {"Beta", "Blue", "Member"}, rng);
    envelope_ = serialize_envelope(seal(keys_.pk, testing::kExamplePolicy, Bytes(3000, 7), rng));
  }

  std::pair<SenderResult, std::vector<ProbeRecord>> run(const abe::UserSecretKey& key, Mode mode,
                                                        std::size_t count) {
    ReceiverConfig rc;
    rc.bind_address = "127.0.0.1";
    rc.key = key;
    rc.max_probes = count;
    rc.idle_timeout_ms = 3000;
    Receiver receiver(rc);
    std::vector<ProbeRecord> log;
    std::thread t([&] { log = receiver.run(); });
    SenderConfig sc;
    sc.port = receiver.port();
    sc.mode = mode;
    sc.count = count;
    sc.rate_hz = 500;
    sc.payload = envelope_;
    SenderResult res = run_sender(sc);
    t.join();
    return {std::move(res), std::move(log)};
  }

  abe::KeyPair keys_;
  abe::UserSecretKey good_, bad_;
  Bytes envelope_;
};

TEST_F(LoopbackTest, EchoWithSatisfyingKey) {
  auto [res, log] = run(good_, Mode::kEcho, 50);
  EXPECT_EQ(res.stats.loss, 0u);
  EXPECT_EQ(res.stats.count, 50u);
  EXPECT_LT(res.stats.p99_ms, 5.0);
  EXPECT_LE(res.stats.min_ms, res.stats.p50_ms);
  EXPECT_LE(res.stats.p99_ms, res.stats.max_ms);
  ASSERT_EQ(log.size(), 50u);
  for (const auto& r : log) EXPECT_EQ(r.open_result, "ok");
  double sum = 0;
  for (const auto& r : res.records) sum += *r.rtt_ms;
  EXPECT_NEAR(res.stats.mean_ms, sum / 50, 1e-9);
}

TEST_F(LoopbackTest, EchoWithNonSatisfyingKeyStillMeasures) {
  auto [res, log] = run(bad_, Mode::kEcho, 20);
  EXPECT_EQ(res.stats.loss, 0u);
  ASSERT_EQ(log.size(), 20u);
  for (const auto& r : log) EXPECT_EQ(r.open_result, "policy-not-satisfied");
}

TEST_F(LoopbackTest, OneWayRecordsLatencyAtReceiver) {
  auto [res, log] = run(good_, Mode::kOneWay, 10);
  EXPECT_EQ(res.records.size(), 10u);
  ASSERT_EQ(log.size(), 10u);
  for (std::size_t i = 0; i < log.size(); ++i) {
    EXPECT_EQ(log[i].seq, i);
    ASSERT_TRUE(log[i].rtt_ms);
    EXPECT_GE(*log[i].rtt_ms, 0.0);
    EXPECT_EQ(log[i].open_result, "ok");
  }
}

TEST_F(LoopbackTest, ArrivalOrderPreserved) {
  ReceiverConfig rc;
  rc.bind_address = "127.0.0.1";
  rc.max_probes = 3;
  rc.idle_timeout_ms = 2000;
  Receiver receiver(rc);
  std::vector<ProbeRecord> log;
  std::thread t([&] { log = receiver.run(); });

  const int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
  sockaddr_in to{};
  to.sin_family = AF_INET;
  to.sin_port = htons(receiver.port());
  to.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  for (std::uint64_t seq : {2, 0, 1}) {
    const Bytes d = encode_fragment(Fragment{Mode::kOneWay, seq, 1, 0, 1, {}});
    ::sendto(fd, d.data(), d.size(), 0, reinterpret_cast<sockaddr*>(&to), sizeof to);
  }
  t.join();
  ::close(fd);
  ASSERT_EQ(log.size(), 3u);
  EXPECT_EQ(log[0].seq, 2u);
  EXPECT_EQ(log[1].seq, 0u);
  EXPECT_EQ(log[2].seq, 1u);
  EXPECT_EQ(log[0].open_result, "n/a");
  EXPECT_EQ(summarize_received(log).loss, 0u);
}

TEST(Receiver, StopsOnRequest) {
  ReceiverConfig rc;
  rc.bind_address = "127.0.0.1";
  Receiver receiver(rc);
  EXPECT_NE(receiver.port(), 0);
  std::thread t([&] { receiver.run(); });
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  receiver.stop();
  t.join();
}

TEST(Receiver, BindFailureReported) {
  const int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
  sockaddr_in a{};
  a.sin_family = AF_INET;
  a.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ::bind(fd, reinterpret_cast<sockaddr*>(&a), sizeof a);
  socklen_t len = sizeof a;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&a), &len);
  ReceiverConfig rc;
  rc.bind_address = "127.0.0.1";
  rc.port = ntohs(a.sin_port);
  // The holder did not set SO_REUSEADDR, so a second bind must fail.
  try {
    Receiver r(rc);
    ADD_FAILURE() << "bind unexpectedly succeeded";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNetwork);
  }
  ::close(fd);
}

}  // namespace
}  // namespace starcast::lathare
