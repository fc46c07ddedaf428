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

#include "starcast/lathare.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <pthread.h>
#include <sched.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <iomanip>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>
#include <utility>

#include <json.hpp>

#include "starcast/envelope.hpp"
#include "starcast/error.hpp"

namespace starcast::lathare {
namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t steady_ns() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now().time_since_epoch()).count());
}

std::uint64_t wall_ns() {
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(
                                        std::chrono::system_clock::now().time_since_epoch())
                                        .count());
}

[[noreturn]] void socket_fail(const std::string& what) {
  fail(ErrorCode::kNetwork, what + ": " + std::strerror(errno));
}

class Socket {
 public:
  Socket() {
    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd_ < 0) socket_fail("socket");
  }
  ~Socket() {
    if (fd_ >= 0) ::close(fd_);
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  int fd() const { return fd_; }
  int release() { return std::exchange(fd_, -1); }

  void set_flag(int level, int opt, const char* what) {
    int one = 1;
    if (::setsockopt(fd_, level, opt, &one, sizeof one) != 0) socket_fail(what);
  }

 private:
  int fd_ = -1;
};

sockaddr_in resolve(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (host.empty() || host == "0.0.0.0" || host == "*") {
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    return addr;
  }
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_DGRAM;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), nullptr, &hints, &res); rc != 0 || res == nullptr) {
    fail(ErrorCode::kNetwork, "cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return addr;
}

// Returns the number of bytes received, or -1 when nothing is ready.
ssize_t receive(int fd, Bytes& buf, int wait_ms, sockaddr_in* from) {
  pollfd pfd{fd, POLLIN, 0};
  int rc = ::poll(&pfd, 1, std::max(wait_ms, 0));
  if (rc < 0) {
    if (errno == EINTR) return -1;
    socket_fail("poll");
  }
  if (rc == 0) return -1;
  socklen_t len = sizeof(sockaddr_in);
  ssize_t n = ::recvfrom(fd, buf.data(), buf.size(), 0, reinterpret_cast<sockaddr*>(from), from ? &len : nullptr);
  if (n < 0) {
    // ICMP port-unreachable surfaces here on connected-ish paths; it is just loss.
    if (errno == ECONNREFUSED || errno == EAGAIN || errno == EINTR) return -1;
    socket_fail("recvfrom");
  }
  return n;
}

double percentile(const std::vector<double>& sorted, double p) {
  const auto n = sorted.size();
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

}  // namespace

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::kEcho: return "echo";
    case Mode::kOneWay: return "one-way";
    case Mode::kEchoReply: return "echo-reply";
  }
  return "unknown";
}

Bytes encode_fragment(const Fragment& frag) {
  ByteWriter w;
  w.raw(as_bytes(kWireMagic));
  w.u8(kWireVersion);
  w.u8(static_cast<std::uint8_t>(frag.mode));
  w.u64(frag.seq);
  w.u64(frag.timestamp_ns);
  w.u16(frag.index);
  w.u16(frag.count);
  w.raw(frag.payload);
  return std::move(w).bytes();
}

Fragment decode_fragment(ByteView datagram) {
  ByteReader r(datagram);
  auto magic = r.take(4);
  if (!std::equal(magic.begin(), magic.end(), kWireMagic.begin())) {
    fail(ErrorCode::kMalformedInput, "not a probe datagram");
  }
  if (auto v = r.u8(); v != kWireVersion) {
    fail(ErrorCode::kVersionUnsupported, "probe wire version " + std::to_string(v));
  }
  Fragment f;
  const auto mode = r.u8();
  if (mode > 2) fail(ErrorCode::kMalformedInput, "unknown probe mode " + std::to_string(mode));
  f.mode = static_cast<Mode>(mode);
  f.seq = r.u64();
  f.timestamp_ns = r.u64();
  f.index = r.u16();
  f.count = r.u16();
  if (f.count == 0 || f.index >= f.count) fail(ErrorCode::kMalformedInput, "bad fragment index");
  auto rest = r.take(r.remaining());
  f.payload.assign(rest.begin(), rest.end());
  return f;
}

std::vector<Fragment> fragment_probe(Mode mode, std::uint64_t seq, std::uint64_t timestamp_ns, ByteView payload,
                                     std::size_t budget) {
  if (budget <= kWireHeaderBytes) fail(ErrorCode::kInvalidArgument, "datagram budget too small");
  const std::size_t chunk = budget - kWireHeaderBytes;
  const std::size_t count = payload.empty() ? 1 : (payload.size() + chunk - 1) / chunk;
  if (count > 0xffff) fail(ErrorCode::kInvalidArgument, "payload needs too many fragments");
  std::vector<Fragment> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t off = i * chunk;
    const std::size_t len = std::min(chunk, payload.size() - std::min(off, payload.size()));
    Fragment f{mode, seq, timestamp_ns, static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(count),
               Bytes(payload.begin() + off, payload.begin() + off + len)};
    out.push_back(std::move(f));
  }
  return out;
}

std::optional<Probe> Reassembler::add(Fragment frag) {
  if (frag.count == 1) return Probe{frag.mode, frag.seq, frag.timestamp_ns, std::move(frag.payload)};

  auto it = pending_.find(frag.seq);
  if (it == pending_.end()) {
    if (pending_.size() >= max_pending_) {
      auto oldest = std::min_element(pending_.begin(), pending_.end(),
                                     [](const auto& a, const auto& b) { return a.second.order < b.second.order; });
      pending_.erase(oldest);
    }
    Partial p{frag.mode, frag.timestamp_ns, std::vector<std::optional<Bytes>>(frag.count), 0, next_order_++};
    it = pending_.emplace(frag.seq, std::move(p)).first;
  }
  Partial& p = it->second;
  if (p.parts.size() != frag.count) return std::nullopt;  // inconsistent framing, drop
  if (!p.parts[frag.index]) {
    p.parts[frag.index] = std::move(frag.payload);
    ++p.have;
  }
  if (p.have < p.parts.size()) return std::nullopt;

  Probe probe{p.mode, frag.seq, p.timestamp_ns, {}};
  for (auto& part : p.parts) probe.payload.insert(probe.payload.end(), part->begin(), part->end());
  pending_.erase(it);
  return probe;
}

LatencyStats compute_stats(std::span<const double> latencies_ms, std::size_t sent) {
  LatencyStats s;
  s.sent = sent;
  s.count = latencies_ms.size();
  s.loss = sent > s.count ? sent - s.count : 0;
  if (latencies_ms.empty()) return s;

  std::vector<double> sorted(latencies_ms.begin(), latencies_ms.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0;
  for (double v : sorted) sum += v;
  const double n = static_cast<double>(sorted.size());
  s.mean_ms = sum / n;
  if (sorted.size() > 1) {
    double ss = 0;
    for (double v : sorted) ss += (v - s.mean_ms) * (v - s.mean_ms);
    s.stddev_ms = std::sqrt(ss / (n - 1));
  }
  s.min_ms = sorted.front();
  s.max_ms = sorted.back();
  s.p50_ms = percentile(sorted, 50);
  s.p95_ms = percentile(sorted, 95);
  s.p99_ms = percentile(sorted, 99);
  return s;
}

LatencyStats summarize_received(std::span<const ProbeRecord> records) {
  std::vector<double> lat;
  std::set<std::uint64_t> seen;
  std::uint64_t highest = 0;
  for (const auto& r : records) {
    if (!seen.insert(r.seq).second) continue;
    highest = std::max(highest, r.seq);
    if (r.rtt_ms) lat.push_back(*r.rtt_ms);
  }
  const std::size_t expected = seen.empty() ? 0 : static_cast<std::size_t>(highest) + 1;
  LatencyStats s = compute_stats(lat, expected);
  s.loss = expected - seen.size();
  return s;
}

std::string stats_json(const LatencyStats& s) {
  nlohmann::json j = {{"sent", s.sent},       {"count", s.count},   {"loss", s.loss},
                      {"mean_ms", s.mean_ms}, {"stddev_ms", s.stddev_ms},
                      {"p50_ms", s.p50_ms},   {"p95_ms", s.p95_ms}, {"p99_ms", s.p99_ms},
                      {"min_ms", s.min_ms},   {"max_ms", s.max_ms}};
  return j.dump(2) + "\n";
}

void write_probe_csv(std::ostream& out, std::span<const ProbeRecord> records) {
  out << "seq,send_ns,recv_ns,rtt_ms,open_result\n";
  out << std::setprecision(9);
  for (const auto& r : records) {
    out << r.seq << ',' << r.send_ns << ',' << r.recv_ns << ',';
    if (r.rtt_ms) out << *r.rtt_ms;
    out << ',' << r.open_result << '\n';
  }
}

std::string open_outcome(ByteView payload, const abe::UserSecretKey& key) {
  try {
    Envelope env = deserialize_envelope(payload);
    open(env, key);
    return "ok";
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::kPolicyNotSatisfied: return "policy-not-satisfied";
      case ErrorCode::kEpochMismatch: return "epoch-mismatch";
      case ErrorCode::kAuthenticationFailure: return "auth-failure";
      default: return "malformed";
    }
  }
}

SenderResult run_sender(const SenderConfig& cfg) {
  if (cfg.mode == Mode::kEchoReply) fail(ErrorCode::kInvalidArgument, "sender mode must be echo or one-way");
  if (!(cfg.rate_hz > 0)) fail(ErrorCode::kInvalidArgument, "rate must be positive");

  SenderResult result;
  result.stats.sent = 0;
  if (cfg.count == 0) return result;

  Socket sock;
  if (cfg.broadcast) sock.set_flag(SOL_SOCKET, SO_BROADCAST, "SO_BROADCAST");
  const sockaddr_in target = resolve(cfg.host, cfg.port);
  const bool echo = cfg.mode == Mode::kEcho;

  std::unordered_map<std::uint64_t, std::size_t> index_of;
  std::vector<double> rtts;
  Bytes buf(65536);

  auto drain = [&](int wait_ms) {
    sockaddr_in from{};
    ssize_t n = receive(sock.fd(), buf, wait_ms, &from);
    if (n < 0) return false;
    const std::uint64_t now = steady_ns();
    try {
      Fragment f = decode_fragment(ByteView(buf.data(), static_cast<std::size_t>(n)));
      if (f.mode != Mode::kEchoReply) return true;
      auto it = index_of.find(f.seq);
      if (it == index_of.end()) return true;
      ProbeRecord& rec = result.records[it->second];
      if (rec.rtt_ms || f.timestamp_ns != rec.send_ns) return true;
      rec.recv_ns = now;
      rec.rtt_ms = static_cast<double>(now - rec.send_ns) / 1e6;
      rec.open_result = "echoed";
      rtts.push_back(*rec.rtt_ms);
    } catch (const Error&) {
      // Stray datagram on our port.
    }
    return true;
  };

  const auto interval = std::chrono::nanoseconds(static_cast<std::int64_t>(1e9 / cfg.rate_hz));
  auto next = Clock::now();
  for (std::size_t i = 0; i < cfg.count; ++i) {
    while (true) {
      const auto now = Clock::now();
      if (now >= next) break;
      const int wait = static_cast<int>(std::chrono::duration_cast<std::chrono::milliseconds>(next - now).count());
      if (echo) {
        drain(wait);
      } else {
        std::this_thread::sleep_until(next);
      }
    }
    const std::uint64_t ts = echo ? steady_ns() : wall_ns();
    for (const Fragment& f : fragment_probe(cfg.mode, i, ts, cfg.payload, cfg.datagram_budget)) {
      Bytes dgram = encode_fragment(f);
      ssize_t rc = ::sendto(sock.fd(), dgram.data(), dgram.size(), 0, reinterpret_cast<const sockaddr*>(&target),
                            sizeof target);
      if (rc < 0 && errno != ECONNREFUSED) socket_fail("sendto");
    }
    index_of[i] = result.records.size();
    result.records.push_back(ProbeRecord{i, ts, 0, std::nullopt, echo ? "" : "sent"});
    next += interval;
  }

  if (echo) {
    const auto deadline = Clock::now() + std::chrono::milliseconds(cfg.timeout_ms);
    while (rtts.size() < cfg.count) {
      const auto now = Clock::now();
      if (now >= deadline) break;
      drain(static_cast<int>(std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count()) + 1);
    }
    for (auto& rec : result.records) {
      if (!rec.rtt_ms) rec.open_result = "lost";
    }
  }
  result.stats = compute_stats(rtts, cfg.count);
  return result;
}

Receiver::Receiver(ReceiverConfig cfg) : cfg_(std::move(cfg)) {
  Socket sock;
  sock.set_flag(SOL_SOCKET, SO_REUSEADDR, "SO_REUSEADDR");
  sock.set_flag(SOL_SOCKET, SO_BROADCAST, "SO_BROADCAST");
  const sockaddr_in addr = resolve(cfg_.bind_address, cfg_.port);
  if (::bind(sock.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) socket_fail("bind");
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  if (::getsockname(sock.fd(), reinterpret_cast<sockaddr*>(&bound), &len) != 0) socket_fail("getsockname");
  port_ = ntohs(bound.sin_port);
  fd_ = sock.release();
}

Receiver::~Receiver() {
  if (fd_ >= 0) ::close(fd_);
}

std::vector<ProbeRecord> Receiver::run() {
  std::vector<ProbeRecord> log;
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::pair<ProbeRecord, Bytes>> queue;
  bool intake_done = false;

  // Opening runs behind intake so that decryption never delays echoes or
  // receive timestamps. One worker keeps records in arrival order.
  std::thread opener([&] {
#ifdef __linux__
    // On a single core the worker must yield to intake as soon as a datagram lands.
    const sched_param idle{};
    pthread_setschedparam(pthread_self(), SCHED_IDLE, &idle);
#endif
    while (true) {
      std::unique_lock lock(mu);
      cv.wait(lock, [&] { return intake_done || !queue.empty(); });
      if (queue.empty()) return;
      auto [rec, payload] = std::move(queue.front());
      queue.pop_front();
      lock.unlock();
      if (cfg_.key) rec.open_result = open_outcome(payload, *cfg_.key);
      lock.lock();
      log.push_back(std::move(rec));
    }
  });

  Reassembler reassembler;
  Bytes buf(65536);
  std::size_t received = 0;
  auto last_activity = Clock::now();
  constexpr int kSliceMs = 50;

  try {
    while (!stop_.load()) {
      if (cfg_.max_probes != 0 && received >= cfg_.max_probes) break;
      if (cfg_.idle_timeout_ms > 0 &&
          Clock::now() - last_activity >= std::chrono::milliseconds(cfg_.idle_timeout_ms)) {
        break;
      }
      sockaddr_in from{};
      ssize_t n = receive(fd_, buf, kSliceMs, &from);
      if (n < 0) continue;
      last_activity = Clock::now();

      std::optional<Probe> probe;
      try {
        probe = reassembler.add(decode_fragment(ByteView(buf.data(), static_cast<std::size_t>(n))));
      } catch (const Error&) {
        continue;
      }
      if (!probe || probe->mode == Mode::kEchoReply) continue;

      ProbeRecord rec{probe->seq, probe->timestamp_ns, 0, std::nullopt, "n/a"};
      if (probe->mode == Mode::kEcho) {
        rec.recv_ns = steady_ns();
        Bytes dgram = encode_fragment(Fragment{Mode::kEchoReply, probe->seq, probe->timestamp_ns, 0, 1, {}});
        ::sendto(fd_, dgram.data(), dgram.size(), 0, reinterpret_cast<const sockaddr*>(&from), sizeof from);
      } else {
        rec.recv_ns = wall_ns();
        rec.rtt_ms = (static_cast<double>(rec.recv_ns) - static_cast<double>(probe->timestamp_ns)) / 1e6;
      }
      ++received;
      {
        std::lock_guard lock(mu);
        queue.emplace_back(std::move(rec), std::move(probe->payload));
      }
      cv.notify_one();
    }
  } catch (...) {
    {
      std::lock_guard lock(mu);
      intake_done = true;
    }
    cv.notify_one();
    opener.join();
    throw;
  }
  {
    std::lock_guard lock(mu);
    intake_done = true;
  }
  cv.notify_one();
  opener.join();
  return log;
}

}  // namespace starcast::lathare
