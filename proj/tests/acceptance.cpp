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

// Runs the twelve acceptance checks and prints one verdict line per check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "starcast/abe.hpp"
#include "starcast/authority.hpp"
#include "starcast/envelope.hpp"
#include "starcast/error.hpp"
#include "starcast/lathare.hpp"
#include "starcast/linksim.hpp"
#include "test_util.hpp"

namespace starcast {
namespace {

using testing::kExamplePolicy;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

std::optional<ErrorCode> error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

std::string join(const std::string& op, std::size_t n, const std::string& prefix = "x") {
  std::string s = prefix + "0";
  for (std::size_t i = 1; i < n; ++i) s += " " + op + " " + prefix + std::to_string(i);
  return s;
}

AttributeSet names(std::size_t n, const std::string& prefix = "x") {
  AttributeSet s;
  for (std::size_t i = 0; i < n; ++i) s.insert(prefix + std::to_string(i));
  return s;
}

double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icept = (sy - slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ss_res += std::pow(y[i] - (slope * x[i] + icept), 2);
    ss_tot += std::pow(y[i] - sy / n, 2);
  }
  return 1 - ss_res / ss_tot;
}

template <typename F>
double median_ms(std::size_t reps, F&& f) {
  std::vector<double> t;
  for (std::size_t i = 0; i < reps; ++i) {
    const auto t0 = Clock::now();
    f();
    t.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
  }
  std::nth_element(t.begin(), t.begin() + t.size() / 2, t.end());
  return t[t.size() / 2];
}

Verdict scheme_correctness() {
  Verdict v;
  const auto t0 = Clock::now();
  DeterministicRng rng(101);
  const auto keys = abe::setup(default_context(), rng);
  std::mt19937_64 gen(1);
  int accepted = 0, rejected = 0;
  while (accepted < 200 || rejected < 200) {
    const PolicyAst ast = testing::random_policy(gen, 1 + gen() % 8, 6);
    const auto leaves = testing::distinct_leaves(ast);
    const AttributeSet s = testing::subset(leaves, gen());
    const bool ok = testing::brute_evaluate(ast.root(), s);
    if ((ok && accepted >= 200) || (!ok && rejected >= 200)) continue;
    const Msp msp = to_msp(ast);
    const Gt m = Gt::random(rng);
    const auto hdr = abe::encrypt_element(keys.pk, msp, m, rng);
    const auto sk = abe::keygen(keys.mk, s, rng);
    if (ok) {
      v.require(abe::decrypt_element(hdr, sk) == m, "roundtrip mismatch for " + ast.render());
      ++accepted;
    } else {
      v.require(error_of([&] { abe::decrypt_element(hdr, sk); }) == ErrorCode::kPolicyNotSatisfied,
                "missing rejection for " + ast.render());
      ++rejected;
    }
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  v.require(secs < 60, "took " + std::to_string(secs) + " s");
  if (v.ok) v.detail = "200 accepted, 200 rejected in " + std::to_string(secs).substr(0, 5) + " s";
  return v;
}

Verdict worked_example() {
  Verdict v;
  DeterministicRng rng(102);
  const auto keys = abe::setup(default_context(), rng);
  const Bytes msg{'o', 'r', 'd', 'e', 'r', 's'};
  const Envelope env = seal(keys.pk, kExamplePolicy, msg, rng);
  const auto s1 = abe::keygen(keys.mk, {"Alpha", "Blue", "Leader"}, rng);
  const auto s4 = abe::keygen(keys.mk, {"Beta", "Blue", "Member"}, rng);
  v.require(open(env, s1) == msg, "S1 did not recover the payload");
  v.require(error_of([&] { open(env, s4); }) == ErrorCode::kPolicyNotSatisfied, "S4 was not rejected");
  if (v.ok) v.detail = "S1 opens, S4 policy-not-satisfied";
  return v;
}

Verdict msp_equivalence() {
  Verdict v;
  std::mt19937_64 gen(3);
  std::size_t subsets = 0, reconstructions = 0;
  for (int f = 0; f < 100; ++f) {
    const PolicyAst ast = testing::random_policy(gen, 1 + gen() % 10, 8);
    const Msp msp = to_msp(ast);
    const auto leaves = testing::distinct_leaves(ast);
    for (std::uint64_t mask = 0; mask < (1ULL << leaves.size()); ++mask) {
      const AttributeSet s = testing::subset(leaves, mask);
      const bool want = testing::brute_evaluate(ast.root(), s);
      v.require(accepts(msp, s) == want, "accepts mismatch for " + ast.render());
      const auto rec = reconstruct(msp, s);
      v.require(rec.has_value() == want, "reconstruct mismatch for " + ast.render());
      if (rec) {
        v.require(testing::reconstruction_hits_target(msp, *rec), "target missed for " + ast.render());
        ++reconstructions;
      }
      ++subsets;
    }
  }
  if (v.ok) {
    v.detail = std::to_string(subsets) + " subsets, " + std::to_string(reconstructions) + " exact reconstructions";
  }
  return v;
}

Verdict constant_pairings() {
  Verdict v;
  DeterministicRng rng(104);
  const auto keys = abe::setup(default_context(), rng);
  for (std::size_t key_size : {1u, 10u, 100u}) {
    AttributeSet attrs = names(key_size, "k");
    attrs.insert("x0");
    const auto sk = abe::keygen(keys.mk, attrs, rng);
    for (std::size_t n1 : {1u, 10u, 100u}) {
      const Msp msp = to_msp(parse_policy(join("OR", n1)));
      const auto [hdr, key] = abe::encap(keys.pk, msp, rng);
      reset_pairing_count();
      v.require(abe::decap(hdr, sk) == key, "decap failed");
      const auto after_decap = pairing_count();
      const Gt m = Gt::random(rng);
      const auto elem = abe::encrypt_element(keys.pk, msp, m, rng);
      reset_pairing_count();
      v.require(abe::decrypt_element(elem, sk) == m, "decrypt failed");
      const std::string at = "|S|=" + std::to_string(attrs.size()) + " n1=" + std::to_string(n1);
      v.require(after_decap == 6, "decap used " + std::to_string(after_decap) + " pairings at " + at);
      v.require(pairing_count() == 6, "decrypt used " + std::to_string(pairing_count()) + " pairings at " + at);
    }
  }
  // All rows needed: every attribute key enters the products.
  const auto full = abe::keygen(keys.mk, names(100), rng);
  const auto [hdr, key] = abe::encap(keys.pk, to_msp(parse_policy(join("AND", 100))), rng);
  reset_pairing_count();
  v.require(abe::decap(hdr, full) == key, "100-way AND decap failed");
  v.require(pairing_count() == 6, "100-way AND used " + std::to_string(pairing_count()) + " pairings");
  if (v.ok) v.detail = "6 pairings in all 19 decryptions";
  return v;
}

Verdict linear_scaling() {
  Verdict v;
  DeterministicRng rng(105);
  const auto keys = abe::setup(default_context(), rng);
  constexpr std::size_t kReps = 20;
  std::vector<double> x, keygen_ms, encrypt_ms, setup_ms;
  for (std::size_t n = 10; n <= 100; n += 10) {
    const AttributeSet attrs = names(n);
    const Msp msp = to_msp(parse_policy(join("AND", n)));
    x.push_back(static_cast<double>(n));
    keygen_ms.push_back(median_ms(kReps, [&] { abe::keygen(keys.mk, attrs, rng); }));
    encrypt_ms.push_back(median_ms(kReps, [&] { abe::encap(keys.pk, msp, rng); }));
    setup_ms.push_back(median_ms(kReps, [&] { abe::setup(default_context(), rng); }));
  }
  const double r2_keygen = r_squared(x, keygen_ms);
  const double r2_encrypt = r_squared(x, encrypt_ms);
  const auto [lo, hi] = std::minmax_element(setup_ms.begin(), setup_ms.end());
  const double spread = *hi / *lo;
  char buf[160];
  std::snprintf(buf, sizeof buf, "R2 keygen %.4f, R2 encrypt %.4f, setup max/min %.2f (%.1f..%.1f ms)", r2_keygen,
                r2_encrypt, spread, *lo, *hi);
  v.require(r2_keygen >= 0.98, buf);
  v.require(r2_encrypt >= 0.98, buf);
  v.require(spread < 2.0, buf);
  v.detail = buf;
  return v;
}

Verdict size_law() {
  Verdict v;
  DeterministicRng rng(106);
  const auto keys = abe::setup(default_context(), rng);
  for (std::size_t n1 : {1u, 4u, 16u, 64u}) {
    const Msp msp = to_msp(parse_policy(join("OR", n1, "r")));
    const std::size_t framing = kHeaderFraming + msp.policy.size();
    const std::size_t base = 3 * n1 * G1::kBytes + 3 * G2::kBytes + framing;
    const auto [kem, key] = abe::encap(keys.pk, msp, rng);
    v.require(serialize_header(kem).size() == base, "kem header size at n1=" + std::to_string(n1));
    const auto elem = abe::encrypt_element(keys.pk, msp, Gt::random(rng), rng);
    v.require(serialize_header(elem).size() == base + Gt::kBytes, "element header size at n1=" + std::to_string(n1));
  }
  if (v.ok) {
    v.detail = "3*n1*" + std::to_string(G1::kBytes) + " + 3*" + std::to_string(G2::kBytes) + " (+" +
               std::to_string(Gt::kBytes) + ") + " + std::to_string(kHeaderFraming) + " + |policy| for n1 in 1,4,16,64";
  }
  return v;
}

Verdict collusion() {
  Verdict v;
  DeterministicRng rng(107);
  const auto keys = abe::setup(default_context(), rng);
  std::mt19937_64 gen(7);
  int splits = 0, mixes = 0;
  while (splits < 50) {
    const PolicyAst ast = testing::random_policy(gen, 2 + gen() % 7, 8);
    const auto leaves = testing::distinct_leaves(ast);
    const AttributeSet s = testing::subset(leaves, gen());
    if (!testing::brute_evaluate(ast.root(), s)) continue;
    AttributeSet a, b;
    for (const auto& name : s) ((gen() & 1) ? a : b).insert(name);
    if (a.size() == 0 || b.size() == 0) continue;
    if (testing::brute_evaluate(ast.root(), a) || testing::brute_evaluate(ast.root(), b)) continue;
    ++splits;

    const Msp msp = to_msp(ast);
    const Envelope env = seal(keys.pk, ast.render(), Bytes{1, 2, 3}, rng);
    const auto [hdr, key] = abe::encap(keys.pk, msp, rng);
    const auto ka = abe::keygen(keys.mk, a, rng);
    const auto kb = abe::keygen(keys.mk, b, rng);
    for (const auto* base : {&ka, &kb}) {
      for (const auto* prime : {&ka, &kb}) {
        abe::UserSecretKey mix = *base;
        mix.sk_prime = prime->sk_prime;
        for (const auto& [name, triple] : ka.attribute_keys) mix.attribute_keys[name] = triple;
        for (const auto& [name, triple] : kb.attribute_keys) mix.attribute_keys[name] = triple;
        v.require(!(abe::decap(hdr, mix) == key), "mixed key recovered session key for " + ast.render());
        v.require(error_of([&] { open(env, mix); }).has_value(), "mixed key opened envelope for " + ast.render());
        ++mixes;
      }
    }
  }
  if (v.ok) v.detail = std::to_string(splits) + " splits, " + std::to_string(mixes) + " mixed keys rejected";
  return v;
}

Verdict epochs() {
  Verdict v;
  DeterministicRng rng(108);
  auto reg = authority::Registry::create(default_context(), rng);
  const Bytes msg{'h', 'i'};
  const auto alice = reg.register_user("alice", {"Alpha", "Leader"}, rng);
  const Envelope pre_join = seal(reg.public_key(), kExamplePolicy, msg, rng);
  const auto newcomer = reg.register_user("newcomer", {"Alpha", "Leader"}, rng);
  v.require(error_of([&] { open(pre_join, newcomer.key); }) == ErrorCode::kEpochMismatch,
            "new user opened a pre-join envelope");
  const auto carol = reg.register_user("carol", {"Alpha", "Blue", "Member"}, rng);
  const auto carol_key = reg.current_keys().at(carol.user_id);
  reg.revoke_user(carol.user_id, rng);
  const Envelope post = seal(reg.public_key(), kExamplePolicy, msg, rng);
  v.require(error_of([&] { open(post, carol_key); }).has_value(), "revoked user opened a later envelope");
  auto relabeled = carol_key;
  relabeled.epoch = reg.epoch();
  v.require(error_of([&] { open(post, relabeled); }) == ErrorCode::kAuthenticationFailure,
            "relabeled revoked key was not rejected");
  v.require(open(post, reg.current_keys().at(alice.user_id)) == msg, "remaining user could not open");
  v.require(open(post, reg.current_keys().at(newcomer.user_id)) == msg, "newcomer could not open later envelope");
  if (v.ok) v.detail = "pre-join, post-revocation and relabeled keys rejected; members open";
  return v;
}

Verdict link_math() {
  Verdict v;
  using namespace linksim;
  constexpr double kPi = 3.14159265358979323846;
  const SatelliteParams p = SatelliteParams::reference();
  const double lambda = 299792458.0 / p.frequency_hz;
  double worst = 0;
  for (double theta : {1.0, 3.5, 7.0, 12.5, 20.0, 45.0}) {
    const double radius = p.height_m * std::tan(theta / 2 * kPi / 180);
    const double gain = p.efficiency * std::pow(70 * kPi / theta, 2);
    const double pr =
        0.5 * p.attenuation * gain * p.rx_gain * p.tx_power_w * std::pow(lambda / (4 * kPi * p.height_m), 2);
    const double rate = p.bandwidth_hz * std::log2(1 + pr / (p.noise_density_w_per_hz * p.bandwidth_hz));
    worst = std::max({worst, rel_err(beam_radius(p.height_m, theta), radius), rel_err(tx_gain(theta, p.efficiency), gain),
                      rel_err(received_power(p, theta), pr),
                      rel_err(user_rate(received_power(p, theta), p.bandwidth_hz, p.noise_density_w_per_hz), rate)});
  }
  v.require(worst < 1e-9, "formula relative error " + std::to_string(worst));

  const double g = tx_gain(1.0, p.efficiency);
  const double pr = received_power(p, 1.0);
  const double snr_db = linear_to_db(pr / (p.noise_density_w_per_hz * p.bandwidth_hz));
  v.require(std::abs(g - 3.385e4) / 3.385e4 < 1e-3, "gain " + std::to_string(g));
  v.require(std::abs(pr - 4.42e-9) / 4.42e-9 < 1e-2, "received power " + std::to_string(pr));
  const double spreading_db = 20 * std::log10(lambda / (4 * kPi * p.height_m));
  const double budget_dbw = 45.3 + 30.0 + 13.0 - 3.0 + spreading_db;
  const double budget_dev = std::abs(linear_to_db(pr) - budget_dbw);
  const double snr_dev = std::abs(snr_db - 30.5);
  v.require(budget_dev < 0.1, "dB budget off by " + std::to_string(budget_dev));
  v.require(snr_dev < 0.1, "SNR " + std::to_string(snr_db) + " dB");
  char buf[160];
  std::snprintf(buf, sizeof buf, "max rel err %.1e; G=%.4g, Pr=%.4g W, SNR=%.2f dB, budget dev %.3f dB", worst, g, pr,
                snr_db, budget_dev);
  if (v.ok) v.detail = buf;
  return v;
}

Verdict groupcast_ordering() {
  Verdict v;
  using namespace linksim;
  const SatelliteParams p = SatelliteParams::reference();
  double min_gain = std::numeric_limits<double>::infinity();
  for (std::size_t n : {40u, 80u, 160u}) {
    for (std::size_t m : {4u, 8u, 16u}) {
      const Scenario s = place_users(42, n, m, 10e3, p.max_beam_radius_m);
      for (std::size_t g = 1; g <= m; ++g) {
        const RateReport r = simulate(s, p, g);
        const std::string at = "N=" + std::to_string(n) + " M=" + std::to_string(m) + " group " + std::to_string(g);
        v.require(r.groupcast.sum_rate_bps > r.broadcast.sum_rate_bps, "groupcast <= broadcast at " + at);
        v.require(r.groupcast.sum_rate_bps > r.unicast.sum_rate_bps, "groupcast <= unicast at " + at);
        min_gain = std::min(min_gain, r.groupcast.sum_rate_bps / r.broadcast.sum_rate_bps);
      }
    }
  }
  double wide_gain = std::numeric_limits<double>::infinity();
  for (std::size_t n : {40u, 80u, 160u}) {
    const Scenario s = place_users(42, n, 2, 60e3, p.max_beam_radius_m);
    for (std::size_t g = 1; g <= 2; ++g) {
      const RateReport r = simulate(s, p, g);
      v.require(r.groupcast.sum_rate_bps >= r.broadcast.sum_rate_bps,
                "wide M=2 groupcast < broadcast at N=" + std::to_string(n));
      wide_gain = std::min(wide_gain, r.groupcast.sum_rate_bps / r.broadcast.sum_rate_bps);
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "min groupcast/broadcast %.2fx over 9 (N,M); wide M=2 %.2fx", min_gain, wide_gain);
  if (v.ok) v.detail = buf;
  return v;
}

Verdict latency() {
  Verdict v;
  DeterministicRng rng(111);
  const auto keys = abe::setup(default_context(), rng);
  const auto good = abe::keygen(keys.mk, {"Alpha", "Blue", "Leader"}, rng);
  const auto bad = abe::keygen(keys.mk, {"Beta", "Blue", "Member"}, rng);
  const Bytes payload = serialize_envelope(seal(keys.pk, kExamplePolicy, Bytes(512, 0x5a), rng));
  constexpr std::size_t kProbes = 100;
  double p99 = 0;
  std::size_t opened[2] = {0, 0};
  for (int which = 0; which < 2; ++which) {
    lathare::ReceiverConfig rc;
    rc.bind_address = "127.0.0.1";
    rc.key = which == 0 ? good : bad;
    rc.max_probes = kProbes;
    rc.idle_timeout_ms = 5000;
    lathare::Receiver receiver(rc);
    std::vector<lathare::ProbeRecord> log;
    std::thread t([&] { log = receiver.run(); });
    lathare::SenderConfig sc;
    sc.port = receiver.port();
    sc.count = kProbes;
    sc.rate_hz = 200;
    sc.payload = payload;
    const auto res = lathare::run_sender(sc);
    t.join();
    const auto& s = res.stats;
    v.require(s.sent == kProbes && s.loss == 0 && s.count == kProbes, "echo loss " + std::to_string(s.loss));
    v.require(s.min_ms <= s.p50_ms && s.p50_ms <= s.p95_ms && s.p95_ms <= s.p99_ms && s.p99_ms <= s.max_ms,
              "stats ordering broken");
    v.require(s.min_ms <= s.mean_ms && s.mean_ms <= s.max_ms && s.stddev_ms >= 0, "mean or spread out of range");
    v.require(log.size() == kProbes, "receiver logged " + std::to_string(log.size()));
    for (const auto& r : log) opened[which] += r.open_result == "ok";
    if (which == 0) p99 = s.p99_ms;
  }
  v.require(opened[0] == kProbes, "satisfying key opened " + std::to_string(opened[0]));
  v.require(opened[1] == 0, "non-satisfying key opened " + std::to_string(opened[1]));
  char buf[160];
  std::snprintf(buf, sizeof buf, "2x%zu probes of %zu B, 0 loss, open %zu%%/%zu%%, p99 %.3f ms", kProbes, payload.size(),
                opened[0], opened[1], p99);
  if (v.ok) v.detail = buf;
  return v;
}

Bytes read_hex_fixture(const std::string& name) {
  std::ifstream in(std::string(STARCAST_FIXTURE_DIR) + "/" + name);
  std::string hex((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  while (!hex.empty() && std::isspace(static_cast<unsigned char>(hex.back()))) hex.pop_back();
  return from_hex(hex);
}

Verdict serialization() {
  Verdict v;
  {
    DeterministicRng rng(20240601);
    const auto kp = abe::setup(default_context(), rng);
    const auto usk = abe::keygen(kp.mk, {"Alpha", "Blue", "Leader"}, rng);
    const Bytes golden_msg{'g', 'o', 'l', 'd', 'e', 'n', ' ', 'p', 'a', 'y', 'l', 'o', 'a', 'd'};
    const auto env = seal(kp.pk, kExamplePolicy, golden_msg, rng);
    v.require(serialize_public_key(kp.pk) == read_hex_fixture("golden_pk.hex"), "public key golden mismatch");
    v.require(serialize_master_key(kp.mk) == read_hex_fixture("golden_mk.hex"), "master key golden mismatch");
    v.require(serialize_user_secret_key(usk) == read_hex_fixture("golden_usk.hex"), "user key golden mismatch");
    v.require(serialize_envelope(env) == read_hex_fixture("golden_env.hex"), "envelope golden mismatch");
  }

  DeterministicRng rng(112);
  std::mt19937_64 gen(12);
  auto keys = abe::setup(default_context(), rng);
  for (int i = 0; i < 500; ++i) {
    if (i % 50 == 0) keys = abe::setup(default_context(), rng, gen() % 1000);
    const PolicyAst ast = testing::random_policy(gen, 1 + gen() % 6, 5);
    const std::string at = "value " + std::to_string(i);
    switch (i % 5) {
      case 0:
        v.require(deserialize_public_key(serialize_public_key(keys.pk)) == keys.pk, at);
        v.require(deserialize_master_key(serialize_master_key(keys.mk)) == keys.mk, at);
        break;
      case 1: {
        const auto sk = abe::keygen(keys.mk, testing::subset(testing::distinct_leaves(ast), gen()), rng);
        v.require(deserialize_user_secret_key(serialize_user_secret_key(sk)) == sk, at);
        break;
      }
      case 2: {
        const auto hdr = abe::encrypt_element(keys.pk, to_msp(ast), Gt::random(rng), rng);
        v.require(deserialize_header(serialize_header(hdr)) == hdr, at);
        break;
      }
      case 3: {
        const auto hdr = abe::encap(keys.pk, to_msp(ast), rng).first;
        v.require(deserialize_header(serialize_header(hdr)) == hdr, at);
        break;
      }
      case 4: {
        Bytes body(gen() % 2048);
        for (auto& b : body) b = static_cast<std::uint8_t>(gen());
        const Envelope env = seal(keys.pk, ast.render(), body, rng);
        const Bytes wire = serialize_envelope(env);
        v.require(deserialize_envelope(wire) == env, at);
        v.require(serialize_envelope(deserialize_envelope(wire)) == wire, at);
        break;
      }
    }
  }

  const Bytes good = read_hex_fixture("golden_env.hex");
  const std::size_t policy_len_at = 4 + 1 + 1 + 1 + 8;
  const std::size_t policy_at = policy_len_at + 4;
  const std::size_t policy_size = deserialize_envelope(good).header.msp.policy.size();
  const std::size_t digest_at = policy_at + policy_size;
  const std::size_t n1_at = digest_at + 32;
  const std::size_t c0_at = n1_at + 4;
  const std::size_t rows_at = c0_at + 3 * G2::kBytes;
  const std::vector<std::pair<std::string, std::function<void(Bytes&)>>> cases = {
      {"bad magic", [](Bytes& b) { b[0] = 'X'; }},
      {"bad version", [](Bytes& b) { b[4] = 9; }},
      {"wrong type", [](Bytes& b) { b[5] = 1; }},
      {"unknown type", [](Bytes& b) { b[5] = 99; }},
      {"element mode in envelope", [](Bytes& b) { b[6] = 0; }},
      {"unknown mode", [](Bytes& b) { b[6] = 7; }},
      {"huge policy length", [&](Bytes& b) { b[policy_len_at] = 0x7f; }},
      {"non-canonical policy", [&](Bytes& b) { b[policy_at] = ' '; }},
      {"policy swapped", [&](Bytes& b) { b[policy_at + 2] = 'B'; }},
      {"digest mismatch", [&](Bytes& b) { b[digest_at] ^= 1; }},
      {"row count", [&](Bytes& b) { b[n1_at + 3] = 5; }},
      {"c0 not a point", [&](Bytes& b) { b[c0_at + 50] ^= 0x55; }},
      {"row not a point", [&](Bytes& b) { b[rows_at + 20] ^= 0x55; }},
      {"compression flag cleared", [&](Bytes& b) { b[rows_at] &= 0x7f; }},
      {"byte inserted in header", [&](Bytes& b) { b.insert(b.begin() + static_cast<std::ptrdiff_t>(c0_at), 0); }},
      {"tag truncated", [](Bytes& b) { b.resize(b.size() - 17); }},
      {"empty", [](Bytes& b) { b.clear(); }},
  };
  std::size_t rejected = 0;
  for (const auto& [name, mutate] : cases) {
    Bytes b = good;
    mutate(b);
    const auto code = error_of([&] { deserialize_envelope(b); });
    v.require(code.has_value(), "accepted malformed input: " + name);
    rejected += code.has_value();
  }
  for (std::size_t n = 0; n < good.size() - kTagBytes - 1; n += 7) {
    v.require(error_of([&] { deserialize_envelope(ByteView(good.data(), n)); }).has_value(),
              "accepted truncation at " + std::to_string(n));
  }
  Bytes usk = read_hex_fixture("golden_usk.hex");
  Bytes padded = good;
  padded.insert(padded.end() - 20, 0);
  const auto golden_key = deserialize_user_secret_key(usk);
  v.require(error_of([&] { open(deserialize_envelope(padded), golden_key); }) == ErrorCode::kAuthenticationFailure,
            "byte inserted in body was not caught by authentication");
  usk.pop_back();
  v.require(error_of([&] { deserialize_user_secret_key(usk); }).has_value(), "accepted truncated key");
  if (v.ok) {
    v.detail = "golden bytes equal, 500 roundtrips, " + std::to_string(rejected) +
               " malformed envelopes and all truncations rejected";
  }
  return v;
}

}  // namespace
}  // namespace starcast

int main() {
  using starcast::Verdict;
  const std::vector<std::pair<const char*, Verdict (*)()>> checks = {
      {"scheme correctness", starcast::scheme_correctness},
      {"worked example", starcast::worked_example},
      {"msp equivalence", starcast::msp_equivalence},
      {"constant pairings", starcast::constant_pairings},
      {"linear scaling", starcast::linear_scaling},
      {"header size law", starcast::size_law},
      {"collusion resistance", starcast::collusion},
      {"epoch rotation", starcast::epochs},
      {"link math", starcast::link_math},
      {"groupcast ordering", starcast::groupcast_ordering},
      {"latency harness", starcast::latency},
      {"serialization", starcast::serialization},
  };
  int failures = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    Verdict v;
    try {
      v = checks[i].second();
    } catch (const std::exception& e) {
      v.ok = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failures += !v.ok;
    std::printf("[%s] %2zu %-22s %s\n", v.ok ? "PASS" : "FAIL", i + 1, checks[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(checks.size()) - failures, checks.size());
  return failures == 0 ? 0 : 1;
}
