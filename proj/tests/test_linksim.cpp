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

#include <cmath>
#include <random>
#include <sstream>

#include "starcast/error.hpp"
#include "starcast/linksim.hpp"

namespace starcast::linksim {
namespace {

constexpr double kPi = 3.14159265358979323846;

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

// Straight transcription of the link chain, for cross-checking.
double oracle_rate(const SatelliteParams& p, double theta_deg) {
  const double lambda = 299792458.0 / p.frequency_hz;
  const double g = p.efficiency * std::pow(70.0 * kPi / theta_deg, 2);
  const double pr = 0.5 * p.attenuation * g * p.rx_gain * p.tx_power_w * std::pow(lambda / (4 * kPi * p.height_m), 2);
  return p.bandwidth_hz * std::log2(1 + pr / (p.noise_density_w_per_hz * p.bandwidth_hz));
}

TEST(LinkMath, BeamRadius) {
  EXPECT_NEAR(beam_radius(1.0, 90.0), 1.0, 1e-15);
  EXPECT_LT(beam_radius(550e3, 1e-9), 1e-2);
  const double theta = 2 * std::atan(100.0 / 550.0) * 180.0 / kPi;
  EXPECT_NEAR(theta, 20.61, 0.01);
  EXPECT_LT(rel_err(beam_radius(550e3, theta), 100e3), 1e-12);
  EXPECT_LT(rel_err(beamwidth_for_radius(550e3, 100e3), theta), 1e-12);
  EXPECT_THROW(beam_radius(550e3, 0), Error);
  EXPECT_THROW(beam_radius(550e3, 180), Error);
}

TEST(LinkMath, TxGain) {
  EXPECT_LT(rel_err(tx_gain(1.0, 0.7), 0.7 * 70 * 70 * kPi * kPi), 1e-12);
  EXPECT_NEAR(tx_gain(1.0, 0.7), 3.385e4, 5.0);
  EXPECT_NEAR(linear_to_db(tx_gain(1.0, 0.7)), 45.3, 0.05);
  EXPECT_LT(rel_err(tx_gain(4.0, 0.7) * 4, tx_gain(2.0, 0.7)), 1e-12);
  EXPECT_EQ(tx_gain(3.0, 0.0), 0.0);
  EXPECT_THROW(tx_gain(0.0, 0.7), Error);
}

TEST(LinkMath, ReceivedPowerTableChain) {
  const SatelliteParams p = SatelliteParams::reference();
  const double pr = received_power(p, 1.0);
  EXPECT_NEAR(pr, 4.42e-9, 0.01e-9);

  // dB-domain budget built from rounded textbook terms.
  const double lambda = 299792458.0 / 12e9;
  const double spreading_db = 20 * std::log10(lambda / (4 * kPi * 550e3));
  const double budget_dbw = 45.3 + 30.0 + 13.0 - 3.0 + spreading_db;
  EXPECT_NEAR(linear_to_db(pr), budget_dbw, 0.1);
  EXPECT_NEAR(linear_to_db(pr) + 30, -53.5, 0.1);

  SatelliteParams zero = p;
  zero.tx_power_w = 0;
  EXPECT_EQ(received_power(zero, 1.0), 0.0);
  SatelliteParams doubled = p;
  doubled.frequency_hz *= 2;
  EXPECT_LT(rel_err(received_power(doubled, 1.0) * 4, pr), 1e-12);
}

TEST(LinkMath, UserRateTableChain) {
  const SatelliteParams p = SatelliteParams::reference();
  EXPECT_NEAR(linear_to_db(p.noise_density_w_per_hz * p.bandwidth_hz) + 30, -84.0, 1e-9);
  const double pr = received_power(p, 1.0);
  const double snr_db = linear_to_db(pr / (p.noise_density_w_per_hz * p.bandwidth_hz));
  EXPECT_NEAR(snr_db, 30.5, 0.1);
  const double rate = user_rate(pr, p.bandwidth_hz, p.noise_density_w_per_hz);
  EXPECT_NEAR(rate, 1.01e10, 0.01e10);
  EXPECT_LT(rel_err(rate, oracle_rate(p, 1.0)), 1e-12);
  EXPECT_EQ(user_rate(0.0, 1e9, 1e-20), 0.0);
  EXPECT_LT(user_rate(1e-9, 1e9, 4e-21), user_rate(2e-9, 1e9, 4e-21));
}

TEST(LinkMath, DbConversions) {
  EXPECT_NEAR(db_to_linear(13.0), 19.952623149688797, 1e-12);
  EXPECT_NEAR(db_to_linear(-204.0), 3.981071705534973e-21, 1e-33);
  EXPECT_NEAR(linear_to_db(1000.0), 30.0, 1e-12);
}

TEST(LinkMath, MinimumBeamwidth) {
  const SatelliteParams p = SatelliteParams::reference();
  EXPECT_NEAR(p.min_beamwidth_deg(), 70 * (299792458.0 / 12e9) / 0.5, 1e-12);
  EXPECT_NEAR(p.min_beamwidth_deg(), 3.5, 0.01);
}

TEST(LinkMath, ParamValidation) {
  SatelliteParams p;
  p.height_m = -1;
  EXPECT_THROW(p.validate(), Error);
  EXPECT_NO_THROW(SatelliteParams::reference().validate());
}

// Smallest circle among those through 1, 2 or 3 of the points.
Circle brute_mec(const std::vector<Point>& pts) {
  auto covers = [&](const Circle& c) {
    for (const auto& p : pts) {
      if (std::hypot(p.x - c.center.x, p.y - c.center.y) > c.radius * (1 + 1e-10) + 1e-9) return false;
    }
    return true;
  };
  Circle best{{0, 0}, std::numeric_limits<double>::infinity()};
  auto consider = [&](const Circle& c) {
    if (c.radius < best.radius && covers(c)) best = c;
  };
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    consider({pts[i], 0});
    for (std::size_t j = i + 1; j < n; ++j) {
      const Point m{(pts[i].x + pts[j].x) / 2, (pts[i].y + pts[j].y) / 2};
      consider({m, std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y) / 2});
      for (std::size_t k = j + 1; k < n; ++k) {
        const double ax = pts[i].x, ay = pts[i].y, bx = pts[j].x, by = pts[j].y, cx = pts[k].x, cy = pts[k].y;
        const double d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
        if (std::abs(d) < 1e-12) continue;
        const double a2 = ax * ax + ay * ay, b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
        const Point o{(a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d,
                      (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d};
        consider({o, std::hypot(ax - o.x, ay - o.y)});
      }
    }
  }
  return best;
}

TEST(Mec, SmallCases) {
  const std::vector<Point> one = {{3, 4}};
  const Circle c1 = min_enclosing_circle(one);
  EXPECT_EQ(c1.radius, 0.0);
  EXPECT_EQ(c1.center, (Point{3, 4}));

  const std::vector<Point> two = {{0, 0}, {4, 0}};
  const Circle c2 = min_enclosing_circle(two);
  EXPECT_NEAR(c2.center.x, 2, 1e-12);
  EXPECT_NEAR(c2.radius, 2, 1e-12);

  const std::vector<Point> three = {{0, 0}, {2, 0}, {1, 1}};
  const Circle c3 = min_enclosing_circle(three);
  EXPECT_NEAR(c3.center.x, 1, 1e-12);
  EXPECT_NEAR(c3.center.y, 0, 1e-12);
  EXPECT_NEAR(c3.radius, 1, 1e-12);

  const std::vector<Point> line = {{0, 0}, {1, 0}, {5, 0}, {2, 0}};
  EXPECT_NEAR(min_enclosing_circle(line).radius, 2.5, 1e-12);
  EXPECT_EQ(min_enclosing_circle(std::vector<Point>{}).radius, 0.0);
}

TEST(Mec, MatchesBruteForce) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0, 30e3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Point> pts(1 + rng() % 14);
    for (auto& p : pts) p = {n(rng), n(rng)};
    const Circle got = min_enclosing_circle(pts);
    const Circle want = brute_mec(pts);
    EXPECT_LT(std::abs(got.radius - want.radius), 1e-9 * std::max(1.0, want.radius)) << trial;
    for (const auto& p : pts) {
      EXPECT_LE(std::hypot(p.x - got.center.x, p.y - got.center.y), got.radius * (1 + 1e-9) + 1e-9);
    }
  }
}

TEST(Placement, DeterministicAndBounded) {
  const Scenario a = place_users(42, 100, 4, 10e3, 100e3);
  const Scenario b = place_users(42, 100, 4, 10e3, 100e3);
  EXPECT_EQ(a.users, b.users);
  EXPECT_EQ(a.group, b.group);
  EXPECT_NE(place_users(43, 100, 4, 10e3, 100e3).users, a.users);
  for (const auto& p : a.users) EXPECT_LE(std::hypot(p.x, p.y), 100e3);
  std::size_t total = 0;
  for (std::size_t m = 1; m <= 4; ++m) total += a.group_size(m);
  EXPECT_EQ(total, 100u);

  const Scenario wide = place_users(1, 50, 3, 200e3, 100e3);
  for (const auto& p : wide.users) EXPECT_LE(std::hypot(p.x, p.y), 100e3);
}

TEST(Placement, EvenSplitRemainderToLowGroups) {
  const Scenario s = place_users(1, 10, 4, 1e3, 100e3);
  EXPECT_EQ(s.group_size(1), 3u);
  EXPECT_EQ(s.group_size(2), 3u);
  EXPECT_EQ(s.group_size(3), 2u);
  EXPECT_EQ(s.group_size(4), 2u);
  const Scenario single = place_users(1, 16, 16, 1e3, 100e3);
  for (std::size_t m = 1; m <= 16; ++m) EXPECT_EQ(single.group_size(m), 1u);
  EXPECT_THROW(place_users(1, 3, 4, 1e3, 100e3), Error);
  EXPECT_THROW(place_users(1, 3, 0, 1e3, 100e3), Error);
}

TEST(Simulate, CoLocatedSingleGroup) {
  const SatelliteParams p = SatelliteParams::reference();
  const Scenario s = place_users(5, 12, 1, 0.0, 100e3);
  const RateReport r = simulate(s, p, 1);
  EXPECT_NEAR(r.groupcast.beamwidth_deg, p.min_beamwidth_deg(), 1e-12);
  EXPECT_NEAR(r.unicast.beamwidth_deg, p.min_beamwidth_deg(), 1e-12);
  EXPECT_LT(rel_err(r.groupcast.sum_rate_bps, 12 * r.unicast.sum_rate_bps), 1e-12);
}

TEST(Simulate, ReferenceScenarioOrdering) {
  const Scenario s = place_users(42, 100, 4, 10e3, 100e3);
  for (std::size_t m = 1; m <= 4; ++m) {
    const RateReport r = simulate(s, SatelliteParams::reference(), m);
    EXPECT_GT(r.groupcast.sum_rate_bps, r.broadcast.sum_rate_bps) << m;
    EXPECT_GT(r.groupcast.sum_rate_bps, r.unicast.sum_rate_bps) << m;
  }
}

TEST(Simulate, CountsAndInvariants) {
  const SatelliteParams p = SatelliteParams::reference();
  const Scenario s = place_users(9, 60, 5, 15e3, 100e3);
  const double bcast_bw = simulate(s, p, 1).broadcast.beamwidth_deg;
  for (std::size_t m = 1; m <= 5; ++m) {
    const RateReport r = simulate(s, p, m);
    const std::size_t g = s.group_size(m);
    EXPECT_EQ(r.groupcast.ciphertexts, 1u);
    EXPECT_EQ(r.groupcast.keys, 1u);
    EXPECT_EQ(r.broadcast.ciphertexts, 1u);
    EXPECT_EQ(r.broadcast.keys, 60u);
    EXPECT_EQ(r.unicast.ciphertexts, g);
    EXPECT_EQ(r.unicast.keys, g);
    EXPECT_GE(r.broadcast.beamwidth_deg, r.groupcast.beamwidth_deg);
    EXPECT_GE(r.groupcast.beamwidth_deg, p.min_beamwidth_deg());
    EXPECT_EQ(r.broadcast.beamwidth_deg, bcast_bw);

    // Independent recomputation of each sum rate.
    const Circle gc = min_enclosing_circle(s.members(m));
    const double theta_g = std::max(p.min_beamwidth_deg(), 2 * std::atan(gc.radius / p.height_m) * 180 / kPi);
    EXPECT_LT(rel_err(r.groupcast.sum_rate_bps, g * oracle_rate(p, theta_g)), 1e-12);
    EXPECT_LT(rel_err(r.unicast.sum_rate_bps, oracle_rate(p, p.min_beamwidth_deg())), 1e-12);
    EXPECT_LT(rel_err(r.broadcast.sum_rate_bps, g * oracle_rate(p, bcast_bw)), 1e-12);
    EXPECT_NEAR(r.group_beam.radius, gc.radius, 1e-9 * std::max(1.0, gc.radius));
    for (double v : r.groupcast.user_rate_bps) EXPECT_GE(v, 0.0);
  }
  EXPECT_THROW(simulate(s, p, 0), Error);
  EXPECT_THROW(simulate(s, p, 6), Error);
}

TEST(Simulate, BroadcastIndependentOfLegitimateGroup) {
  const Scenario s = place_users(21, 40, 4, 5e3, 100e3);
  const auto r1 = simulate(s, SatelliteParams::reference(), 1);
  const auto r3 = simulate(s, SatelliteParams::reference(), 3);
  EXPECT_EQ(r1.broadcast.beamwidth_deg, r3.broadcast.beamwidth_deg);
  EXPECT_EQ(r1.broadcast.user_rate_bps.front(), r3.broadcast.user_rate_bps.front());
}

TEST(Simulate, GroupcastNonIncreasingInRadius) {
  const SatelliteParams p = SatelliteParams::reference();
  double last = std::numeric_limits<double>::infinity();
  for (double spread : {0.0, 2e3, 8e3, 20e3, 40e3}) {
    Scenario s = place_users(3, 20, 1, 1.0, 100e3);
    // Scale one fixed layout so the enclosing radius grows monotonically.
    const Point c = s.users.front();
    for (auto& u : s.users) u = {c.x + (u.x - c.x) * spread, c.y + (u.y - c.y) * spread};
    const double per_user = simulate(s, p, 1).groupcast.sum_rate_bps / 20;
    EXPECT_LE(per_user, last * (1 + 1e-12));
    last = per_user;
  }
}

TEST(Simulate, RicianModeIsSeededAndNearLineOfSight) {
  const Scenario s = place_users(42, 40, 4, 10e3, 100e3);
  ChannelModel ch;
  ch.kind = ChannelModel::Kind::kRician;
  ch.k_factor = 10;
  ch.realizations = 400;
  const auto a = simulate(s, SatelliteParams::reference(), 2, ch);
  const auto b = simulate(s, SatelliteParams::reference(), 2, ch);
  EXPECT_EQ(a.groupcast.user_rate_bps, b.groupcast.user_rate_bps);
  const auto los = simulate(s, SatelliteParams::reference(), 2);
  EXPECT_NE(a.groupcast.sum_rate_bps, los.groupcast.sum_rate_bps);
  EXPECT_LT(rel_err(a.groupcast.sum_rate_bps, los.groupcast.sum_rate_bps), 0.05);
  EXPECT_GT(a.groupcast.sum_rate_bps, a.broadcast.sum_rate_bps);
}

TEST(Config, ParseAndRoundTrip) {
  const ScenarioConfig cfg = parse_scenario_config(
      R"({"height_m": 600000, "seed": 7, "users": 80, "groups": 8, "spread_m": 5000,
          "channel": {"model": "rician", "k_factor": 5}})");
  EXPECT_EQ(cfg.params.height_m, 600e3);
  EXPECT_EQ(cfg.params.frequency_hz, 12e9);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.users, 80u);
  EXPECT_EQ(cfg.groups, 8u);
  EXPECT_EQ(cfg.channel.kind, ChannelModel::Kind::kRician);
  EXPECT_EQ(cfg.channel.k_factor, 5);

  const ScenarioConfig back = parse_scenario_config(scenario_config_json(cfg));
  EXPECT_EQ(back.params.height_m, cfg.params.height_m);
  EXPECT_EQ(back.channel.k_factor, cfg.channel.k_factor);
  EXPECT_EQ(parse_scenario_config("{}").seed, 42u);

  EXPECT_THROW(parse_scenario_config("{"), Error);
  EXPECT_THROW(parse_scenario_config(R"({"height_m": -5})"), Error);
  EXPECT_THROW(parse_scenario_config(R"({"channel": {"model": "awgn"}})"), Error);
  EXPECT_THROW(parse_scenario_config(R"({"users": "many"})"), Error);
}

TEST(Csv, RateAndUserTables) {
  const Scenario s = place_users(42, 20, 2, 10e3, 100e3);
  const RateReport r = simulate(s, SatelliteParams::reference(), 2);
  std::ostringstream rates, users, layout;
  write_rate_csv(rates, r);
  write_user_csv(users, s, r);
  write_scenario_csv(layout, s);

  std::istringstream in(rates.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "framework,group,users,beamwidth_deg,sum_rate_bps,ciphertexts,keys");
  std::vector<std::string> frameworks;
  while (std::getline(in, line)) frameworks.push_back(line.substr(0, line.find(',')));
  EXPECT_EQ(frameworks, (std::vector<std::string>{"unicast", "broadcast", "groupcast"}));

  const std::string u = users.str(), l = layout.str();
  EXPECT_EQ(std::count(u.begin(), u.end(), '\n'), 1 + 3 * 10);
  EXPECT_EQ(std::count(l.begin(), l.end(), '\n'), 21);
}

}  // namespace
}  // namespace starcast::linksim
