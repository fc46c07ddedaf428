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

#include "starcast/linksim.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>

#include <json.hpp>

#include "starcast/error.hpp"

namespace starcast::linksim {
namespace {

constexpr double kPi = std::numbers::pi;

double deg_to_rad(double deg) { return deg * kPi / 180.0; }
double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

double dist(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

bool contains(const Circle& c, const Point& p) {
  return dist(c.center, p) <= c.radius * (1 + 1e-12) + 1e-9;
}

Circle diameter_circle(const Point& a, const Point& b) {
  Point mid{(a.x + b.x) / 2, (a.y + b.y) / 2};
  return {mid, dist(a, b) / 2};
}

Circle circumcircle(const Point& a, const Point& b, const Point& c) {
  const double bx = b.x - a.x, by = b.y - a.y, cx = c.x - a.x, cy = c.y - a.y;
  const double d = 2 * (bx * cy - by * cx);
  const double scale = std::max({std::abs(bx), std::abs(by), std::abs(cx), std::abs(cy), 1.0});
  if (std::abs(d) <= 1e-12 * scale * scale) {
    // Collinear: the farthest pair spans the other point.
    Circle best = diameter_circle(a, b);
    for (const Circle& cand : {diameter_circle(a, c), diameter_circle(b, c)}) {
      if (cand.radius > best.radius) best = cand;
    }
    return best;
  }
  const double b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
  const double ux = (cy * b2 - by * c2) / d, uy = (bx * c2 - cx * b2) / d;
  Point center{a.x + ux, a.y + uy};
  return {center, std::hypot(ux, uy)};
}

double fading_gain(std::mt19937_64& rng, double k_factor) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double los = std::sqrt(k_factor / (k_factor + 1));
  const double sigma = std::sqrt(1.0 / (2 * (k_factor + 1)));
  const double re = los + sigma * n(rng), im = sigma * n(rng);
  return re * re + im * im;
}

// Mean rate of user `index` over the channel's fading realizations.
std::pair<double, double> rate_for(const SatelliteParams& p, double theta_deg, std::size_t index,
                                   const ChannelModel& ch) {
  const double pr = received_power(p, theta_deg);
  const double noise = p.noise_density_w_per_hz * p.bandwidth_hz;
  if (ch.kind == ChannelModel::Kind::kLineOfSight) {
    return {pr / noise, user_rate(pr, p.bandwidth_hz, p.noise_density_w_per_hz)};
  }
  std::mt19937_64 rng(ch.seed * 0x9e3779b97f4a7c15ULL + index);
  double snr = 0, rate = 0;
  const std::size_t n = std::max<std::size_t>(1, ch.realizations);
  for (std::size_t k = 0; k < n; ++k) {
    const double g = fading_gain(rng, ch.k_factor);
    snr += pr * g / noise;
    rate += user_rate(pr * g, p.bandwidth_hz, p.noise_density_w_per_hz);
  }
  return {snr / static_cast<double>(n), rate / static_cast<double>(n)};
}

}  // namespace

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

SatelliteParams SatelliteParams::reference() { return SatelliteParams{}; }

void SatelliteParams::validate() const {
  const std::pair<const char*, double> fields[] = {
      {"height_m", height_m},         {"frequency_hz", frequency_hz},
      {"bandwidth_hz", bandwidth_hz}, {"tx_power_w", tx_power_w},
      {"rx_gain", rx_gain},           {"efficiency", efficiency},
      {"attenuation", attenuation},   {"noise_density_w_per_hz", noise_density_w_per_hz},
      {"antenna_diameter_m", antenna_diameter_m}, {"max_beam_radius_m", max_beam_radius_m}};
  for (const auto& [name, v] : fields) {
    if (!(v > 0) || !std::isfinite(v)) fail(ErrorCode::kInvalidArgument, std::string(name) + " must be positive");
  }
}

double SatelliteParams::min_beamwidth_deg() const { return 70.0 * wavelength_m() / antenna_diameter_m; }

double beam_radius(double height_m, double theta_deg) {
  if (!(theta_deg > 0 && theta_deg < 180)) fail(ErrorCode::kInvalidArgument, "beam angle must be in (0, 180) degrees");
  return height_m * std::tan(deg_to_rad(theta_deg) / 2);
}

double beamwidth_for_radius(double height_m, double radius_m) {
  return rad_to_deg(2 * std::atan(radius_m / height_m));
}

double tx_gain(double theta_deg, double efficiency) {
  if (!(theta_deg > 0)) fail(ErrorCode::kInvalidArgument, "beam angle must be positive");
  const double ratio = 70.0 * kPi / theta_deg;
  return efficiency * ratio * ratio;
}

double received_power(const SatelliteParams& p, double theta_deg) {
  const double spread = p.wavelength_m() / (4 * kPi * p.height_m);
  return 0.5 * p.attenuation * tx_gain(theta_deg, p.efficiency) * p.rx_gain * p.tx_power_w * spread * spread;
}

double user_rate(double received_power_w, double bandwidth_hz, double noise_density_w_per_hz) {
  return bandwidth_hz * std::log2(1 + received_power_w / (noise_density_w_per_hz * bandwidth_hz));
}

Circle min_enclosing_circle(std::span<const Point> points) {
  if (points.empty()) return {};
  std::vector<Point> pts(points.begin(), points.end());
  std::mt19937_64 shuffle_rng(0x5eedULL);
  std::shuffle(pts.begin(), pts.end(), shuffle_rng);

  Circle c{pts[0], 0};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (contains(c, pts[i])) continue;
    c = {pts[i], 0};
    for (std::size_t j = 0; j < i; ++j) {
      if (contains(c, pts[j])) continue;
      c = diameter_circle(pts[i], pts[j]);
      for (std::size_t k = 0; k < j; ++k) {
        if (!contains(c, pts[k])) c = circumcircle(pts[i], pts[j], pts[k]);
      }
    }
  }
  return c;
}

std::vector<Point> Scenario::members(std::size_t m) const {
  std::vector<Point> out;
  for (std::size_t i = 0; i < users.size(); ++i) {
    if (group[i] == m) out.push_back(users[i]);
  }
  return out;
}

std::size_t Scenario::group_size(std::size_t m) const {
  return static_cast<std::size_t>(std::count(group.begin(), group.end(), m));
}

Scenario place_users(std::uint64_t seed, std::size_t users, std::size_t groups, double cluster_spread_m,
                     double area_radius_m) {
  if (groups == 0) fail(ErrorCode::kInvalidArgument, "group count must be positive");
  if (users < groups) fail(ErrorCode::kInvalidArgument, "need at least one user per group");
  if (!(area_radius_m > 0) || cluster_spread_m < 0) {
    fail(ErrorCode::kInvalidArgument, "area radius must be positive and spread non-negative");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto in_disc = [&] {
    const double r = area_radius_m * std::sqrt(unit(rng));
    const double phi = 2 * kPi * unit(rng);
    return Point{r * std::cos(phi), r * std::sin(phi)};
  };

  Scenario s;
  s.seed = seed;
  s.group_count = groups;
  std::vector<Point> centers(groups);
  for (auto& c : centers) c = in_disc();

  std::normal_distribution<double> offset(0.0, cluster_spread_m);
  for (std::size_t m = 0; m < groups; ++m) {
    const std::size_t count = users / groups + (m < users % groups ? 1 : 0);
    for (std::size_t k = 0; k < count; ++k) {
      Point p;
      do {
        p = cluster_spread_m > 0 ? Point{centers[m].x + offset(rng), centers[m].y + offset(rng)} : centers[m];
      } while (std::hypot(p.x, p.y) > area_radius_m);
      s.users.push_back(p);
      s.group.push_back(m + 1);
    }
  }
  return s;
}

std::string_view framework_name(Framework f) {
  switch (f) {
    case Framework::kUnicast: return "unicast";
    case Framework::kBroadcast: return "broadcast";
    case Framework::kGroupcast: return "groupcast";
  }
  return "unknown";
}

const FrameworkRate& RateReport::get(Framework f) const {
  switch (f) {
    case Framework::kUnicast: return unicast;
    case Framework::kBroadcast: return broadcast;
    case Framework::kGroupcast: return groupcast;
  }
  return groupcast;
}

RateReport simulate(const Scenario& scenario, const SatelliteParams& params, std::size_t legitimate_group,
                    const ChannelModel& channel) {
  params.validate();
  if (legitimate_group < 1 || legitimate_group > scenario.group_count) {
    fail(ErrorCode::kInvalidArgument, "group " + std::to_string(legitimate_group) + " out of range 1.." +
                                          std::to_string(scenario.group_count));
  }
  std::vector<std::size_t> legit;
  for (std::size_t i = 0; i < scenario.users.size(); ++i) {
    if (scenario.group[i] == legitimate_group) legit.push_back(i);
  }
  if (legit.empty()) fail(ErrorCode::kInvalidArgument, "legitimate group has no users");

  const double theta_min = params.min_beamwidth_deg();
  const std::vector<Point> members = scenario.members(legitimate_group);

  RateReport rep;
  rep.group = legitimate_group;
  rep.group_users = legit.size();
  rep.total_users = scenario.users.size();
  rep.group_beam = min_enclosing_circle(members);
  rep.broadcast_beam = min_enclosing_circle(scenario.users);

  auto fill = [&](FrameworkRate& fr, Framework kind, double theta, double share) {
    fr.framework = kind;
    fr.beamwidth_deg = theta;
    for (std::size_t i : legit) {
      auto [snr, rate] = rate_for(params, theta, i, channel);
      fr.user_snr.push_back(snr);
      fr.user_rate_bps.push_back(rate * share);
      fr.sum_rate_bps += rate * share;
    }
  };

  const double n_legit = static_cast<double>(legit.size());
  fill(rep.unicast, Framework::kUnicast, theta_min, 1.0 / n_legit);
  rep.unicast.ciphertexts = legit.size();
  rep.unicast.keys = legit.size();

  fill(rep.broadcast, Framework::kBroadcast,
       std::max(theta_min, beamwidth_for_radius(params.height_m, rep.broadcast_beam.radius)), 1.0);
  rep.broadcast.ciphertexts = 1;
  rep.broadcast.keys = scenario.users.size();

  fill(rep.groupcast, Framework::kGroupcast,
       std::max(theta_min, beamwidth_for_radius(params.height_m, rep.group_beam.radius)), 1.0);
  rep.groupcast.ciphertexts = 1;
  rep.groupcast.keys = 1;
  return rep;
}

// ---- config and CSV ----

ScenarioConfig parse_scenario_config(std::string_view json_text) {
  using nlohmann::json;
  ScenarioConfig cfg;
  try {
    json doc = json::parse(json_text);
    auto& p = cfg.params;
    auto num = [&](const char* key, double& field) {
      if (doc.contains(key)) field = doc.at(key).get<double>();
    };
    num("height_m", p.height_m);
    num("frequency_hz", p.frequency_hz);
    num("bandwidth_hz", p.bandwidth_hz);
    num("tx_power_w", p.tx_power_w);
    num("rx_gain", p.rx_gain);
    num("efficiency", p.efficiency);
    num("attenuation", p.attenuation);
    num("noise_density_w_per_hz", p.noise_density_w_per_hz);
    num("antenna_diameter_m", p.antenna_diameter_m);
    num("max_beam_radius_m", p.max_beam_radius_m);
    num("spread_m", cfg.spread_m);
    if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("users")) cfg.users = doc.at("users").get<std::size_t>();
    if (doc.contains("groups")) cfg.groups = doc.at("groups").get<std::size_t>();
    if (doc.contains("channel")) {
      const json& ch = doc.at("channel");
      const std::string model = ch.value("model", "los");
      if (model == "los") {
        cfg.channel.kind = ChannelModel::Kind::kLineOfSight;
      } else if (model == "rician") {
        cfg.channel.kind = ChannelModel::Kind::kRician;
      } else {
        fail(ErrorCode::kInvalidArgument, "channel.model must be 'los' or 'rician'");
      }
      cfg.channel.k_factor = ch.value("k_factor", cfg.channel.k_factor);
      cfg.channel.realizations = ch.value("realizations", cfg.channel.realizations);
      cfg.channel.seed = ch.value("seed", cfg.channel.seed);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("scenario config: ") + e.what());
  }
  cfg.params.validate();
  return cfg;
}

std::string scenario_config_json(const ScenarioConfig& cfg) {
  using nlohmann::json;
  const auto& p = cfg.params;
  json doc = {{"height_m", p.height_m},
              {"frequency_hz", p.frequency_hz},
              {"bandwidth_hz", p.bandwidth_hz},
              {"tx_power_w", p.tx_power_w},
              {"rx_gain", p.rx_gain},
              {"efficiency", p.efficiency},
              {"attenuation", p.attenuation},
              {"noise_density_w_per_hz", p.noise_density_w_per_hz},
              {"antenna_diameter_m", p.antenna_diameter_m},
              {"max_beam_radius_m", p.max_beam_radius_m},
              {"seed", cfg.seed},
              {"users", cfg.users},
              {"groups", cfg.groups},
              {"spread_m", cfg.spread_m},
              {"channel",
               {{"model", cfg.channel.kind == ChannelModel::Kind::kRician ? "rician" : "los"},
                {"k_factor", cfg.channel.k_factor},
                {"realizations", cfg.channel.realizations},
                {"seed", cfg.channel.seed}}}};
  return doc.dump(2) + "\n";
}

void write_rate_csv(std::ostream& out, const RateReport& report) {
  out << "framework,group,users,beamwidth_deg,sum_rate_bps,ciphertexts,keys\n";
  out << std::setprecision(17);
  for (Framework f : {Framework::kUnicast, Framework::kBroadcast, Framework::kGroupcast}) {
    const FrameworkRate& fr = report.get(f);
    out << framework_name(f) << ',' << report.group << ',' << report.group_users << ',' << fr.beamwidth_deg << ','
        << fr.sum_rate_bps << ',' << fr.ciphertexts << ',' << fr.keys << '\n';
  }
}

void write_user_csv(std::ostream& out, const Scenario& scenario, const RateReport& report) {
  out << "user,x_m,y_m,group,legitimate,framework,snr_db,rate_bps\n";
  out << std::setprecision(17);
  for (Framework f : {Framework::kUnicast, Framework::kBroadcast, Framework::kGroupcast}) {
    const FrameworkRate& fr = report.get(f);
    std::size_t k = 0;
    for (std::size_t i = 0; i < scenario.users.size(); ++i) {
      if (scenario.group[i] != report.group) continue;
      out << i << ',' << scenario.users[i].x << ',' << scenario.users[i].y << ',' << scenario.group[i] << ",1,"
          << framework_name(f) << ',' << linear_to_db(fr.user_snr[k]) << ',' << fr.user_rate_bps[k] << '\n';
      ++k;
    }
  }
}

void write_scenario_csv(std::ostream& out, const Scenario& scenario) {
  out << "user,x_m,y_m,group\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < scenario.users.size(); ++i) {
    out << i << ',' << scenario.users[i].x << ',' << scenario.users[i].y << ',' << scenario.group[i] << '\n';
  }
}

}  // namespace starcast::linksim
