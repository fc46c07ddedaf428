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

// Link-budget and sum-rate model for one LEO satellite beam serving a
// legitimate user group by unicast, broadcast or groupcast.

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace starcast::linksim {

inline constexpr double kSpeedOfLight = 299'792'458.0;

double db_to_linear(double db);
double linear_to_db(double linear);

/// SI units throughout; gains are linear.
struct SatelliteParams {
  double height_m = 550e3;
  double frequency_hz = 12e9;
  double bandwidth_hz = 1e9;
  double tx_power_w = 19.952623149688797;             // 13 dBW
  double rx_gain = 1000.0;                            // 30 dBi
  double efficiency = 0.7;
  double attenuation = 1.0;
  double noise_density_w_per_hz = 3.981071705534973e-21;  // -174 dBm/Hz
  double antenna_diameter_m = 0.5;
  double max_beam_radius_m = 100e3;

  /// LEO reference parameters (550 km, Ku band, 1 GHz).
  static SatelliteParams reference();
  void validate() const;
  double wavelength_m() const { return kSpeedOfLight / frequency_hz; }
  /// Aperture-limited beamwidth 70 * lambda / D, degrees.
  double min_beamwidth_deg() const;
};

/// r = h * tan(theta / 2); theta in degrees, 0 < theta < 180.
double beam_radius(double height_m, double theta_deg);
/// Inverse of beam_radius, degrees.
double beamwidth_for_radius(double height_m, double radius_m);
/// G = eta * (70 pi / theta)^2, theta in degrees.
double tx_gain(double theta_deg, double efficiency);
/// Friis: P_r = 1/2 * alpha * G_t * G_r * P_t * (lambda / (4 pi h))^2.
double received_power(const SatelliteParams& p, double theta_deg);
/// Shannon rate B * log2(1 + P_r / (N0 B)).
double user_rate(double received_power_w, double bandwidth_hz, double noise_density_w_per_hz);

struct Point {
  double x = 0;
  double y = 0;
  bool operator==(const Point&) const = default;
};

struct Circle {
  Point center;
  double radius = 0;
};

/// Smallest enclosing circle (Welzl, randomized incremental). Empty input
/// yields a zero circle at the origin.
Circle min_enclosing_circle(std::span<const Point> points);

struct Scenario {
  std::uint64_t seed = 0;
  std::size_t group_count = 0;
  std::vector<Point> users;
  std::vector<std::size_t> group;  // 1-based group per user

  std::vector<Point> members(std::size_t m) const;
  std::size_t group_size(std::size_t m) const;
};

/// Cluster centers uniform in the disc; users split evenly across groups
/// (remainder to low-index groups) with isotropic Gaussian offsets.
/// Users outside the disc are redrawn. Deterministic per seed.
Scenario place_users(std::uint64_t seed, std::size_t users, std::size_t groups, double cluster_spread_m,
                     double area_radius_m);

/// Line-of-sight by default. Rician mode averages rates over seeded
/// small-scale fading draws with the given K-factor (linear).
struct ChannelModel {
  enum class Kind { kLineOfSight, kRician };
  Kind kind = Kind::kLineOfSight;
  double k_factor = 10.0;
  std::size_t realizations = 200;
  std::uint64_t seed = 7;
};

enum class Framework { kUnicast, kBroadcast, kGroupcast };
std::string_view framework_name(Framework f);

struct FrameworkRate {
  Framework framework;
  double beamwidth_deg = 0;
  double sum_rate_bps = 0;
  std::vector<double> user_snr;  // linear, per legitimate user
  std::vector<double> user_rate_bps;
  std::size_t ciphertexts = 0;
  std::size_t keys = 0;
};

struct RateReport {
  std::size_t group = 0;
  std::size_t group_users = 0;
  std::size_t total_users = 0;
  Circle group_beam;
  Circle broadcast_beam;
  FrameworkRate unicast, broadcast, groupcast;

  const FrameworkRate& get(Framework f) const;
};

RateReport simulate(const Scenario& scenario, const SatelliteParams& params, std::size_t legitimate_group,
                    const ChannelModel& channel = {});

/// Scenario file: SatelliteParams fields (SI) plus seed, users, groups,
/// spread_m and an optional "channel" object.
struct ScenarioConfig {
  SatelliteParams params;
  std::uint64_t seed = 42;
  std::size_t users = 100;
  std::size_t groups = 4;
  double spread_m = 10e3;
  ChannelModel channel;
};

ScenarioConfig parse_scenario_config(std::string_view json_text);
std::string scenario_config_json(const ScenarioConfig& cfg);

/// framework,group,users,beamwidth_deg,sum_rate_bps,ciphertexts,keys
void write_rate_csv(std::ostream& out, const RateReport& report);
/// user,x_m,y_m,group,legitimate,framework,snr_db,rate_bps
void write_user_csv(std::ostream& out, const Scenario& scenario, const RateReport& report);
/// user,x_m,y_m,group
void write_scenario_csv(std::ostream& out, const Scenario& scenario);

}  // namespace starcast::linksim
