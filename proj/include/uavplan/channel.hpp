#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "uavplan/error.hpp"

namespace uavplan {

inline constexpr double kSpeedOfLight = 299792458.0;
/// Antenna efficiency constant of the directional gain approximation.
inline constexpr double kGainConstant = 30000.0;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double linear) { return 10.0 * std::log10(linear); }
inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }
inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

/// Air-to-ground propagation environment.
///
/// The line-of-sight probability is the sigmoid
/// `1 / (1 + a exp(-b (theta - a)))` in the elevation angle `theta` (degrees).
/// Excess losses are added on top of free-space loss for LoS and NLoS links.
struct Environment {
  std::string name = "urban";
  double sigmoid_a = 9.61;
  double sigmoid_b = 0.16;
  double excess_los_db = 3.0;
  double excess_nlos_db = 34.0;

  void validate() const {
    if (!(sigmoid_a > 0.0) || !(sigmoid_b > 0.0))
      throw InvalidArgument("environment: sigmoid parameters must be positive");
    if (!(excess_los_db >= 0.0) || !(excess_nlos_db >= excess_los_db))
      throw InvalidArgument("environment: require excess_nlos >= excess_los >= 0");
  }

  friend bool operator==(const Environment&, const Environment&) = default;

  static Environment suburban() { return {"suburban", 4.88, 0.43, 3.0, 34.0}; }
  static Environment urban() { return {"urban", 9.61, 0.16, 3.0, 34.0}; }
  static Environment dense_urban() { return {"dense-urban", 12.08, 0.11, 3.0, 34.0}; }
  static Environment high_rise() { return {"high-rise", 27.23, 0.08, 3.0, 34.0}; }

  static std::vector<Environment> presets() {
    return {suburban(), urban(), dense_urban(), high_rise()};
  }

  static Environment by_name(std::string_view name) {
    for (auto& env : presets())
      if (env.name == name) return env;
    throw InvalidArgument("unknown environment '" + std::string(name) + "'");
  }
};

struct RadioConfig {
  double carrier_frequency_hz = 2e9;
  double noise_psd_dbm_hz = -170.0;
  double bandwidth_hz = 20e6;
  double snr_threshold_db = 0.0;

  double noise_power_dbm() const { return noise_psd_dbm_hz + linear_to_db(bandwidth_hz); }

  void validate() const {
    if (!(carrier_frequency_hz > 0.0)) throw InvalidArgument("radio: carrier frequency must be positive");
    if (!(bandwidth_hz > 0.0)) throw InvalidArgument("radio: bandwidth must be positive");
    if (!std::isfinite(noise_psd_dbm_hz)) throw InvalidArgument("radio: noise psd must be finite");
    if (!std::isfinite(snr_threshold_db)) throw InvalidArgument("radio: snr threshold must be finite");
  }

  friend bool operator==(const RadioConfig&, const RadioConfig&) = default;
};

/// Half-power half-beamwidths in degrees: `theta1` azimuth, `theta2` elevation.
struct Beam {
  double theta1 = 45.0;
  double theta2 = 45.0;

  bool valid() const { return theta2 > 0.0 && theta2 <= theta1 && theta1 < 90.0; }

  friend bool operator==(const Beam&, const Beam&) = default;
};

/// Main-lobe gain of the directional antenna in dB. Outside the main lobe
/// the gain is zero (linear), which callers treat as "not served".
inline double antenna_gain_db(const Beam& beam) {
  return linear_to_db(kGainConstant / (beam.theta1 * beam.theta2));
}

inline double fspl_db(double distance_m, double frequency_hz) {
  if (!(distance_m > 0.0)) throw InvalidArgument("fspl: distance must be positive");
  return 20.0 * std::log10(4.0 * std::numbers::pi * distance_m * frequency_hz / kSpeedOfLight);
}

inline double elevation_deg(double altitude_m, double horizontal_m) {
  return rad_to_deg(std::atan2(altitude_m, horizontal_m));
}

inline double los_probability(double altitude_m, double horizontal_m, const Environment& env) {
  if (!(altitude_m > 0.0)) throw InvalidArgument("los_probability: altitude must be positive");
  if (!(horizontal_m >= 0.0)) throw InvalidArgument("los_probability: negative horizontal distance");
  const double theta = elevation_deg(altitude_m, horizontal_m);
  return 1.0 / (1.0 + env.sigmoid_a * std::exp(-env.sigmoid_b * (theta - env.sigmoid_a)));
}

/// LoS-weighted mean path loss as a linear factor, with an explicit antenna
/// gain in dB (pass 0 for the gain-free loss used to pick the altitude).
inline double mean_path_loss(double altitude_m, double horizontal_m, const Environment& env,
                             const RadioConfig& radio, double gain_db) {
  const double d = std::hypot(horizontal_m, altitude_m);
  const double p_los = los_probability(altitude_m, horizontal_m, env);
  const double excess =
      p_los * db_to_linear(env.excess_los_db) + (1.0 - p_los) * db_to_linear(env.excess_nlos_db);
  return db_to_linear(fspl_db(d, radio.carrier_frequency_hz) - gain_db) * excess;
}

inline double avg_path_loss(double altitude_m, double horizontal_m, const Environment& env,
                            const Beam& beam, const RadioConfig& radio) {
  return mean_path_loss(altitude_m, horizontal_m, env, radio, antenna_gain_db(beam));
}

}  // namespace uavplan
