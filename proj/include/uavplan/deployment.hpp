#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "uavplan/channel.hpp"
#include "uavplan/clustering.hpp"
#include "uavplan/error.hpp"
#include "uavplan/geometry.hpp"

namespace uavplan {

/// Lowest usable elevation angle of the LoS model (15 degrees).
inline constexpr double kMinElevationRad = std::numbers::pi / 12.0;

struct AltitudeBounds {
  double h_min;
  double h_max;

  /// h_min keeps the footprint edge at the model's lowest valid elevation.
  static AltitudeBounds for_footprint(double semi_major, double h_max) {
    return {semi_major * std::tan(kMinElevationRad), h_max};
  }

  bool valid() const { return h_min > 0.0 && h_min <= h_max && std::isfinite(h_max); }
};

struct GoldenSectionOptions {
  double tolerance = 0.5;
  int max_iterations = 200;
};

/// Minimizer of a unimodal function on [lo, hi] (midpoint of the final bracket).
inline double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                                      const GoldenSectionOptions& opt = {}) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < opt.max_iterations && (b - a) > opt.tolerance; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Altitude in [h_min, h_max] minimizing the gain-free mean path loss to a
/// user at horizontal distance `edge_distance`. The interior minimizer wins
/// unless one of the bounds is strictly better.
inline double optimal_altitude(double edge_distance, const Environment& env, const AltitudeBounds& bounds,
                               const RadioConfig& radio, const GoldenSectionOptions& opt = {}) {
  if (!bounds.valid()) throw InvalidArgument("optimal_altitude: invalid altitude bounds");
  if (!(edge_distance >= 0.0)) throw InvalidArgument("optimal_altitude: negative edge distance");
  const auto loss = [&](double h) { return mean_path_loss(h, edge_distance, env, radio, 0.0); };
  if (bounds.h_max - bounds.h_min <= opt.tolerance) {
    return loss(bounds.h_min) <= loss(bounds.h_max) ? bounds.h_min : bounds.h_max;
  }
  const double interior = golden_section_minimize(loss, bounds.h_min, bounds.h_max, opt);
  double best = interior;
  double best_loss = loss(interior);
  for (double edge : {bounds.h_min, bounds.h_max}) {
    const double l = loss(edge);
    if (l < best_loss) {
      best = edge;
      best_loss = l;
    }
  }
  return best;
}

/// Half-beamwidths whose main lobe, seen from `altitude`, spans `footprint`.
inline Beam beam_from_footprint(double altitude, const Ellipse& footprint) {
  if (!(altitude > 0.0)) throw InvalidArgument("beam_from_footprint: altitude must be positive");
  const auto axes = footprint.semi_axes();
  return {rad_to_deg(std::atan(axes.major / altitude)), rad_to_deg(std::atan(axes.minor / altitude))};
}

/// SNR in dB at horizontal distance `horizontal` under transmit power `tx_dbm`.
inline double link_snr_db(double tx_dbm, double altitude, double horizontal, const Environment& env,
                          const Beam& beam, const RadioConfig& radio) {
  return tx_dbm - linear_to_db(avg_path_loss(altitude, horizontal, env, beam, radio)) - radio.noise_power_dbm();
}

/// Transmit power (dBm) placing a user at `edge_distance` exactly at the SNR
/// threshold.
inline double required_power(double altitude, double edge_distance, const Environment& env, const Beam& beam,
                             const RadioConfig& radio) {
  const double threshold_rx_dbm = radio.snr_threshold_db + radio.noise_power_dbm();
  return threshold_rx_dbm + linear_to_db(avg_path_loss(altitude, edge_distance, env, beam, radio));
}

// ---------------------------------------------------------------------------

struct Position3 {
  double x = 0.0;
  double y = 0.0;
  double h = 0.0;
};

struct UavDeployment {
  Position3 position;
  double orientation = 0.0;  // radians, major axis of the footprint
  Beam beam;
  double tx_power_dbm = 0.0;
  Ellipse footprint;
  std::vector<std::size_t> members;
};

struct DeploymentPlan {
  std::string method = "ellipse";
  std::vector<UavDeployment> uavs;
  Environment environment;
  RadioConfig radio;
  double total_power_mw = 0.0;
  /// Serving UAV per user; nullopt when a user lies in no footprint.
  std::vector<std::optional<std::size_t>> assignment;
};

inline double total_power_mw(const std::vector<UavDeployment>& uavs) {
  double sum = 0.0;
  for (const auto& u : uavs) sum += db_to_linear(u.tx_power_dbm);
  return sum;
}

/// Fills `assignment` from the UAV member lists.
inline void assign_members(DeploymentPlan& plan, std::size_t num_users) {
  plan.assignment.assign(num_users, std::nullopt);
  for (std::size_t m = 0; m < plan.uavs.size(); ++m)
    for (auto u : plan.uavs[m].members) {
      if (u >= num_users) throw InvalidArgument("plan: member index out of range");
      if (plan.assignment[u]) throw InvalidArgument("plan: user assigned to two UAVs");
      plan.assignment[u] = m;
    }
}

/// Places one UAV per cluster over its ellipse center, picks the altitude
/// that minimizes the cell-edge path loss, widens the beam to the ellipse and
/// sets the least power that keeps the cell-edge user at the SNR threshold.
inline UavDeployment deploy_cluster(std::span<const Point2> users, const Cluster& cluster, const Environment& env,
                                    const RadioConfig& radio, double h_max) {
  std::vector<Point2> pts;
  for (auto u : cluster.members) pts.push_back(users[u]);
  const Ellipse& fp = cluster.ellipse;
  const Point2 center = fp.center();
  const double edge = edge_distance(fp, pts);
  const auto bounds = AltitudeBounds::for_footprint(fp.semi_axes().major, h_max);
  const double h = optimal_altitude(edge, env, bounds, radio);
  const Beam beam = beam_from_footprint(h, fp);

  double power = required_power(h, edge, env, beam, radio);
  // Round-off can leave the edge user a hair under the threshold.
  while (link_snr_db(power, h, edge, env, beam, radio) < radio.snr_threshold_db)
    power = std::nextafter(power, std::numeric_limits<double>::infinity());

  UavDeployment uav;
  uav.position = {center.x, center.y, h};
  uav.orientation = fp.orientation();
  uav.beam = beam;
  uav.tx_power_dbm = power;
  uav.footprint = fp;
  uav.members = cluster.members;
  return uav;
}

inline DeploymentPlan deploy(const ClusterSet& cs, const Environment& env, const RadioConfig& radio,
                             double h_max = 1000.0) {
  env.validate();
  radio.validate();
  if (!footprints_disjoint(cs) || !find_intersections(cs).empty())
    throw InterferenceRisk("interference risk: footprints share a user");
  DeploymentPlan plan;
  plan.environment = env;
  plan.radio = radio;
  for (const auto& c : cs.clusters) plan.uavs.push_back(deploy_cluster(cs.users, c, env, radio, h_max));
  plan.total_power_mw = total_power_mw(plan.uavs);
  assign_members(plan, cs.users.size());
  return plan;
}

// ---------------------------------------------------------------------------

struct PlanMetrics {
  double coverage_probability = 0.0;
  double total_power_mw = 0.0;
  std::vector<double> per_user_snr_db;
  std::vector<double> per_user_throughput_bps;
  std::size_t num_uavs = 0;

  /// Per-user throughput sorted ascending, for CDF plots.
  std::vector<double> throughput_cdf() const {
    auto v = per_user_throughput_bps;
    std::sort(v.begin(), v.end());
    return v;
  }
};

/// Link quality of every user under `plan`. A user is served by its assigned
/// UAV only while inside that UAV's footprint; everyone else gets SNR -inf and
/// no throughput. Cell bandwidth is shared equally among a UAV's users.
inline PlanMetrics evaluate(const DeploymentPlan& plan, std::span<const Point2> users) {
  PlanMetrics m;
  m.num_uavs = plan.uavs.size();
  m.total_power_mw = plan.total_power_mw;
  m.per_user_snr_db.assign(users.size(), -std::numeric_limits<double>::infinity());
  m.per_user_throughput_bps.assign(users.size(), 0.0);

  std::vector<std::size_t> load(plan.uavs.size(), 0);
  for (std::size_t u = 0; u < users.size() && u < plan.assignment.size(); ++u)
    if (plan.assignment[u] && *plan.assignment[u] < plan.uavs.size()) ++load[*plan.assignment[u]];

  std::size_t covered = 0;
  for (std::size_t u = 0; u < users.size(); ++u) {
    if (u >= plan.assignment.size() || !plan.assignment[u]) continue;
    const std::size_t k = *plan.assignment[u];
    if (k >= plan.uavs.size()) continue;
    const auto& uav = plan.uavs[k];
    if (!contains(uav.footprint, users[u])) continue;
    const double r = distance(users[u], {uav.position.x, uav.position.y});
    const double snr = link_snr_db(uav.tx_power_dbm, uav.position.h, r, plan.environment, uav.beam, plan.radio);
    m.per_user_snr_db[u] = snr;
    m.per_user_throughput_bps[u] =
        plan.radio.bandwidth_hz / static_cast<double>(load[k]) * std::log2(1.0 + db_to_linear(snr));
    if (snr >= plan.radio.snr_threshold_db) ++covered;
  }
  m.coverage_probability = users.empty() ? 0.0 : static_cast<double>(covered) / static_cast<double>(users.size());
  return m;
}

}  // namespace uavplan
