#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "uavplan/channel.hpp"
#include "uavplan/deployment.hpp"
#include "uavplan/error.hpp"
#include "uavplan/geometry.hpp"
#include "uavplan/scenario.hpp"

namespace uavplan {

// ---------------------------------------------------------------------------
// Circle packing

/// Fixed-altitude, fixed-power deployment with equal circular cells.
struct CirclePackingConfig {
  std::size_t num_uavs = 9;
  double fixed_altitude = 150.0;
  double fixed_power_dbm = 0.0;
  Beam beam{45.0, 45.0};

  double radius() const { return fixed_altitude * std::tan(deg_to_rad(beam.theta1)); }
};

namespace detail {

struct HexLayout {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double spread = 0.0;  // smaller of the two stretch factors, >= 1 when feasible
  double fx = 1.0;
  double fy = 1.0;
};

// Hexagonal lattice with touching circles of radius r, stretched along each
// axis to fill the region. Returns nothing when no row count fits.
inline std::optional<HexLayout> hex_layout(std::size_t n, double r, const Region& region) {
  std::optional<HexLayout> best;
  for (std::size_t rows = 1; rows <= n; ++rows) {
    const std::size_t cols = (n + rows - 1) / rows;
    if ((rows - 1) * cols >= n) continue;  // an empty last row
    const double span_x = 2.0 * r * static_cast<double>(cols - 1) + (rows > 1 ? r : 0.0);
    const double span_y = std::sqrt(3.0) * r * static_cast<double>(rows - 1);
    const double room_x = region.width - 2.0 * r;
    const double room_y = region.height - 2.0 * r;
    if (room_x < span_x || room_y < span_y || room_x < 0.0 || room_y < 0.0) continue;
    constexpr double kUnbounded = std::numeric_limits<double>::infinity();
    HexLayout lay{rows, cols, 0.0, span_x > 0.0 ? room_x / span_x : kUnbounded,
                  span_y > 0.0 ? room_y / span_y : kUnbounded};
    lay.spread = std::min(lay.fx, lay.fy);
    if (!best || lay.spread > best->spread) best = lay;
  }
  return best;
}

}  // namespace detail

/// Centers of `n` disjoint circles of radius `r` inside `region`.
inline std::vector<Point2> circle_packing_centers(std::size_t n, double r, const Region& region) {
  if (n == 0) throw InvalidArgument("circle packing: need at least one UAV");
  if (!(r > 0.0)) throw InvalidArgument("circle packing: radius must be positive");
  const auto lay = detail::hex_layout(n, r, region);
  if (!lay) throw InfeasibleBaseline("circle packing: radius too large for the region");

  const double fx = std::isfinite(lay->fx) ? lay->fx : 1.0;
  const double fy = std::isfinite(lay->fy) ? lay->fy : 1.0;
  const double span_x = (2.0 * r * static_cast<double>(lay->cols - 1) + (lay->rows > 1 ? r : 0.0)) * fx;
  const double span_y = std::sqrt(3.0) * r * static_cast<double>(lay->rows - 1) * fy;
  const double x0 = 0.5 * (region.width - span_x);
  const double y0 = 0.5 * (region.height - span_y);

  std::vector<Point2> centers;
  for (std::size_t row = 0; row < lay->rows && centers.size() < n; ++row)
    for (std::size_t col = 0; col < lay->cols && centers.size() < n; ++col) {
      const double x = x0 + (2.0 * r * static_cast<double>(col) + (row % 2 == 1 ? r : 0.0)) * fx;
      const double y = y0 + std::sqrt(3.0) * r * static_cast<double>(row) * fy;
      centers.push_back({x, y});
    }
  return centers;
}

/// Largest radius at which `n` equal circles still fit (bisection on the
/// lattice heuristic).
inline double max_packing_radius(std::size_t n, const Region& region) {
  double lo = 0.0, hi = 0.5 * std::min(region.width, region.height);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (detail::hex_layout(n, mid, region)) lo = mid;
    else hi = mid;
  }
  return lo;
}

/// Circles of radius `radius` seen from `altitude`, with just enough power for
/// a user on the circle edge to reach the SNR threshold.
inline CirclePackingConfig circle_packing_for_radius(std::size_t num_uavs, double radius, const Environment& env,
                                                     const RadioConfig& radio, double altitude = 150.0) {
  if (num_uavs == 0) throw InvalidArgument("circle packing: need at least one UAV");
  if (!(radius > 0.0) || !(altitude > 0.0)) throw InvalidArgument("circle packing: radius and altitude must be positive");
  CirclePackingConfig cfg;
  cfg.num_uavs = num_uavs;
  cfg.fixed_altitude = altitude;
  const double theta = rad_to_deg(std::atan(radius / altitude));
  cfg.beam = {theta, theta};
  // Size the power for the radius exactly as the plan will recompute it.
  const double edge = cfg.radius();
  double power = required_power(altitude, edge, env, cfg.beam, radio);
  while (link_snr_db(power, altitude, edge, env, cfg.beam, radio) < radio.snr_threshold_db)
    power = std::nextafter(power, std::numeric_limits<double>::infinity());
  cfg.fixed_power_dbm = power;
  return cfg;
}

/// Largest circles that still pack `num_uavs` into the region.
inline CirclePackingConfig fitted_circle_packing(std::size_t num_uavs, const Region& region, const Environment& env,
                                                 const RadioConfig& radio, double altitude = 150.0) {
  if (num_uavs == 0) throw InvalidArgument("circle packing: need at least one UAV");
  return circle_packing_for_radius(num_uavs, max_packing_radius(num_uavs, region) * (1.0 - 1e-9), env, radio,
                                   altitude);
}

inline DeploymentPlan circle_pack_deploy(const Scenario& scenario, const CirclePackingConfig& cfg) {
  if (cfg.num_uavs == 0) throw InvalidArgument("circle packing: need at least one UAV");
  if (!(cfg.fixed_altitude > 0.0)) throw InvalidArgument("circle packing: altitude must be positive");
  if (!cfg.beam.valid() || cfg.beam.theta1 != cfg.beam.theta2)
    throw InvalidArgument("circle packing: beam must be circular");
  const double r = cfg.radius();
  const auto centers = circle_packing_centers(cfg.num_uavs, r, scenario.region);

  DeploymentPlan plan;
  plan.method = "circle";
  plan.environment = scenario.environment;
  plan.radio = scenario.radio;
  for (const auto& c : centers) {
    UavDeployment uav;
    uav.position = {c.x, c.y, cfg.fixed_altitude};
    uav.orientation = 0.0;
    uav.beam = cfg.beam;
    uav.tx_power_dbm = cfg.fixed_power_dbm;
    uav.footprint = Ellipse::circle(c, r);
    plan.uavs.push_back(uav);
  }
  for (std::size_t u = 0; u < scenario.users.size(); ++u)
    for (auto& uav : plan.uavs)
      if (contains(uav.footprint, scenario.users[u])) {
        uav.members.push_back(u);
        break;
      }
  plan.total_power_mw = total_power_mw(plan.uavs);
  assign_members(plan, scenario.users.size());
  return plan;
}

// ---------------------------------------------------------------------------
// Exhaustive search on tiny instances

struct BruteForceConfig {
  std::size_t max_users = 10;
  std::size_t max_uavs = 3;
  /// Altitude by grid search at this step when positive, golden section otherwise.
  double altitude_grid_step = 0.0;
  double h_max = 1000.0;
  FitConfig fit;

  static constexpr std::size_t kUserCap = 10;
  static constexpr std::size_t kUavCap = 3;
};

struct BruteForceResult {
  std::vector<std::vector<std::size_t>> partition;
  double total_power_mw = std::numeric_limits<double>::infinity();
  std::size_t partitions_examined = 0;
};

namespace detail {

// Calls visit(labels, blocks) for every restricted-growth string of length n
// whose largest block index is below max_blocks.
template <typename Visit>
void for_each_partition(std::size_t n, std::size_t max_blocks, Visit&& visit) {
  std::vector<std::size_t> labels(n, 0);
  std::vector<std::size_t> prefix_max(n, 0);  // max label in labels[0..i]
  while (true) {
    visit(labels, prefix_max[n - 1] + 1);
    // Advance to the next restricted-growth string.
    std::size_t i = n - 1;
    while (i > 0) {
      const std::size_t bound = std::min(prefix_max[i - 1] + 1, max_blocks - 1);
      if (labels[i] < bound) break;
      --i;
    }
    if (i == 0) return;
    ++labels[i];
    prefix_max[i] = std::max(prefix_max[i - 1], labels[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      labels[j] = 0;
      prefix_max[j] = prefix_max[i];
    }
  }
}

}  // namespace detail

/// Minimum total transmit power over all partitions of `users` into at most
/// `max_uavs` groups whose fitted ellipses share no user.
inline BruteForceResult brute_force_optimum(const std::vector<Point2>& users, std::size_t max_uavs,
                                            const Environment& env, const RadioConfig& radio,
                                            const BruteForceConfig& cfg = {}) {
  if (cfg.max_users > BruteForceConfig::kUserCap || cfg.max_uavs > BruteForceConfig::kUavCap)
    throw InvalidArgument("brute force: configured caps exceed the hard limits");
  if (users.empty() || users.size() > cfg.max_users)
    throw InvalidArgument("brute force: user count outside [1, max_users]");
  if (max_uavs == 0 || max_uavs > cfg.max_uavs) throw InvalidArgument("brute force: UAV count outside [1, max_uavs]");

  const std::size_t n = users.size();
  const std::size_t subsets = std::size_t{1} << n;
  // Per subset: power in mW if its ellipse covers no outside user, +inf otherwise.
  std::vector<double> power(subsets, -1.0);
  const auto subset_power = [&](std::uint32_t mask) {
    if (power[mask] >= 0.0) return power[mask];
    Cluster c;
    for (std::size_t u = 0; u < n; ++u)
      if ((mask >> u) & 1u) c.members.push_back(u);
    std::vector<Point2> pts;
    for (auto u : c.members) pts.push_back(users[u]);
    c.ellipse = mvee(pts, cfg.fit);
    for (std::size_t u = 0; u < n; ++u)
      if (!((mask >> u) & 1u) && contains(c.ellipse, users[u])) return power[mask] = std::numeric_limits<double>::infinity();

    double p_dbm;
    if (cfg.altitude_grid_step > 0.0) {
      const double edge = edge_distance(c.ellipse, pts);
      const auto bounds = AltitudeBounds::for_footprint(c.ellipse.semi_axes().major, cfg.h_max);
      double best_h = bounds.h_min, best = std::numeric_limits<double>::infinity();
      for (double h = bounds.h_min; h <= bounds.h_max; h += cfg.altitude_grid_step) {
        const double l = mean_path_loss(h, edge, env, radio, 0.0);
        if (l < best) {
          best = l;
          best_h = h;
        }
      }
      p_dbm = required_power(best_h, edge, env, beam_from_footprint(best_h, c.ellipse), radio);
    } else {
      p_dbm = deploy_cluster(users, c, env, radio, cfg.h_max).tx_power_dbm;
    }
    return power[mask] = db_to_linear(p_dbm);
  };

  BruteForceResult best;
  std::vector<std::uint32_t> masks;
  detail::for_each_partition(n, max_uavs, [&](const std::vector<std::size_t>& labels, std::size_t blocks) {
    ++best.partitions_examined;
    masks.assign(blocks, 0);
    for (std::size_t u = 0; u < n; ++u) masks[labels[u]] |= std::uint32_t{1} << u;
    double total = 0.0;
    for (auto m : masks) {
      total += subset_power(m);
      if (!(total < best.total_power_mw)) return;
    }
    best.total_power_mw = total;
    best.partition.clear();
    for (auto m : masks) {
      std::vector<std::size_t> block;
      for (std::size_t u = 0; u < n; ++u)
        if ((m >> u) & 1u) block.push_back(u);
      best.partition.push_back(std::move(block));
    }
  });
  return best;
}

}  // namespace uavplan
