#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "uavplan/clustering.hpp"
#include "uavplan/deployment.hpp"
#include "uavplan/error.hpp"
#include "uavplan/scenario.hpp"

namespace uavplan {

namespace json_io {

inline json to_json(const Ellipse& e) {
  const auto axes = e.semi_axes();
  const auto c = e.center();
  // A and b define the shape; the rest is for readers and is ignored on load.
  return {{"A", {e.A.xx, e.A.xy, e.A.yy}},
          {"b", {e.b.x, e.b.y}},
          {"center", {c.x, c.y}},
          {"semi_axes", {axes.major, axes.minor}},
          {"orientation_rad", e.orientation()}};
}

inline Ellipse ellipse_from(const json& j, const std::string& path) {
  if (!j.is_object()) throw ParseError(path, "expected an object");
  const auto a = require<std::vector<double>>(j, "A", path);
  const auto b = require<std::vector<double>>(j, "b", path);
  if (a.size() != 3) throw ParseError(path + ".A", "expected [a11, a12, a22]");
  if (b.size() != 2) throw ParseError(path + ".b", "expected [x, y]");
  Ellipse e{{a[0], a[1], a[2]}, {b[0], b[1]}};
  if (!(e.A.xx > 0.0) || !(e.A.det() > 0.0)) throw ParseError(path + ".A", "matrix is not positive definite");
  return e;
}

inline json to_json(const UavDeployment& u) {
  return {{"position", {{"x", u.position.x}, {"y", u.position.y}, {"h", u.position.h}}},
          {"orientation_rad", u.orientation},
          {"beam_deg", {u.beam.theta1, u.beam.theta2}},
          {"tx_power_dbm", u.tx_power_dbm},
          {"footprint", to_json(u.footprint)},
          {"members", u.members}};
}

inline UavDeployment uav_from(const json& j, const std::string& path, std::vector<std::string>* w) {
  if (!j.is_object()) throw ParseError(path, "expected an object");
  warn_unknown(j, path, {"position", "orientation_rad", "beam_deg", "tx_power_dbm", "footprint", "members"}, w);
  UavDeployment u;
  const auto& pos = require_object(j, "position", path);
  u.position = {require<double>(pos, "x", path + ".position"), require<double>(pos, "y", path + ".position"),
                require<double>(pos, "h", path + ".position")};
  u.orientation = require<double>(j, "orientation_rad", path);
  const auto beam = require<std::vector<double>>(j, "beam_deg", path);
  if (beam.size() != 2) throw ParseError(path + ".beam_deg", "expected [theta1, theta2]");
  u.beam = {beam[0], beam[1]};
  u.tx_power_dbm = require<double>(j, "tx_power_dbm", path);
  u.footprint = ellipse_from(require_object(j, "footprint", path), path + ".footprint");
  u.members = require<std::vector<std::size_t>>(j, "members", path);
  return u;
}

}  // namespace json_io

inline nlohmann::json plan_to_json(const DeploymentPlan& plan) {
  using namespace json_io;
  json uavs = json::array();
  for (const auto& u : plan.uavs) uavs.push_back(to_json(u));
  json assignment = json::array();
  for (const auto& a : plan.assignment) assignment.push_back(a ? json(*a) : json(nullptr));
  return {{"method", plan.method},
          {"num_uavs", plan.uavs.size()},
          {"total_power_mw", plan.total_power_mw},
          {"environment", to_json(plan.environment)},
          {"radio", to_json(plan.radio)},
          {"uavs", uavs},
          {"assignment", assignment}};
}

/// Inverse of plan_to_json. The assignment is rebuilt from member lists and
/// checked against the stored one.
inline DeploymentPlan plan_from_json(const nlohmann::json& j, std::vector<std::string>* warnings = nullptr) {
  using namespace json_io;
  if (!j.is_object()) throw ParseError("", "plan must be a JSON object");
  warn_unknown(j, "", {"method", "num_uavs", "total_power_mw", "environment", "radio", "uavs", "assignment"}, warnings);
  DeploymentPlan plan;
  plan.method = require<std::string>(j, "method", "");
  plan.environment = environment_from(require_object(j, "environment", ""), "environment", warnings);
  plan.radio = radio_from(require_object(j, "radio", ""), "radio", warnings);
  if (!j.contains("uavs") || !j.at("uavs").is_array()) throw ParseError("uavs", "expected an array");
  const auto& uavs = j.at("uavs");
  for (std::size_t i = 0; i < uavs.size(); ++i)
    plan.uavs.push_back(uav_from(uavs[i], "uavs[" + std::to_string(i) + "]", warnings));
  plan.total_power_mw = require<double>(j, "total_power_mw", "");
  if (!j.contains("assignment") || !j.at("assignment").is_array()) throw ParseError("assignment", "expected an array");
  try {
    assign_members(plan, j.at("assignment").size());
  } catch (const InvalidArgument& e) {
    throw ParseError("uavs", e.what());
  }
  const auto& stored = j.at("assignment");
  for (std::size_t u = 0; u < stored.size(); ++u) {
    const bool match = stored[u].is_null() ? !plan.assignment[u]
                                           : stored[u].is_number_unsigned() && plan.assignment[u] &&
                                                 stored[u].get<std::size_t>() == *plan.assignment[u];
    if (!match) throw ParseError("assignment[" + std::to_string(u) + "]", "disagrees with UAV member lists");
  }
  return plan;
}

inline nlohmann::json trace_to_json(const AlgorithmTrace& trace, bool converged = true) {
  nlohmann::json iters = nlohmann::json::array();
  for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
    const auto& r = trace.iterations[i];
    iters.push_back({{"iteration", i + 1},
                     {"input_users", r.input_users},
                     {"remaining_users", r.remaining},
                     {"k_origin", r.k_origin},
                     {"clusters_formed", r.clusters_formed},
                     {"phase", r.phase},
                     {"intersecting", r.intersecting}});
  }
  return {{"converged", converged}, {"num_iterations", trace.iterations.size()}, {"iterations", iters}};
}

inline AlgorithmTrace trace_from_json(const nlohmann::json& j) {
  using namespace json_io;
  if (!j.is_object() || !j.contains("iterations") || !j.at("iterations").is_array())
    throw ParseError("iterations", "expected an array");
  AlgorithmTrace t;
  const auto& iters = j.at("iterations");
  for (std::size_t i = 0; i < iters.size(); ++i) {
    const std::string path = "iterations[" + std::to_string(i) + "]";
    IterationRecord r;
    r.input_users = require<std::size_t>(iters[i], "input_users", path);
    r.remaining = require<std::size_t>(iters[i], "remaining_users", path);
    r.k_origin = require<std::size_t>(iters[i], "k_origin", path);
    r.clusters_formed = require<std::size_t>(iters[i], "clusters_formed", path);
    r.phase = require<int>(iters[i], "phase", path);
    r.intersecting = require<std::vector<std::size_t>>(iters[i], "intersecting", path);
    t.iterations.push_back(std::move(r));
  }
  return t;
}

inline void save_plan(const std::filesystem::path& path, const DeploymentPlan& plan) {
  json_io::write_file(path, json_io::dump(plan_to_json(plan)));
}

inline DeploymentPlan load_plan(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr) {
  return plan_from_json(json_io::parse_text(json_io::read_file(path), path.string()), warnings);
}

// ---------------------------------------------------------------------------
// CSV

namespace csv {

/// Shortest text that reads back to the same double; "inf", "-inf", "nan"
/// for non-finite values.
inline std::string number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string number(std::size_t v) { return std::to_string(v); }

/// Quotes a field when it holds a comma, quote or line break.
inline std::string field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string row(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += field(cells[i]);
  }
  return line + "\n";
}

}  // namespace csv

inline std::string metrics_csv(const PlanMetrics& m, const std::string& method) {
  double mean_tp = 0.0;
  for (double t : m.per_user_throughput_bps) mean_tp += t;
  if (!m.per_user_throughput_bps.empty()) mean_tp /= static_cast<double>(m.per_user_throughput_bps.size());
  return csv::row({"method", "num_users", "num_uavs", "total_power_mw", "coverage_probability",
                   "mean_throughput_bps"}) +
         csv::row({method, csv::number(m.per_user_snr_db.size()), csv::number(m.num_uavs),
                   csv::number(m.total_power_mw), csv::number(m.coverage_probability), csv::number(mean_tp)});
}

inline std::string cdf_csv(const PlanMetrics& m) {
  const auto sorted = m.throughput_cdf();
  std::string out = csv::row({"throughput_bps", "cdf"});
  for (std::size_t i = 0; i < sorted.size(); ++i)
    out += csv::row({csv::number(sorted[i]),
                     csv::number(static_cast<double>(i + 1) / static_cast<double>(sorted.size()))});
  return out;
}

inline std::string per_user_csv(const PlanMetrics& m, const DeploymentPlan& plan) {
  std::string out = csv::row({"user", "uav", "snr_db", "throughput_bps"});
  for (std::size_t u = 0; u < m.per_user_snr_db.size(); ++u) {
    const bool assigned = u < plan.assignment.size() && plan.assignment[u];
    out += csv::row({csv::number(u), assigned ? csv::number(*plan.assignment[u]) : std::string(),
                     csv::number(m.per_user_snr_db[u]), csv::number(m.per_user_throughput_bps[u])});
  }
  return out;
}

}  // namespace uavplan
