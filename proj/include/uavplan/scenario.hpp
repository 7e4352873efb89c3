#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "uavplan/channel.hpp"
#include "uavplan/clustering.hpp"
#include "uavplan/error.hpp"
#include "uavplan/geometry.hpp"
#include "uavplan/random.hpp"

namespace uavplan {

struct Region {
  double width = 1000.0;
  double height = 1000.0;

  double area() const { return width * height; }
  bool contains(Point2 p) const { return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height; }

  friend bool operator==(const Region&, const Region&) = default;
};

/// Matern cluster process: Poisson parents over the region, each with a
/// Poisson number of daughters uniform in a disk around it.
struct PcpConfig {
  double parent_intensity = 9e-6;  // parents per square meter
  double cluster_radius = 80.0;
  double mean_daughters = 36.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(parent_intensity > 0.0) || !(cluster_radius > 0.0) || !(mean_daughters > 0.0))
      throw InvalidArgument("pcp: parameters must be positive");
  }

  friend bool operator==(const PcpConfig&, const PcpConfig&) = default;
};

inline std::vector<Point2> generate_pcp(const Region& region, const PcpConfig& cfg) {
  cfg.validate();
  if (!(region.width > 0.0) || !(region.height > 0.0)) throw InvalidArgument("region: dimensions must be positive");
  Rng rng(cfg.seed);
  const auto parents = rng.poisson(cfg.parent_intensity * region.area());
  std::vector<Point2> users;
  for (std::uint64_t p = 0; p < parents; ++p) {
    const Point2 parent{rng.uniform(0.0, region.width), rng.uniform(0.0, region.height)};
    const auto daughters = rng.poisson(cfg.mean_daughters);
    for (std::uint64_t d = 0; d < daughters; ++d) {
      const double r = cfg.cluster_radius * std::sqrt(rng.uniform());
      const double phi = 2.0 * std::numbers::pi * rng.uniform();
      const Point2 p2{parent.x + r * std::cos(phi), parent.y + r * std::sin(phi)};
      if (region.contains(p2)) users.push_back(p2);
    }
  }
  return users;
}

struct Scenario {
  Region region;
  std::vector<Point2> users;
  Environment environment;
  RadioConfig radio;
  ClusteringConfig clustering;
  std::optional<PcpConfig> pcp;

  void validate() const {
    if (!(region.width > 0.0) || !(region.height > 0.0)) throw InvalidArgument("region: dimensions must be positive");
    if (users.empty()) throw InvalidArgument("scenario: no users");
    for (const auto& u : users)
      if (!is_finite(u) || !region.contains(u)) throw InvalidArgument("scenario: user outside region");
    environment.validate();
    radio.validate();
    clustering.validate();
  }
};

// ---------------------------------------------------------------------------
// JSON

namespace json_io {

using nlohmann::json;

/// Reads a required member, reporting the dotted path on failure.
template <typename T>
T require(const json& obj, const std::string& key, const std::string& path) {
  const std::string where = path.empty() ? key : path + "." + key;
  if (!obj.is_object() || !obj.contains(key)) throw ParseError(where, "missing field");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(where, std::string("wrong type (") + e.what() + ")");
  }
}

template <typename T>
T optional(const json& obj, const std::string& key, const std::string& path, T fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return require<T>(obj, key, path);
}

inline void warn_unknown(const json& obj, const std::string& path, std::set<std::string> known,
                         std::vector<std::string>* warnings) {
  if (!warnings || !obj.is_object()) return;
  for (const auto& [key, value] : obj.items())
    if (!known.count(key)) warnings->push_back("ignoring unknown field '" + (path.empty() ? key : path + "." + key) + "'");
}

inline const json& require_object(const json& obj, const std::string& key, const std::string& path) {
  const std::string where = path.empty() ? key : path + "." + key;
  if (!obj.is_object() || !obj.contains(key)) throw ParseError(where, "missing field");
  if (!obj.at(key).is_object()) throw ParseError(where, "expected an object");
  return obj.at(key);
}

inline json to_json(const Region& r) { return {{"width", r.width}, {"height", r.height}}; }

inline json to_json(const Environment& e) {
  return {{"name", e.name},
          {"sigmoid_a", e.sigmoid_a},
          {"sigmoid_b", e.sigmoid_b},
          {"excess_los_db", e.excess_los_db},
          {"excess_nlos_db", e.excess_nlos_db}};
}

inline json to_json(const RadioConfig& r) {
  return {{"carrier_frequency_hz", r.carrier_frequency_hz},
          {"noise_psd_dbm_hz", r.noise_psd_dbm_hz},
          {"bandwidth_hz", r.bandwidth_hz},
          {"snr_threshold_db", r.snr_threshold_db}};
}

inline json to_json(const ClusteringConfig& c) {
  return {{"k_max", c.k_max},
          {"silhouette_buffer", c.silhouette_buffer},
          {"max_outer_iterations", c.max_outer_iterations},
          {"rng_seed", c.rng_seed},
          {"fit_tolerance", c.fit.tolerance},
          {"fit_max_iterations", c.fit.max_iterations},
          {"min_semi_axis", c.fit.min_semi_axis}};
}

inline json to_json(const PcpConfig& p) {
  return {{"parent_intensity", p.parent_intensity},
          {"cluster_radius", p.cluster_radius},
          {"mean_daughters", p.mean_daughters},
          {"seed", p.seed}};
}

inline Region region_from(const json& j, const std::string& path, std::vector<std::string>* w) {
  warn_unknown(j, path, {"width", "height"}, w);
  return {require<double>(j, "width", path), require<double>(j, "height", path)};
}

inline Environment environment_from(const json& j, const std::string& path, std::vector<std::string>* w) {
  warn_unknown(j, path, {"name", "sigmoid_a", "sigmoid_b", "excess_los_db", "excess_nlos_db"}, w);
  Environment e;
  e.name = require<std::string>(j, "name", path);
  e.sigmoid_a = require<double>(j, "sigmoid_a", path);
  e.sigmoid_b = require<double>(j, "sigmoid_b", path);
  e.excess_los_db = require<double>(j, "excess_los_db", path);
  e.excess_nlos_db = require<double>(j, "excess_nlos_db", path);
  return e;
}

inline RadioConfig radio_from(const json& j, const std::string& path, std::vector<std::string>* w) {
  warn_unknown(j, path, {"carrier_frequency_hz", "noise_psd_dbm_hz", "bandwidth_hz", "snr_threshold_db"}, w);
  RadioConfig r;
  r.carrier_frequency_hz = require<double>(j, "carrier_frequency_hz", path);
  r.noise_psd_dbm_hz = require<double>(j, "noise_psd_dbm_hz", path);
  r.bandwidth_hz = require<double>(j, "bandwidth_hz", path);
  r.snr_threshold_db = require<double>(j, "snr_threshold_db", path);
  return r;
}

inline ClusteringConfig clustering_from(const json& j, const std::string& path, std::vector<std::string>* w) {
  warn_unknown(j, path,
               {"k_max", "silhouette_buffer", "max_outer_iterations", "rng_seed", "fit_tolerance",
                "fit_max_iterations", "min_semi_axis"},
               w);
  ClusteringConfig c;
  c.k_max = require<int>(j, "k_max", path);
  c.silhouette_buffer = optional<int>(j, "silhouette_buffer", path, c.silhouette_buffer);
  c.max_outer_iterations = require<int>(j, "max_outer_iterations", path);
  c.rng_seed = require<std::uint64_t>(j, "rng_seed", path);
  c.fit.tolerance = optional<double>(j, "fit_tolerance", path, c.fit.tolerance);
  c.fit.max_iterations = optional<int>(j, "fit_max_iterations", path, c.fit.max_iterations);
  c.fit.min_semi_axis = optional<double>(j, "min_semi_axis", path, c.fit.min_semi_axis);
  return c;
}

inline PcpConfig pcp_from(const json& j, const std::string& path, std::vector<std::string>* w) {
  warn_unknown(j, path, {"parent_intensity", "cluster_radius", "mean_daughters", "seed"}, w);
  PcpConfig p;
  p.parent_intensity = require<double>(j, "parent_intensity", path);
  p.cluster_radius = require<double>(j, "cluster_radius", path);
  p.mean_daughters = require<double>(j, "mean_daughters", path);
  p.seed = require<std::uint64_t>(j, "seed", path);
  return p;
}

inline json points_to_json(const std::vector<Point2>& pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back({p.x, p.y});
  return arr;
}

inline std::vector<Point2> points_from(const json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path, "expected an array of [x, y] pairs");
  std::vector<Point2> pts;
  pts.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    const std::string where = path + "[" + std::to_string(i) + "]";
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      throw ParseError(where, "expected [x, y]");
    pts.push_back({e[0].get<double>(), e[1].get<double>()});
  }
  return pts;
}

/// Parses text, turning syntax errors into ParseError with line/column.
inline json parse_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Recover the line and column of the reported byte offset.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(source, "syntax error at line " + std::to_string(line) + ", column " +
                                 std::to_string(col) + ": " + e.what());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace json_io

inline nlohmann::json scenario_to_json(const Scenario& s) {
  using namespace json_io;
  json j;
  j["region"] = to_json(s.region);
  j["users"] = points_to_json(s.users);
  j["environment"] = to_json(s.environment);
  j["radio"] = to_json(s.radio);
  j["clustering"] = to_json(s.clustering);
  if (s.pcp) j["pcp"] = to_json(*s.pcp);
  return j;
}

/// Builds a scenario from JSON. Unknown fields are reported through
/// `warnings` (when given) and otherwise ignored.
inline Scenario scenario_from_json(const nlohmann::json& j, std::vector<std::string>* warnings = nullptr) {
  using namespace json_io;
  if (!j.is_object()) throw ParseError("", "scenario must be a JSON object");
  warn_unknown(j, "", {"region", "users", "environment", "radio", "clustering", "pcp"}, warnings);
  Scenario s;
  s.region = region_from(require_object(j, "region", ""), "region", warnings);
  if (!j.contains("users")) throw ParseError("users", "missing field");
  s.users = points_from(j.at("users"), "users");
  s.environment = environment_from(require_object(j, "environment", ""), "environment", warnings);
  s.radio = radio_from(require_object(j, "radio", ""), "radio", warnings);
  s.clustering = clustering_from(require_object(j, "clustering", ""), "clustering", warnings);
  if (j.contains("pcp")) s.pcp = pcp_from(require_object(j, "pcp", ""), "pcp", warnings);
  try {
    s.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError("", e.what());
  }
  return s;
}

inline void save_scenario(const std::filesystem::path& path, const Scenario& s) {
  json_io::write_file(path, json_io::dump(scenario_to_json(s)));
}

inline Scenario load_scenario(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr) {
  const auto text = json_io::read_file(path);
  return scenario_from_json(json_io::parse_text(text, path.string()), warnings);
}

}  // namespace uavplan
