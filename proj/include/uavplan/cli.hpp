#pragma once

// Batch commands behind the uavplan executable. Each command reads and writes
// files only, logs to the given stream and reports failures by exception;
// run_command maps those to process exit codes.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "uavplan/baseline.hpp"
#include "uavplan/clustering.hpp"
#include "uavplan/deployment.hpp"
#include "uavplan/error.hpp"
#include "uavplan/io.hpp"
#include "uavplan/scenario.hpp"

namespace uavplan::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kParseError = 2,
  kNoConvergence = 3,
  kInfeasibleBaseline = 4,
};

/// Settings given on the command line that replace scenario values.
struct Overrides {
  std::optional<std::string> env;
  std::optional<double> bandwidth_hz;
  std::optional<double> snr_threshold_db;
  std::optional<int> k_max;
  std::optional<std::uint64_t> seed;  // clustering seed

  void apply(Scenario& s) const {
    if (env) s.environment = Environment::by_name(*env);
    if (bandwidth_hz) s.radio.bandwidth_hz = *bandwidth_hz;
    if (snr_threshold_db) s.radio.snr_threshold_db = *snr_threshold_db;
    if (k_max) s.clustering.k_max = *k_max;
    if (seed) s.clustering.rng_seed = *seed;
    s.environment.validate();
    s.radio.validate();
    s.clustering.validate();
  }
};

/// Runs `body`, logging any failure and translating it to an exit code.
inline int run_command(std::ostream& log, const std::function<void()>& body) {
  try {
    body();
    return kOk;
  } catch (const ParseError& e) {
    log << "error: parse: " << e.what() << "\n";
    return kParseError;
  } catch (const InvalidArgument& e) {
    log << "error: invalid input: " << e.what() << "\n";
    return kParseError;
  } catch (const NoConvergence& e) {
    log << "error: clustering did not converge after " << e.trace().iterations.size() << " iterations\n";
    return kNoConvergence;
  } catch (const InfeasibleBaseline& e) {
    log << "error: baseline: " << e.what() << "\n";
    return kInfeasibleBaseline;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kIoError;
  }
}

// ---------------------------------------------------------------------------
// generate

struct GenerateOptions {
  std::size_t count = 100;
  std::uint64_t seed = 1;  // master seed
  fs::path out_dir = "scenarios";
  Region region;
  PcpConfig pcp;  // seed field is ignored
  Overrides overrides;
};

/// PCP scenario whose realization is drawn from `seed`, re-seeding until it
/// holds at least one user.
inline Scenario generate_scenario(const Region& region, PcpConfig pcp, std::uint64_t seed,
                                  const Overrides& overrides = {}) {
  Scenario s;
  s.region = region;
  pcp.seed = seed;
  s.users = generate_pcp(region, pcp);
  for (int attempt = 0; s.users.empty(); ++attempt) {
    if (attempt == 1000) throw InvalidArgument("generate: PCP parameters keep producing empty realizations");
    pcp.seed = mix_seed(pcp.seed);
    s.users = generate_pcp(region, pcp);
  }
  s.pcp = pcp;
  overrides.apply(s);
  return s;
}

inline std::string scenario_file_name(std::size_t index, std::size_t count) {
  const int width = std::max<int>(3, static_cast<int>(std::to_string(count > 0 ? count - 1 : 0).size()));
  char buf[64];
  std::snprintf(buf, sizeof buf, "scenario_%0*zu.json", width, index);
  return buf;
}

inline std::vector<fs::path> cmd_generate(const GenerateOptions& opt, std::ostream& log) {
  std::vector<fs::path> written;
  if (opt.count == 0) {
    log << "generate: count is 0, nothing to do\n";
    return written;
  }
  for (std::size_t i = 0; i < opt.count; ++i) {
    const auto s = generate_scenario(opt.region, opt.pcp, combine_seed(opt.seed, i), opt.overrides);
    const auto path = opt.out_dir / scenario_file_name(i, opt.count);
    save_scenario(path, s);
    written.push_back(path);
  }
  log << "generate: wrote " << written.size() << " scenarios to " << opt.out_dir.string() << "\n";
  return written;
}

// ---------------------------------------------------------------------------
// deploy

struct DeployOptions {
  fs::path scenario;
  std::string method = "ellipse";
  fs::path out_dir = "out";
  double h_max = 1000.0;
  std::size_t num_uavs = 9;        // circle: UAV count, brute: largest group count
  double circle_altitude = 150.0;  // circle only
  std::optional<double> circle_radius;  // circle only, largest fitting radius when unset
  Overrides overrides;
};

struct MethodResult {
  DeploymentPlan plan;
  std::optional<AlgorithmTrace> trace;
};

/// One UAV per block of the exhaustive optimum, deployed like the pipeline.
inline DeploymentPlan brute_force_plan(const Scenario& s, std::size_t max_uavs, double h_max) {
  BruteForceConfig cfg;
  cfg.h_max = h_max;
  cfg.fit = s.clustering.fit;
  const auto best = brute_force_optimum(s.users, std::min(max_uavs, BruteForceConfig::kUavCap), s.environment,
                                        s.radio, cfg);
  DeploymentPlan plan;
  plan.method = "brute";
  plan.environment = s.environment;
  plan.radio = s.radio;
  for (const auto& block : best.partition) {
    std::vector<Point2> pts;
    for (auto u : block) pts.push_back(s.users[u]);
    plan.uavs.push_back(deploy_cluster(s.users, Cluster{block, mvee(pts, cfg.fit)}, s.environment, s.radio, h_max));
  }
  plan.total_power_mw = total_power_mw(plan.uavs);
  assign_members(plan, s.users.size());
  return plan;
}

inline MethodResult run_method(const Scenario& s, const std::string& method, const DeployOptions& opt) {
  if (method == "ellipse") {
    auto r = ellipse_clustering(s.users, s.clustering);
    auto plan = deploy(r.clusters, s.environment, s.radio, opt.h_max);
    return {std::move(plan), std::move(r.trace)};
  }
  if (method == "circle") {
    const auto cfg =
        opt.circle_radius
            ? circle_packing_for_radius(opt.num_uavs, *opt.circle_radius, s.environment, s.radio, opt.circle_altitude)
            : fitted_circle_packing(opt.num_uavs, s.region, s.environment, s.radio, opt.circle_altitude);
    return {circle_pack_deploy(s, cfg), std::nullopt};
  }
  if (method == "brute") return {brute_force_plan(s, opt.num_uavs, opt.h_max), std::nullopt};
  throw InvalidArgument("unknown method '" + method + "' (expected ellipse, circle or brute)");
}

inline Scenario load_with_overrides(const fs::path& path, const Overrides& overrides, std::ostream& log) {
  std::vector<std::string> warnings;
  auto s = load_scenario(path, &warnings);
  for (const auto& w : warnings) log << "warning: " << path.string() << ": " << w << "\n";
  overrides.apply(s);
  return s;
}

inline MethodResult cmd_deploy(const DeployOptions& opt, std::ostream& log) {
  const auto s = load_with_overrides(opt.scenario, opt.overrides, log);
  try {
    auto result = run_method(s, opt.method, opt);
    save_plan(opt.out_dir / "plan.json", result.plan);
    if (result.trace)
      json_io::write_file(opt.out_dir / "trace.json", json_io::dump(trace_to_json(*result.trace, true)));
    log << "deploy: " << opt.method << " placed " << result.plan.uavs.size() << " UAVs, total power "
        << result.plan.total_power_mw << " mW\n";
    return result;
  } catch (const NoConvergence& e) {
    json_io::write_file(opt.out_dir / "trace.json", json_io::dump(trace_to_json(e.trace(), false)));
    throw;
  }
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOptions {
  fs::path plan;
  fs::path scenario;
  fs::path out_dir = "out";
};

inline PlanMetrics cmd_evaluate(const EvaluateOptions& opt, std::ostream& log) {
  std::vector<std::string> warnings;
  const auto plan = load_plan(opt.plan, &warnings);
  for (const auto& w : warnings) log << "warning: " << opt.plan.string() << ": " << w << "\n";
  const auto s = load_with_overrides(opt.scenario, {}, log);
  if (plan.assignment.size() != s.users.size())
    throw ParseError("assignment", "plan covers " + std::to_string(plan.assignment.size()) + " users, scenario has " +
                                       std::to_string(s.users.size()));
  const auto m = evaluate(plan, s.users);
  json_io::write_file(opt.out_dir / "metrics.csv", metrics_csv(m, plan.method));
  json_io::write_file(opt.out_dir / "cdf.csv", cdf_csv(m));
  json_io::write_file(opt.out_dir / "users.csv", per_user_csv(m, plan));
  log << "evaluate: coverage " << m.coverage_probability << ", total power " << m.total_power_mw << " mW\n";
  return m;
}

// ---------------------------------------------------------------------------
// sweep

/// Batch run description, read from JSON:
/// {"scenarios": [paths], "seeds": [pcp seeds], "methods": [...],
///  "out_dir": "...", "overrides": {...}}. Paths are relative to the file.
struct RunManifest {
  std::vector<fs::path> scenarios;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> methods{"ellipse", "circle"};
  fs::path out_dir = "sweep";
  Overrides overrides;
  std::optional<double> h_max;
  std::optional<std::size_t> num_uavs;

  void validate() const {
    if (scenarios.empty() && seeds.empty()) throw ParseError("scenarios", "manifest needs scenarios or seeds");
    if (methods.empty()) throw ParseError("methods", "manifest needs at least one method");
    for (const auto& m : methods)
      if (m != "ellipse" && m != "circle" && m != "brute") throw ParseError("methods", "unknown method '" + m + "'");
  }
};

inline RunManifest manifest_from_json(const nlohmann::json& j, const fs::path& base,
                                      std::vector<std::string>* warnings = nullptr) {
  using namespace json_io;
  if (!j.is_object()) throw ParseError("", "manifest must be a JSON object");
  warn_unknown(j, "", {"scenarios", "seeds", "methods", "out_dir", "overrides"}, warnings);
  RunManifest m;
  for (const auto& p : optional<std::vector<std::string>>(j, "scenarios", "", {})) {
    const fs::path path(p);
    m.scenarios.push_back(path.is_absolute() ? path : base / path);
  }
  m.seeds = optional<std::vector<std::uint64_t>>(j, "seeds", "", {});
  m.methods = optional<std::vector<std::string>>(j, "methods", "", m.methods);
  if (j.contains("out_dir")) {
    const fs::path out(require<std::string>(j, "out_dir", ""));
    m.out_dir = out.is_absolute() ? out : base / out;
  }
  if (j.contains("overrides")) {
    const auto& o = require_object(j, "overrides", "");
    warn_unknown(o, "overrides", {"env", "bandwidth_hz", "snr_threshold_db", "k_max", "seed", "h_max", "num_uavs"},
                 warnings);
    if (o.contains("env")) m.overrides.env = require<std::string>(o, "env", "overrides");
    if (o.contains("bandwidth_hz")) m.overrides.bandwidth_hz = require<double>(o, "bandwidth_hz", "overrides");
    if (o.contains("snr_threshold_db"))
      m.overrides.snr_threshold_db = require<double>(o, "snr_threshold_db", "overrides");
    if (o.contains("k_max")) m.overrides.k_max = require<int>(o, "k_max", "overrides");
    if (o.contains("seed")) m.overrides.seed = require<std::uint64_t>(o, "seed", "overrides");
    if (o.contains("h_max")) m.h_max = require<double>(o, "h_max", "overrides");
    if (o.contains("num_uavs")) m.num_uavs = require<std::size_t>(o, "num_uavs", "overrides");
  }
  m.validate();
  return m;
}

struct SweepOptions {
  std::optional<fs::path> manifest;
  std::optional<fs::path> scenario_dir;
  std::vector<std::string> methods;  // replaces the manifest's list when set
  std::optional<fs::path> out_dir;
  double h_max = 1000.0;
  std::size_t num_uavs = 9;  // circle/brute count when no ellipse run is there to match
  Overrides overrides;
};

struct SweepRun {
  std::string scenario;
  std::string method;
  std::size_t num_users = 0;
  std::string status = "ok";  // ok | no-convergence | infeasible | skipped
  std::size_t num_uavs = 0;
  double total_power_mw = 0.0;
  double coverage = 0.0;
  std::optional<std::size_t> iterations;
};

struct MethodSummary {
  std::string method;
  std::size_t runs = 0;
  std::size_t failures = 0;
  double mean_power_mw = 0.0;
  double median_power_mw = 0.0;
  double mean_coverage = 0.0;
  double mean_num_uavs = 0.0;
  std::optional<double> mean_iterations;
  std::optional<std::size_t> max_iterations;
};

struct SweepResult {
  std::vector<SweepRun> runs;
  std::vector<MethodSummary> summary;
  std::size_t non_convergences = 0;
};

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::vector<MethodSummary> summarize(const std::vector<SweepRun>& runs, const std::vector<std::string>& methods) {
  std::vector<MethodSummary> out;
  for (const auto& method : methods) {
    MethodSummary s;
    s.method = method;
    std::vector<double> powers;
    double iters = 0.0;
    std::size_t with_iters = 0;
    for (const auto& r : runs) {
      if (r.method != method || r.status == "skipped") continue;
      if (r.status != "ok") {
        ++s.failures;
        continue;
      }
      ++s.runs;
      powers.push_back(r.total_power_mw);
      s.mean_coverage += r.coverage;
      s.mean_num_uavs += static_cast<double>(r.num_uavs);
      if (r.iterations) {
        iters += static_cast<double>(*r.iterations);
        ++with_iters;
        s.max_iterations = std::max(s.max_iterations.value_or(0), *r.iterations);
      }
    }
    if (s.runs > 0) {
      double sum = 0.0;
      for (double p : powers) sum += p;
      s.mean_power_mw = sum / static_cast<double>(s.runs);
      s.median_power_mw = median(powers);
      s.mean_coverage /= static_cast<double>(s.runs);
      s.mean_num_uavs /= static_cast<double>(s.runs);
    }
    if (with_iters > 0) s.mean_iterations = iters / static_cast<double>(with_iters);
    out.push_back(s);
  }
  return out;
}

inline std::string runs_csv(const std::vector<SweepRun>& runs) {
  std::string out = csv::row({"scenario", "method", "status", "num_users", "num_uavs", "total_power_mw",
                              "coverage_probability", "iterations"});
  for (const auto& r : runs)
    out += csv::row({r.scenario, r.method, r.status, csv::number(r.num_users), csv::number(r.num_uavs),
                     csv::number(r.total_power_mw), csv::number(r.coverage),
                     r.iterations ? csv::number(*r.iterations) : std::string()});
  return out;
}

inline std::string summary_csv(const std::vector<MethodSummary>& summary) {
  std::string out = csv::row({"method", "runs", "failures", "mean_power_mw", "median_power_mw", "mean_coverage",
                              "mean_num_uavs", "mean_iterations", "max_iterations"});
  for (const auto& s : summary)
    out += csv::row({s.method, csv::number(s.runs), csv::number(s.failures), csv::number(s.mean_power_mw),
                     csv::number(s.median_power_mw), csv::number(s.mean_coverage), csv::number(s.mean_num_uavs),
                     s.mean_iterations ? csv::number(*s.mean_iterations) : std::string(),
                     s.max_iterations ? csv::number(*s.max_iterations) : std::string()});
  return out;
}

inline SweepResult cmd_sweep(const SweepOptions& opt, std::ostream& log) {
  RunManifest manifest;
  manifest.scenarios.clear();
  if (opt.manifest) {
    std::vector<std::string> warnings;
    const auto j = json_io::parse_text(json_io::read_file(*opt.manifest), opt.manifest->string());
    manifest = manifest_from_json(j, opt.manifest->parent_path(), &warnings);
    for (const auto& w : warnings) log << "warning: " << opt.manifest->string() << ": " << w << "\n";
  }
  if (opt.scenario_dir) {
    if (!fs::is_directory(*opt.scenario_dir)) throw Error("not a directory: '" + opt.scenario_dir->string() + "'");
    std::vector<fs::path> found;
    for (const auto& entry : fs::directory_iterator(*opt.scenario_dir))
      if (entry.is_regular_file() && entry.path().extension() == ".json") found.push_back(entry.path());
    std::sort(found.begin(), found.end());
    manifest.scenarios.insert(manifest.scenarios.end(), found.begin(), found.end());
  }
  if (!opt.methods.empty()) manifest.methods = opt.methods;
  if (opt.out_dir) manifest.out_dir = *opt.out_dir;
  // Command-line settings win over the manifest's.
  Overrides ov = manifest.overrides;
  if (opt.overrides.env) ov.env = opt.overrides.env;
  if (opt.overrides.bandwidth_hz) ov.bandwidth_hz = opt.overrides.bandwidth_hz;
  if (opt.overrides.snr_threshold_db) ov.snr_threshold_db = opt.overrides.snr_threshold_db;
  if (opt.overrides.k_max) ov.k_max = opt.overrides.k_max;
  if (opt.overrides.seed) ov.seed = opt.overrides.seed;
  manifest.validate();

  DeployOptions dopt;
  dopt.h_max = manifest.h_max.value_or(opt.h_max);
  const std::size_t fallback_uavs = manifest.num_uavs.value_or(opt.num_uavs);

  std::vector<std::pair<std::string, std::function<Scenario()>>> sources;
  for (const auto& p : manifest.scenarios)
    sources.emplace_back(p.filename().string(), [p, ov, &log] { return load_with_overrides(p, ov, log); });
  for (auto seed : manifest.seeds)
    sources.emplace_back("seed_" + std::to_string(seed),
                         [seed, ov] { return generate_scenario(Region{}, PcpConfig{}, seed, ov); });

  SweepResult result;
  for (const auto& [name, make] : sources) {
    const Scenario s = make();
    std::optional<std::size_t> matched;
    for (const auto& method : manifest.methods) {
      SweepRun run;
      run.scenario = name;
      run.method = method;
      run.num_users = s.users.size();
      dopt.num_uavs = matched.value_or(fallback_uavs);
      if (method == "brute" && s.users.size() > BruteForceConfig::kUserCap) {
        run.status = "skipped";
        result.runs.push_back(run);
        continue;
      }
      try {
        const auto r = run_method(s, method, dopt);
        const auto m = evaluate(r.plan, s.users);
        run.num_uavs = r.plan.uavs.size();
        run.total_power_mw = r.plan.total_power_mw;
        run.coverage = m.coverage_probability;
        if (r.trace) run.iterations = r.trace->iterations.size();
        if (method == "ellipse") matched = run.num_uavs;
      } catch (const NoConvergence& e) {
        run.status = "no-convergence";
        run.iterations = e.trace().iterations.size();
        ++result.non_convergences;
      } catch (const InfeasibleBaseline&) {
        run.status = "infeasible";
      }
      result.runs.push_back(run);
    }
  }
  result.summary = summarize(result.runs, manifest.methods);
  json_io::write_file(manifest.out_dir / "runs.csv", runs_csv(result.runs));
  json_io::write_file(manifest.out_dir / "summary.csv", summary_csv(result.summary));
  for (const auto& s : result.summary)
    log << "sweep: " << s.method << ": " << s.runs << " runs, " << s.failures << " failures, mean power "
        << s.mean_power_mw << " mW, mean coverage " << s.mean_coverage << "\n";
  return result;
}

}  // namespace uavplan::cli
