// uavplan: generate PCP scenarios, plan UAV deployments, evaluate and sweep.

#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "uavplan/cli.hpp"

using namespace uavplan;
using namespace uavplan::cli;

namespace {

void add_overrides(CLI::App* cmd, Overrides& ov, bool with_seed = true) {
  cmd->add_option("--env", ov.env, "Propagation environment")
      ->check(CLI::IsMember({"suburban", "urban", "dense-urban", "high-rise"}));
  cmd->add_option("--bandwidth-hz", ov.bandwidth_hz, "Channel bandwidth in Hz")->check(CLI::PositiveNumber);
  cmd->add_option("--snr-threshold-db", ov.snr_threshold_db, "Minimum SNR in dB");
  cmd->add_option("--k-max", ov.k_max, "Largest cluster count tried per pass")->check(CLI::PositiveNumber);
  if (with_seed) cmd->add_option("--seed", ov.seed, "Clustering seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV placement by ellipse clustering"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only log errors");

  GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "Write PCP scenario files");
  g->add_option("--count", gen.count, "Number of scenarios")->capture_default_str();
  g->add_option("--seed", gen.seed, "Master seed")->capture_default_str();
  g->add_option("--out-dir", gen.out_dir, "Output directory")->capture_default_str();
  g->add_option("--width", gen.region.width, "Region width in m")->capture_default_str()->check(CLI::PositiveNumber);
  g->add_option("--height", gen.region.height, "Region height in m")->capture_default_str()->check(CLI::PositiveNumber);
  g->add_option("--parent-intensity", gen.pcp.parent_intensity, "PCP parents per m^2")->capture_default_str();
  g->add_option("--cluster-radius", gen.pcp.cluster_radius, "PCP cluster radius in m")->capture_default_str();
  g->add_option("--mean-daughters", gen.pcp.mean_daughters, "Mean users per PCP cluster")->capture_default_str();
  add_overrides(g, gen.overrides, false);

  DeployOptions dep;
  auto* d = app.add_subcommand("deploy", "Plan a deployment for one scenario");
  d->add_option("scenario", dep.scenario, "Scenario JSON file")->required();
  d->add_option("--method", dep.method, "Planner")
      ->check(CLI::IsMember({"ellipse", "circle", "brute"}))
      ->capture_default_str();
  d->add_option("--out-dir", dep.out_dir, "Output directory")->capture_default_str();
  d->add_option("--h-max", dep.h_max, "Altitude cap in m")->capture_default_str()->check(CLI::PositiveNumber);
  d->add_option("--num-uavs", dep.num_uavs, "UAV count (circle) or group limit (brute)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  d->add_option("--altitude", dep.circle_altitude, "Circle baseline altitude in m")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  d->add_option("--radius", dep.circle_radius, "Circle baseline radius in m (default: largest that fits)")
      ->check(CLI::PositiveNumber);
  add_overrides(d, dep.overrides);

  EvaluateOptions ev;
  auto* e = app.add_subcommand("evaluate", "Score a plan against its scenario");
  e->add_option("plan", ev.plan, "Plan JSON file")->required();
  e->add_option("scenario", ev.scenario, "Scenario JSON file")->required();
  e->add_option("--out-dir", ev.out_dir, "Output directory")->capture_default_str();

  SweepOptions sw;
  std::string manifest, scenario_dir, out_dir;
  auto* s = app.add_subcommand("sweep", "Run planners over many scenarios");
  auto* m_opt = s->add_option("--manifest", manifest, "Run manifest JSON");
  auto* dir_opt = s->add_option("--scenarios", scenario_dir, "Directory of scenario files");
  s->add_option("--method", sw.methods, "Planners to run, in order")
      ->check(CLI::IsMember({"ellipse", "circle", "brute"}))
      ->delimiter(',');
  s->add_option("--out-dir", out_dir, "Output directory");
  s->add_option("--h-max", sw.h_max, "Altitude cap in m")->capture_default_str()->check(CLI::PositiveNumber);
  s->add_option("--num-uavs", sw.num_uavs, "UAV count when no ellipse run gives one")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  add_overrides(s, sw.overrides);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kParseError;
  }

  std::ostringstream discard;
  std::ostream& log = quiet ? static_cast<std::ostream&>(discard) : std::cerr;

  if (g->parsed()) return run_command(log, [&] { cmd_generate(gen, log); });
  if (d->parsed()) return run_command(log, [&] { cmd_deploy(dep, log); });
  if (e->parsed()) return run_command(log, [&] { cmd_evaluate(ev, log); });

  if (m_opt->count() == 0 && dir_opt->count() == 0) {
    std::cerr << "error: sweep needs --manifest or --scenarios\n";
    return kParseError;
  }
  if (!manifest.empty()) sw.manifest = manifest;
  if (!scenario_dir.empty()) sw.scenario_dir = scenario_dir;
  if (!out_dir.empty()) sw.out_dir = out_dir;
  std::size_t failures = 0;
  const int code = run_command(log, [&] { failures = cmd_sweep(sw, log).non_convergences; });
  if (code != kOk) return code;
  if (failures > 0) {
    std::cerr << "error: " << failures << " scenarios did not converge\n";
    return kNoConvergence;
  }
  return kOk;
}
