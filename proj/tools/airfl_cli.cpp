// Command-line front end: optimize | simulate | verify | baseline | plot-data.
// All tabular output is CSV with header rows; every run directory gets a
// manifest with the resolved-config digest so reruns are verifiable.

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "airfl/csv.hpp"
#include "airfl/fl_sim.hpp"
#include "airfl/io.hpp"
#include "airfl/optimizer.hpp"
#include "airfl/scenario.hpp"
#include "airfl/verify.hpp"
#include "airfl/version.hpp"

namespace {

using airfl::CsvWriter;

struct LoadedRun {
  airfl::Scenario scenario;
  airfl::LearningTask task;
  nlohmann::json resolved;
};

LoadedRun load_run_config(const std::string& config_path, bool seed_given,
                          std::uint64_t seed_override) {
  const nlohmann::json root = airfl::load_config_json(config_path);
  LoadedRun run;
  nlohmann::json effective = root;
  if (seed_given) effective["seed"] = seed_override;
  run.scenario = airfl::scenario_from_json(effective);
  run.task = airfl::task_from_json(effective);
  run.resolved = airfl::scenario_to_json(run.scenario);
  if (effective.contains("learning")) run.resolved["learning"] = effective.at("learning");
  return run;
}

void write_run_manifest(const LoadedRun& run, const std::string& config_path,
                        const std::string& subcommand, const std::string& out_dir) {
  airfl::ensure_directory(out_dir);
  airfl::write_json(run.resolved, out_dir + "/config.json");
  airfl::RunManifest manifest;
  manifest.config_path = config_path;
  manifest.hash = airfl::scenario_hash(run.resolved);
  manifest.subcommand = subcommand;
  manifest.out_dir = out_dir;
  manifest.timestamp = airfl::utc_timestamp();
  airfl::write_manifest(manifest, out_dir + "/manifest.json");
}

void write_zeta_csv(const Eigen::VectorXd& zeta, const std::string& path) {
  CsvWriter csv(path, {"n", "zeta"});
  for (int n = 0; n < zeta.size(); ++n)
    csv.row({CsvWriter::cell(n + 1), CsvWriter::cell(zeta(n))});
}

void write_alpha_csv(const Eigen::MatrixXi& alpha, const std::string& path) {
  CsvWriter csv(path, {"m", "n", "alpha"});
  for (int m = 0; m < alpha.rows(); ++m)
    for (int n = 0; n < alpha.cols(); ++n)
      csv.row({CsvWriter::cell(m), CsvWriter::cell(n + 1),
               CsvWriter::cell(alpha(m, n))});
}

void write_trace_csv(const std::vector<airfl::TraceEntry>& trace,
                     const std::string& path) {
  CsvWriter csv(path, {"outer_iter", "objective", "max_constraint_violation",
                       "zeta_norm"});
  for (const auto& e : trace)
    csv.row({CsvWriter::cell(e.outer_iter), CsvWriter::cell(e.objective),
             CsvWriter::cell(e.max_constraint_violation),
             CsvWriter::cell(e.zeta_norm)});
}

int cmd_optimize(const std::string& config_path, const std::string& out_dir,
                 bool seed_given, std::uint64_t seed) {
  const LoadedRun run = load_run_config(config_path, seed_given, seed);
  const airfl::Scenario& sc = run.scenario;

  const airfl::FlContext ctx =
      airfl::build_fl_context(run.task, sc.num_devices(), sc.seed);
  const Eigen::VectorXd w0 = airfl::initial_model(ctx, sc.seed);
  const airfl::RoundStatistics stats = airfl::round_statistics(
      ctx, w0, airfl::derive_seed(sc.seed, 0x70726f6265ULL));

  const airfl::Trajectory init = airfl::initial_trajectory(sc);
  const Eigen::VectorXd init_zeta = airfl::optimal_zeta(
      airfl::gain_matrix(init, sc), stats.rho, stats.upsilon,
      sc.channel.noise_power, sc.channel.noise_power == 0.0);
  const airfl::OptimizationResult result =
      airfl::optimize_alternating(sc, stats.rho, stats.upsilon, init, init_zeta);

  write_run_manifest(run, config_path, "optimize", out_dir);
  airfl::export_trajectory_csv(result.trajectory, out_dir + "/trajectory.csv");
  write_zeta_csv(result.zeta, out_dir + "/zeta.csv");
  write_trace_csv(result.trace, out_dir + "/trace.csv");
  write_alpha_csv(result.alpha, out_dir + "/alpha.csv");
  nlohmann::json summary;
  summary["converged"] = result.converged;
  summary["iterations"] = result.iterations;
  summary["relaxed_objective_per_dim"] = result.relaxed_objective;
  summary["rounded_mse_per_dim"] = result.rounded_mse_per_dim;
  airfl::write_json(summary, out_dir + "/summary.json");

  std::cout << "optimize: " << result.iterations << " outer iterations, "
            << (result.converged ? "converged" : "budget exhausted")
            << ", rounded per-dimension MSE "
            << airfl::format_double(result.rounded_mse_per_dim) << "\n";
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 const std::string& schemes_arg, int rounds_override,
                 int trials, bool seed_given, std::uint64_t seed) {
  LoadedRun run = load_run_config(config_path, seed_given, seed);
  if (rounds_override >= 0) run.task.rounds = rounds_override;
  run.task.validate();

  std::vector<airfl::Scheme> schemes;
  std::stringstream ss(schemes_arg);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) schemes.push_back(airfl::scheme_from_name(item));
  airfl::require(!schemes.empty(), "simulate: no schemes given");

  const airfl::ExperimentReport report =
      airfl::run_experiment(run.scenario, run.task, schemes, trials);

  write_run_manifest(run, config_path, "simulate", out_dir);
  airfl::write_round_logs_csv(report.logs, out_dir + "/rounds.csv");
  {
    CsvWriter csv(out_dir + "/accuracy_summary.csv",
                  {"round", "scheme", "mean_accuracy", "std_accuracy"});
    for (std::size_t si = 0; si < report.schemes.size(); ++si)
      for (int r = 0; r < report.rounds; ++r)
        csv.row({CsvWriter::cell(r), airfl::scheme_name(report.schemes[si]),
                 CsvWriter::cell(report.mean_accuracy[si][static_cast<std::size_t>(r)]),
                 CsvWriter::cell(report.std_accuracy[si][static_cast<std::size_t>(r)])});
  }
  for (std::size_t si = 0; si < report.schemes.size(); ++si) {
    std::cout << "simulate: " << airfl::scheme_name(report.schemes[si])
              << " final mean accuracy "
              << airfl::format_double(report.mean_accuracy[si].back()) << "\n";
  }
  return 0;
}

int cmd_verify(const std::string& config_path, const std::string& out_dir,
               int trials, bool seed_given, std::uint64_t seed) {
  const LoadedRun run = load_run_config(config_path, seed_given, seed);
  airfl::VerifyOptions opt;
  opt.mc_trials = trials;
  opt.seed = run.scenario.seed;
  const std::vector<airfl::CheckResult> checks =
      airfl::run_verification(run.scenario, opt);

  bool all_passed = true;
  for (const auto& check : checks) {
    all_passed = all_passed && check.passed;
    std::cout << (check.passed ? "[PASS] " : "[FAIL] ") << check.name
              << "  worst " << airfl::format_double(check.worst) << " vs limit "
              << airfl::format_double(check.limit);
    if (!check.detail.empty()) std::cout << "  (" << check.detail << ")";
    std::cout << "\n";
  }
  if (!out_dir.empty()) {
    write_run_manifest(run, config_path, "verify", out_dir);
    CsvWriter csv(out_dir + "/verify_report.csv",
                  {"check", "passed", "worst", "limit"});
    for (const auto& check : checks)
      csv.row({check.name, CsvWriter::cell(check.passed ? 1 : 0),
               CsvWriter::cell(check.worst), CsvWriter::cell(check.limit)});
  }
  return all_passed ? 0 : 1;
}

int cmd_baseline(const std::string& config_path, const std::string& out_dir,
                 bool seed_given, std::uint64_t seed) {
  const LoadedRun run = load_run_config(config_path, seed_given, seed);
  const airfl::Scenario& sc = run.scenario;

  const airfl::FlContext ctx =
      airfl::build_fl_context(run.task, sc.num_devices(), sc.seed);
  const Eigen::VectorXd w0 = airfl::initial_model(ctx, sc.seed);
  const airfl::RoundStatistics stats = airfl::round_statistics(
      ctx, w0, airfl::derive_seed(sc.seed, 0x70726f6265ULL));

  const airfl::Vec2 center = airfl::barycenter(sc.devices, sc.weights);
  const airfl::CircularBaseline circ =
      airfl::tuned_circular_trajectory(sc, stats.rho, stats.upsilon);
  const airfl::StaticPsBaseline ps = airfl::static_ps_baseline(sc);
  const Eigen::VectorXd ps_zeta =
      airfl::optimal_zeta(ps.gains, stats.rho, stats.upsilon,
                          sc.channel.noise_power, sc.channel.noise_power == 0.0);
  const double ps_mse = airfl::aggregation_objective(
      ps.gains, ps_zeta, stats.rho, stats.upsilon, sc.channel.noise_power);

  write_run_manifest(run, config_path, "baseline", out_dir);
  airfl::export_trajectory_csv(circ.trajectory, out_dir + "/trajectory.csv");
  write_zeta_csv(circ.zeta, out_dir + "/zeta.csv");
  nlohmann::json summary;
  summary["barycenter"] = {center.x(), center.y()};
  summary["circular"] = {{"center", {circ.center.x(), circ.center.y()}},
                         {"radius", circ.radius},
                         {"mse_per_dim", circ.mse_per_dim}};
  summary["static_ps"] = {{"position", {ps.position.x(), ps.position.y()}},
                          {"mse_per_dim", ps_mse}};
  airfl::write_json(summary, out_dir + "/baselines.json");

  std::cout << "baseline: barycenter (" << airfl::format_double(center.x()) << ", "
            << airfl::format_double(center.y()) << "), tuned circle radius "
            << airfl::format_double(circ.radius) << " m, per-dimension MSE "
            << airfl::format_double(circ.mse_per_dim) << " (static PS "
            << airfl::format_double(ps_mse) << ")\n";
  return 0;
}

// Re-shapes previously written run outputs for plotting; reads only files in
// the given run directories (no recomputation).
int cmd_plot_data(const std::vector<std::string>& run_dirs,
                  const std::string& out_dir) {
  airfl::require(!run_dirs.empty(), "plot-data: at least one --run required");
  airfl::ensure_directory(out_dir);

  CsvWriter traj_csv(out_dir + "/plot_trajectory.csv",
                     {"kind", "label", "idx", "x", "y"});
  bool devices_written = false;
  for (const auto& dir : run_dirs) {
    const std::string label = std::filesystem::path(dir).filename().string();
    const std::string config_path = dir + "/config.json";
    if (!devices_written && std::filesystem::exists(config_path)) {
      const nlohmann::json cfg = airfl::load_config_json(config_path);
      const auto& positions = cfg.at("devices").at("positions");
      for (std::size_t i = 0; i < positions.size(); ++i)
        traj_csv.row({"device", label, CsvWriter::cell(i),
                      CsvWriter::cell(positions[i][0].get<double>()),
                      CsvWriter::cell(positions[i][1].get<double>())});
      if (cfg.contains("uav") && cfg.at("uav").contains("start")) {
        traj_csv.row({"start", label, CsvWriter::cell(0),
                      CsvWriter::cell(cfg.at("uav").at("start")[0].get<double>()),
                      CsvWriter::cell(cfg.at("uav").at("start")[1].get<double>())});
      }
      devices_written = true;
    }
    const std::string traj_path = dir + "/trajectory.csv";
    if (std::filesystem::exists(traj_path)) {
      const airfl::Trajectory traj = airfl::import_trajectory_csv(traj_path);
      for (std::size_t n = 0; n < traj.points.size(); ++n)
        traj_csv.row({"path", label, CsvWriter::cell(n),
                      CsvWriter::cell(traj.points[n].x()),
                      CsvWriter::cell(traj.points[n].y())});
    }
  }

  CsvWriter acc_csv(out_dir + "/plot_accuracy.csv",
                    {"label", "round", "scheme", "mean_accuracy", "std_accuracy"});
  for (const auto& dir : run_dirs) {
    const std::string label = std::filesystem::path(dir).filename().string();
    const std::string path = dir + "/accuracy_summary.csv";
    if (!std::filesystem::exists(path)) continue;
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      acc_csv.row({label, line});  // row is already round,scheme,mean,std
    }
  }
  std::cout << "plot-data: wrote plot_trajectory.csv and plot_accuracy.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV-assisted over-the-air federated learning simulator/optimizer"};
  app.set_version_flag("--version", airfl::kVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir, schemes = "error-free,optimized";
  std::vector<std::string> run_dirs;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int trials = 10, mc_trials = 10000, rounds_override = -1;

  const auto add_common = [&](CLI::App* cmd, bool need_out) {
    cmd->add_option("--config", config_path, "config file (JSON)")->required();
    auto* out = cmd->add_option("--out", out_dir, "output directory");
    if (need_out) out->required();
    cmd->add_option("--seed", seed, "override the config seed")
        ->each([&](const std::string&) { seed_given = true; });
  };

  auto* optimize = app.add_subcommand("optimize", "run the trajectory optimizer");
  add_common(optimize, true);

  auto* simulate = app.add_subcommand("simulate", "run the FL experiment");
  add_common(simulate, true);
  simulate->add_option("--schemes", schemes, "comma-separated scheme list");
  simulate->add_option("--rounds", rounds_override, "override training rounds");
  simulate->add_option("--trials", trials, "Monte Carlo trials");

  auto* verify = app.add_subcommand("verify", "run the oracle checks");
  verify->add_option("--config", config_path, "config file (JSON)")->required();
  verify->add_option("--out", out_dir, "optional output directory");
  verify->add_option("--seed", seed, "override the config seed")
      ->each([&](const std::string&) { seed_given = true; });
  verify->add_option("--trials", mc_trials, "Monte Carlo trials per instance");

  auto* baseline = app.add_subcommand("baseline", "compute baseline geometries");
  add_common(baseline, true);

  auto* plot = app.add_subcommand("plot-data", "reshape run outputs for plotting");
  plot->add_option("--run", run_dirs, "run directory (repeatable)")->required();
  plot->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(optimize))
      return cmd_optimize(config_path, out_dir, seed_given, seed);
    if (app.got_subcommand(simulate))
      return cmd_simulate(config_path, out_dir, schemes, rounds_override, trials,
                          seed_given, seed);
    if (app.got_subcommand(verify))
      return cmd_verify(config_path, out_dir, mc_trials, seed_given, seed);
    if (app.got_subcommand(baseline))
      return cmd_baseline(config_path, out_dir, seed_given, seed);
    if (app.got_subcommand(plot)) return cmd_plot_data(run_dirs, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
