#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "dsekit/harness.hpp"

namespace fs = std::filesystem;
using namespace dsekit;

namespace {

// Science parameters come from the config file; the environment may
// only redirect output.
fs::path resolve_out_dir(const std::string& cli_out) {
  const char* env = std::getenv("DSEKIT_OUT_DIR");
  fs::path dir = (env && *env) ? fs::path(env) : fs::path(cli_out);
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig load_config(const std::string& path, bool seed_set,
                             std::uint64_t seed) {
  ExperimentConfig cfg = load_experiment_config(path);
  if (seed_set) {
    cfg.seed = seed;
    cfg.scenario.seed = seed;
  }
  return cfg;
}

TruthTrajectory beliefs_as_states(const std::vector<double>& times,
                                  const std::vector<BeliefState>& beliefs) {
  TruthTrajectory out;
  out.times = times;
  for (const auto& b : beliefs) {
    out.states.push_back(GenState::from_vec(b.mean));
  }
  return out;
}

std::vector<BeliefState> states_as_beliefs(const TruthTrajectory& traj) {
  std::vector<BeliefState> out;
  for (const auto& s : traj.states) {
    out.push_back(BeliefState{s.vec(), Eigen::Matrix4d::Zero()});
  }
  return out;
}

int cmd_simulate(const std::string& config, const std::string& out,
                 bool seed_set, std::uint64_t seed) {
  const ExperimentConfig cfg = load_config(config, seed_set, seed);
  const fs::path dir = resolve_out_dir(out);

  const TruthTrajectory truth = simulate_truth(cfg.scenario);
  // Same derivation as trial 0 of `compare`, so `estimate` on these
  // records reproduces that trial.
  RngStream rng = RngStream(cfg.seed).substream(0);
  const auto records = corrupt(truth, cfg.scenario.noise, rng);

  write_records(records, dir / "records.csv");
  write_states(truth, dir / "states.csv");
  std::printf("wrote %zu records to %s\n", records.size(),
              (dir / "records.csv").c_str());
  return 0;
}

int cmd_estimate(const std::string& filter, const std::string& records_path,
                 const std::string& config, const std::string& out,
                 bool seed_set, std::uint64_t seed) {
  const ExperimentConfig cfg = load_config(config, seed_set, seed);
  const fs::path dir = resolve_out_dir(out);

  const auto records = read_records(records_path);
  const BeliefState prior = default_prior(cfg);
  const FilterKind kind =
      filter == "ukf" ? FilterKind::ukf : FilterKind::enkf;
  const FilterRunResult result = run_filter(
      records, kind, cfg, prior, RngStream(cfg.seed).substream(1));

  std::vector<double> times;
  for (const auto& r : records) {
    times.push_back(r.t);
  }
  const fs::path est_path = dir / ("est_" + filter + ".csv");
  write_states(beliefs_as_states(times, result.beliefs), est_path);

  double mean_ms = 0.0;
  for (double s : result.step_seconds) {
    mean_ms += s;
  }
  mean_ms = result.step_seconds.empty()
                ? 0.0
                : 1e3 * mean_ms / result.step_seconds.size();
  std::printf("wrote %zu estimates to %s (mean %.3f ms/step)\n",
              result.beliefs.size(), est_path.c_str(), mean_ms);
  return 0;
}

int cmd_compare(const std::string& config, const std::string& out,
                bool seed_set, std::uint64_t seed) {
  const ExperimentConfig cfg = load_config(config, seed_set, seed);
  const fs::path dir = resolve_out_dir(out);

  const MseReport report = run_experiment(cfg);
  emit_report(report, dir);

  // Figure analogues from the first trial.
  const TruthTrajectory truth = simulate_truth(cfg.scenario);
  RngStream trial_rng(cfg.seed);
  RngStream corrupt_rng = trial_rng.substream(0);
  const auto records = corrupt(truth, cfg.scenario.noise, corrupt_rng);
  const BeliefState prior = default_prior(cfg);
  const auto ukf_run =
      run_filter(records, FilterKind::ukf, cfg, prior, RngStream(0));
  const auto enkf_run = run_filter(records, FilterKind::enkf, cfg, prior,
                                   trial_rng.substream(1));
  emit_plots(truth, {{"ukf", ukf_run.beliefs}, {"enkf", enkf_run.beliefs}},
             dir);

  const char* names[4] = {"delta", "domega", "eq_p", "ed_p"};
  std::printf("%-8s %12s %12s %8s\n", "state", "ukf_mse", "enkf_mse",
              "ratio");
  for (int s = 0; s < 4; ++s) {
    std::printf("%-8s %12.4e %12.4e %8.2f\n", names[s], report.ukf_mse(s),
                report.enkf_mse(s), report.ukf_mse(s) / report.enkf_mse(s));
  }
  std::printf("timing: ukf mean %.3f ms p95 %.3f ms | enkf mean %.3f ms "
              "p95 %.3f ms\n",
              report.ukf_mean_ms, report.ukf_p95_ms, report.enkf_mean_ms,
              report.enkf_p95_ms);
  std::printf("reports in %s\n", dir.c_str());
  return 0;
}

int cmd_plot(const std::string& truth_path,
             const std::vector<std::string>& est_paths,
             const std::string& out) {
  const fs::path dir = resolve_out_dir(out);
  const TruthTrajectory truth = read_states(truth_path);

  std::vector<NamedEstimates> estimates;
  for (const auto& path : est_paths) {
    const TruthTrajectory est = read_states(path);
    if (est.times.size() != truth.times.size()) {
      throw LengthMismatch("estimate series " + path +
                           " not aligned with truth");
    }
    estimates.push_back({fs::path(path).stem().string(),
                         states_as_beliefs(est)});
  }
  emit_plots(truth, estimates, dir);
  std::printf("wrote plots to %s\n", dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "dsekit: synchronous-generator dynamic state estimation testbed\n"
      "(truth simulation, mixture-noise PMU corruption, UKF/EnKF "
      "comparison)"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  const auto* seed_opt =
      app.add_option("--seed", seed, "override the config file seed");

  std::string config, out = "out", filter = "ukf", records, truth;
  std::vector<std::string> ests;

  auto* simulate = app.add_subcommand(
      "simulate", "simulate truth and write a corrupted PMU record stream");
  simulate->add_option("--config", config, "config file")->required();
  simulate->add_option("--out", out, "output directory");

  auto* estimate = app.add_subcommand(
      "estimate", "run one filter over a record stream");
  estimate->add_option("--filter", filter, "ukf or enkf")
      ->check(CLI::IsMember({"ukf", "enkf"}))
      ->required();
  estimate->add_option("--records", records, "record CSV")->required();
  estimate->add_option("--config", config, "config file")->required();
  estimate->add_option("--out", out, "output directory");

  auto* compare = app.add_subcommand(
      "compare", "run the seeded multi-trial UKF vs EnKF comparison");
  compare->add_option("--config", config, "config file")->required();
  compare->add_option("--out", out, "output directory");

  auto* plot = app.add_subcommand("plot", "render truth/estimate SVG plots");
  plot->add_option("--truth", truth, "truth state CSV")->required();
  plot->add_option("--est", ests, "estimate CSVs")->required();
  plot->add_option("--out", out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    const bool seed_set = seed_opt->count() > 0;
    if (simulate->parsed()) {
      return cmd_simulate(config, out, seed_set, seed);
    }
    if (estimate->parsed()) {
      return cmd_estimate(filter, records, config, out, seed_set, seed);
    }
    if (compare->parsed()) {
      return cmd_compare(config, out, seed_set, seed);
    }
    if (plot->parsed()) {
      return cmd_plot(truth, ests, out);
    }
  } catch (const std::exception& e) {
    std::cerr << "dsekit: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
