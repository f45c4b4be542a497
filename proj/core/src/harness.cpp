#include "dsekit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "dsekit/svg.hpp"

namespace dsekit {

std::string to_string(FilterKind kind) {
  return kind == FilterKind::ukf ? "ukf" : "enkf";
}

void ExperimentConfig::validate() const {
  scenario.validate();
  ukf.validate(4);
  enkf.validate();
  if (trials < 1) {
    throw std::invalid_argument("ExperimentConfig: trials must be >= 1");
  }
  if (!(warmup >= 0.0)) {
    throw std::invalid_argument("ExperimentConfig: warmup must be >= 0");
  }
  if (min_eigenvalue(prior_cov) < 0.0) {
    throw std::invalid_argument("ExperimentConfig: prior_cov must be PSD");
  }
  for (const auto* m : {&ukf.process_cov, &ukf.meas_cov, &enkf.process_cov,
                        &enkf.meas_cov}) {
    if (min_eigenvalue(*m) < 0.0) {
      throw std::invalid_argument(
          "ExperimentConfig: filter noise covariances must be PSD");
    }
  }
}

namespace {

Eigen::MatrixXd diag_from(const std::vector<double>& d, std::size_t n,
                          const char* key) {
  if (d.size() != n) {
    throw std::invalid_argument(std::string("config key '") + key +
                                "': expected " + std::to_string(n) +
                                " diagonal entries");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    v(static_cast<Eigen::Index>(i)) = d[i];
  }
  return v.asDiagonal();
}

GaussianMixture mixture_from_config(const ConfigMap& cfg,
                                    const std::string& prefix) {
  std::vector<GaussianComponent> comps;
  for (int k = 1;; ++k) {
    const std::string key = prefix + "." + std::to_string(k);
    if (!cfg.has(key)) {
      break;
    }
    const auto triple = cfg.get_doubles(key, {});
    if (triple.size() != 3) {
      throw ParseError("key '" + key + "': expected 'weight mean variance'",
                       cfg.line_of(key));
    }
    comps.push_back({triple[0], triple[1], triple[2]});
  }
  if (comps.empty()) {
    return bimodal_default();
  }
  return GaussianMixture(comps);
}

InputField field_from_string(const std::string& s, int line) {
  if (s == "tm") return InputField::tm;
  if (s == "efd") return InputField::efd;
  if (s == "vt") return InputField::vt;
  throw ParseError("event field must be tm, efd or vt, got '" + s + "'", line);
}

}  // namespace

ExperimentConfig experiment_from_config(const ConfigMap& cfg) {
  ExperimentConfig ec;

  // Machine constants; frequency comes in as Hz.
  GeneratorParams& g = ec.scenario.params;
  const double f0 = cfg.get_double("gen.f0", 60.0);
  g.omega0 = 2.0 * std::numbers::pi * f0;
  g.inertia_j = cfg.get_double("gen.inertia_j", g.inertia_j);
  g.damping_d = cfg.get_double("gen.damping_d", g.damping_d);
  g.xd = cfg.get_double("gen.xd", g.xd);
  g.xq = cfg.get_double("gen.xq", g.xq);
  g.xd_p = cfg.get_double("gen.xd_p", g.xd_p);
  g.xq_p = cfg.get_double("gen.xq_p", g.xq_p);
  g.td0_p = cfg.get_double("gen.td0_p", g.td0_p);
  g.tq0_p = cfg.get_double("gen.tq0_p", g.tq0_p);

  ScenarioConfig& sc = ec.scenario;
  sc.initial_inputs.tm = cfg.get_double("scenario.tm", sc.initial_inputs.tm);
  sc.initial_inputs.efd = cfg.get_double("scenario.efd", sc.initial_inputs.efd);
  sc.initial_inputs.vt = cfg.get_double("scenario.vt", sc.initial_inputs.vt);
  sc.duration = cfg.get_double("scenario.duration", sc.duration);
  sc.pmu_rate = cfg.get_int("scenario.pmu_rate", sc.pmu_rate);
  sc.substeps = cfg.get_int("scenario.substeps", sc.substeps);
  sc.allow_any_rate = cfg.get_bool("scenario.allow_any_rate", false);

  bool events_in_config = cfg.has("scenario.event.1.time");
  if (events_in_config) {
    sc.events.clear();
    for (int k = 1;; ++k) {
      const std::string base = "scenario.event." + std::to_string(k);
      if (!cfg.has(base + ".time")) {
        break;
      }
      StepEvent ev;
      ev.time = cfg.get_double(base + ".time", 0.0);
      ev.field = field_from_string(cfg.get_string(base + ".field", ""),
                                   cfg.line_of(base + ".field"));
      ev.value = cfg.get_double(base + ".value", 0.0);
      sc.events.push_back(ev);
    }
  }

  sc.noise = NoiseSpec{mixture_from_config(cfg, "noise.pt"),
                       mixture_from_config(cfg, "noise.qt")};

  ec.ukf.alpha = cfg.get_double("ukf.alpha", ec.ukf.alpha);
  ec.ukf.beta = cfg.get_double("ukf.beta", ec.ukf.beta);
  ec.ukf.kappa = cfg.get_double("ukf.kappa", ec.ukf.kappa);
  ec.ukf.process_cov = diag_from(
      cfg.get_doubles("ukf.q", {1e-8, 1e-8, 1e-8, 1e-8}), 4, "ukf.q");
  ec.ukf.meas_cov =
      diag_from(cfg.get_doubles("ukf.r", {1.9e-4, 1.9e-4}), 2, "ukf.r");

  ec.enkf.ensemble_size =
      cfg.get_int("enkf.ensemble_size", ec.enkf.ensemble_size);
  ec.enkf.process_cov = diag_from(
      cfg.get_doubles("enkf.q", {1e-8, 1e-8, 1e-8, 1e-8}), 4, "enkf.q");
  ec.enkf.meas_cov =
      diag_from(cfg.get_doubles("enkf.r", {1.9e-4, 1.9e-4}), 2, "enkf.r");
  ec.enkf.inflation = cfg.get_double("enkf.inflation", ec.enkf.inflation);

  ec.trials = cfg.get_int("experiment.trials", ec.trials);
  ec.warmup = cfg.get_double("experiment.warmup", ec.warmup);
  ec.seed = cfg.get_u64("experiment.seed", ec.seed);
  ec.threads = cfg.get_int("experiment.threads", ec.threads);
  {
    const auto off = cfg.get_doubles("experiment.prior_offset",
                                     {0.1, 0.001, 0.05, 0.05});
    if (off.size() != 4) {
      throw std::invalid_argument(
          "config key 'experiment.prior_offset': expected 4 entries");
    }
    ec.prior_mean_offset = Eigen::Vector4d(off[0], off[1], off[2], off[3]);
  }
  ec.prior_cov =
      diag_from(cfg.get_doubles("experiment.prior_cov",
                                {1e-2, 1e-4, 1e-2, 1e-2}),
                4, "experiment.prior_cov");

  sc.seed = ec.seed;

  const auto unread = cfg.unread_keys();
  if (!unread.empty()) {
    throw ParseError("unknown config key '" + unread.front().first + "'",
                     unread.front().second);
  }

  ec.validate();
  return ec;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return experiment_from_config(ConfigMap::load(path));
}

BeliefState default_prior(const ExperimentConfig& cfg) {
  const GenState eq =
      find_equilibrium(cfg.scenario.initial_inputs, cfg.scenario.params);
  BeliefState prior;
  prior.mean = eq.vec() + cfg.prior_mean_offset;
  prior.cov = cfg.prior_cov;
  return prior;
}

namespace {

bool exactly_symmetric(const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      if (m(i, j) != m(j, i)) {
        return false;
      }
    }
  }
  return true;
}

std::uint64_t checksum_records(const std::vector<PmuRecord>& records) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffULL;
      h *= 1099511628211ULL;
    }
  };
  for (const auto& r : records) {
    mix(r.t);
    mix(r.pt);
    mix(r.qt);
    mix(r.vt);
  }
  return h;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double percentile95(std::vector<double> v) {
  if (v.empty()) {
    return 0.0;
  }
  const std::size_t idx =
      static_cast<std::size_t>(std::ceil(0.95 * v.size())) - 1;
  std::nth_element(v.begin(), v.begin() + idx, v.end());
  return v[idx];
}

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

constexpr const char* kStateNames[4] = {"delta", "domega", "eq_p", "ed_p"};

}  // namespace

FilterRunResult run_filter(const std::vector<PmuRecord>& records,
                           FilterKind kind, const ExperimentConfig& cfg,
                           const BeliefState& prior, RngStream rng) {
  using clock = std::chrono::steady_clock;

  FilterRunResult result;
  result.beliefs.reserve(records.size());
  result.step_seconds.reserve(records.size());
  result.min_cov_eigenvalue = std::numeric_limits<double>::infinity();
  result.covariances_symmetric = true;

  const double dt = 1.0 / cfg.scenario.pmu_rate;
  const int substeps = cfg.scenario.substeps;
  const GeneratorParams& p = cfg.scenario.params;
  const GenInput base = cfg.scenario.initial_inputs;

  BeliefState belief = prior;
  Ensemble ensemble{Eigen::MatrixXd(), RngStream(0)};
  if (kind == FilterKind::enkf) {
    ensemble = enkf_init(prior, cfg.enkf, std::move(rng));
  }

  for (std::size_t k = 0; k < records.size(); ++k) {
    const PmuRecord& rec = records[k];
    // Zero-order hold: the voltage in force over [t_{k-1}, t_k) is the
    // previous record's; the update map sees the voltage sampled with
    // the measurement itself.
    GenInput u_hold = base;
    u_hold.vt = k > 0 ? records[k - 1].vt : rec.vt;
    GenInput u_meas = base;
    u_meas.vt = rec.vt;
    const Measurement y{rec.pt, rec.qt};

    const auto t0 = clock::now();
    try {
      if (kind == FilterKind::ukf) {
        if (k > 0) {
          belief = ukf_predict(belief, u_hold, p, cfg.ukf, dt, substeps);
        }
        belief = ukf_update(belief, y, u_meas, p, cfg.ukf);
      } else {
        if (k > 0) {
          enkf_predict(ensemble, u_hold, p, cfg.enkf, dt, substeps);
        }
        enkf_update(ensemble, y, u_meas, p, cfg.enkf);
        belief = ensemble_stats(ensemble);
      }
    } catch (const std::exception& err) {
      throw std::runtime_error(to_string(kind) + " failed at record " +
                               std::to_string(k) + " (t=" +
                               std::to_string(rec.t) + "): " + err.what());
    }
    const auto t1 = clock::now();

    result.step_seconds.push_back(
        std::chrono::duration<double>(t1 - t0).count());
    result.beliefs.push_back(belief);
    result.covariances_symmetric =
        result.covariances_symmetric && exactly_symmetric(belief.cov);
    result.min_cov_eigenvalue =
        std::min(result.min_cov_eigenvalue, min_eigenvalue(belief.cov));
  }
  return result;
}

Eigen::Vector4d mse(const std::vector<BeliefState>& estimates,
                    const TruthTrajectory& truth, double warmup) {
  if (estimates.size() != truth.times.size()) {
    throw LengthMismatch("mse: estimates (" +
                         std::to_string(estimates.size()) +
                         ") and truth (" + std::to_string(truth.times.size()) +
                         ") differ in length");
  }
  Eigen::Vector4d acc = Eigen::Vector4d::Zero();
  std::size_t count = 0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (truth.times[i] < warmup) {
      continue;
    }
    const Eigen::Vector4d err =
        estimates[i].mean - truth.states[i].vec();
    acc += err.cwiseProduct(err);
    ++count;
  }
  if (count == 0) {
    throw std::invalid_argument("mse: warmup excludes every tick");
  }
  return acc / static_cast<double>(count);
}

namespace {

struct TrialOutcome {
  Eigen::Vector4d ukf_mse;
  Eigen::Vector4d enkf_mse;
  std::vector<double> ukf_steps;
  std::vector<double> enkf_steps;
  double min_eig;
  bool symmetric;
};

}  // namespace

MseReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();

  const TruthTrajectory truth = simulate_truth(cfg.scenario);
  const BeliefState prior = default_prior(cfg);

  std::vector<TrialOutcome> outcomes(cfg.trials);
  std::atomic<int> next_trial{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    for (;;) {
      const int trial = next_trial.fetch_add(1);
      if (trial >= cfg.trials) {
        return;
      }
      try {
        RngStream trial_rng(cfg.seed + static_cast<std::uint64_t>(trial));
        RngStream corrupt_rng = trial_rng.substream(0);
        const std::vector<PmuRecord> records =
            corrupt(truth, cfg.scenario.noise, corrupt_rng);

        // Both filters must see the identical stream.
        const std::uint64_t stream_sum = checksum_records(records);
        FilterRunResult ukf_run =
            run_filter(records, FilterKind::ukf, cfg, prior, RngStream(0));
        if (checksum_records(records) != stream_sum) {
          throw std::logic_error("record stream mutated during ukf run");
        }
        FilterRunResult enkf_run = run_filter(
            records, FilterKind::enkf, cfg, prior, trial_rng.substream(1));
        if (checksum_records(records) != stream_sum) {
          throw std::logic_error("record stream mutated during enkf run");
        }

        TrialOutcome& out = outcomes[trial];
        out.ukf_mse = mse(ukf_run.beliefs, truth, cfg.warmup);
        out.enkf_mse = mse(enkf_run.beliefs, truth, cfg.warmup);
        out.ukf_steps = std::move(ukf_run.step_seconds);
        out.enkf_steps = std::move(enkf_run.step_seconds);
        out.min_eig = std::min(ukf_run.min_cov_eigenvalue,
                               enkf_run.min_cov_eigenvalue);
        out.symmetric = ukf_run.covariances_symmetric &&
                        enkf_run.covariances_symmetric;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) {
          first_error = std::make_exception_ptr(std::runtime_error(
              "trial " + std::to_string(trial) + " failed: " + e.what()));
        }
        return;
      }
    }
  };

  int width = cfg.threads > 0
                  ? cfg.threads
                  : static_cast<int>(std::thread::hardware_concurrency());
  width = std::max(1, std::min(width, cfg.trials));

  if (width == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(width);
    for (int i = 0; i < width; ++i) {
      pool.emplace_back(worker);
    }
    for (auto& t : pool) {
      t.join();
    }
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }

  MseReport report;
  report.trials = cfg.trials;
  report.seed = cfg.seed;
  report.min_cov_eigenvalue = std::numeric_limits<double>::infinity();
  report.covariances_symmetric = true;

  std::vector<double> ukf_steps, enkf_steps;
  for (int s = 0; s < 4; ++s) {
    std::vector<double> u_vals, e_vals;
    u_vals.reserve(cfg.trials);
    e_vals.reserve(cfg.trials);
    for (const auto& out : outcomes) {
      u_vals.push_back(out.ukf_mse(s));
      e_vals.push_back(out.enkf_mse(s));
    }
    report.ukf_mse(s) = median(u_vals);
    report.enkf_mse(s) = median(e_vals);
  }
  for (const auto& out : outcomes) {
    ukf_steps.insert(ukf_steps.end(), out.ukf_steps.begin(),
                     out.ukf_steps.end());
    enkf_steps.insert(enkf_steps.end(), out.enkf_steps.begin(),
                      out.enkf_steps.end());
    report.min_cov_eigenvalue =
        std::min(report.min_cov_eigenvalue, out.min_eig);
    report.covariances_symmetric =
        report.covariances_symmetric && out.symmetric;
  }

  auto mean_of = [](const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) {
      acc += x;
    }
    return v.empty() ? 0.0 : acc / v.size();
  };
  report.ukf_mean_ms = 1e3 * mean_of(ukf_steps);
  report.enkf_mean_ms = 1e3 * mean_of(enkf_steps);
  report.ukf_p95_ms = 1e3 * percentile95(std::move(ukf_steps));
  report.enkf_p95_ms = 1e3 * percentile95(std::move(enkf_steps));
  return report;
}

void emit_report(const MseReport& report, const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("output directory does not exist: " + dir.string());
  }

  {
    std::ofstream out(dir / "mse.csv", std::ios::binary);
    if (!out) {
      throw IoError("cannot open for writing: " + (dir / "mse.csv").string());
    }
    out << "filter,state,mse,trials,seed\n";
    for (int s = 0; s < 4; ++s) {
      out << "ukf," << kStateNames[s] << ',' << format_g17(report.ukf_mse(s))
          << ',' << report.trials << ',' << report.seed << '\n';
    }
    for (int s = 0; s < 4; ++s) {
      out << "enkf," << kStateNames[s] << ','
          << format_g17(report.enkf_mse(s)) << ',' << report.trials << ','
          << report.seed << '\n';
    }
    if (!out) {
      throw IoError("write failed: " + (dir / "mse.csv").string());
    }
  }
  {
    std::ofstream out(dir / "timing.csv", std::ios::binary);
    if (!out) {
      throw IoError("cannot open for writing: " +
                    (dir / "timing.csv").string());
    }
    out << "filter,mean_ms,p95_ms\n";
    out << "ukf," << format_g17(report.ukf_mean_ms) << ','
        << format_g17(report.ukf_p95_ms) << '\n';
    out << "enkf," << format_g17(report.enkf_mean_ms) << ','
        << format_g17(report.enkf_p95_ms) << '\n';
    if (!out) {
      throw IoError("write failed: " + (dir / "timing.csv").string());
    }
  }
}

void emit_plots(const TruthTrajectory& truth,
                const std::vector<NamedEstimates>& estimates,
                const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("output directory does not exist: " + dir.string());
  }
  for (const auto& est : estimates) {
    if (est.beliefs.size() != truth.times.size()) {
      throw LengthMismatch("emit_plots: series '" + est.label +
                           "' not aligned with truth");
    }
  }

  const char* kColors[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd"};
  for (int s = 0; s < 4; ++s) {
    std::vector<PlotSeries> overlay;
    PlotSeries truth_series{"truth", "black", truth.times, {}};
    truth_series.y.reserve(truth.times.size());
    for (const auto& st : truth.states) {
      truth_series.y.push_back(st.vec()(s));
    }
    overlay.push_back(std::move(truth_series));

    std::vector<PlotSeries> errors;
    for (std::size_t f = 0; f < estimates.size(); ++f) {
      PlotSeries est_series{estimates[f].label, kColors[f % 4], truth.times,
                            {}};
      PlotSeries err_series{estimates[f].label, kColors[f % 4], truth.times,
                            {}};
      est_series.y.reserve(truth.times.size());
      err_series.y.reserve(truth.times.size());
      for (std::size_t i = 0; i < truth.times.size(); ++i) {
        const double v = estimates[f].beliefs[i].mean(s);
        const double e = v - truth.states[i].vec()(s);
        est_series.y.push_back(v);
        err_series.y.push_back(e * e);
      }
      overlay.push_back(std::move(est_series));
      errors.push_back(std::move(err_series));
    }

    const std::string name = kStateNames[s];
    write_line_svg(dir / ("est_" + name + ".svg"),
                   "state " + name + ": truth vs estimates", "time [s]",
                   name, overlay);
    write_line_svg(dir / ("err_" + name + ".svg"),
                   "state " + name + ": squared error", "time [s]",
                   "squared error", errors, /*log_y=*/true);
  }
}

}  // namespace dsekit
