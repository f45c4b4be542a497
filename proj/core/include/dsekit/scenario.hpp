#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dsekit/genmodel.hpp"
#include "dsekit/mixnoise.hpp"

namespace dsekit {

/// Which generator input a step event changes.
enum class InputField { tm, efd, vt };

/// Step change applied to one input field at a given time
/// (zero-order hold; takes effect at the first internal step with
/// t >= time).
struct StepEvent {
  double time;
  InputField field;
  double value;
};

/// Full description of one truth run: machine, operating point, step
/// events, sampling, and the measurement noise model.
struct ScenarioConfig {
  GeneratorParams params = GeneratorParams::demo_machine();
  GenInput initial_inputs{0.8, 2.4, 1.0};
  std::vector<StepEvent> events;
  double duration = 10.0;  // s
  int pmu_rate = 60;       // samples per second
  int substeps = 4;        // integrator substeps per PMU interval
  NoiseSpec noise{bimodal_default(), bimodal_default()};
  std::uint64_t seed = 42;
  bool allow_any_rate = false;  // lifts the {30, 60} PMU-rate check

  void validate() const;

  /// The default experiment: loaded 60 Hz machine, terminal voltage
  /// step 1.00 -> 1.05 at t = 3.5 s, 10 s at 60 SPS.
  static ScenarioConfig load_step_default();
};

/// One streamed sample: timestamp, noisy P/Q, clean terminal voltage.
struct PmuRecord {
  double t;
  double pt;
  double qt;
  double vt;
};

/// Noise-free reference trajectory sampled at the PMU rate.
struct TruthTrajectory {
  std::vector<double> times;
  std::vector<GenState> states;
  std::vector<Measurement> clean;  // measurement map at each tick
  std::vector<GenInput> inputs;    // effective inputs at each tick
};

/// Integrates the generator from the equilibrium of the initial inputs,
/// applying step events, and records state + clean measurement at every
/// PMU tick (duration 0 gives the single initial sample).
TruthTrajectory simulate_truth(const ScenarioConfig& cfg);

/// Adds independent mixture noise to the P/Q channels; vt is passed
/// through clean.
std::vector<PmuRecord> corrupt(const TruthTrajectory& traj,
                               const NoiseSpec& noise, RngStream& rng);

/// Record CSV: header `t,pt,qt,vt`, 17 significant digits, LF endings.
/// Round trips are bit-exact.
void write_records(const std::vector<PmuRecord>& records,
                   const std::filesystem::path& path);
std::vector<PmuRecord> read_records(const std::filesystem::path& path);

/// Truth-state CSV: header `t,delta,domega,eq_p,ed_p`, same encoding.
void write_states(const TruthTrajectory& traj,
                  const std::filesystem::path& path);
TruthTrajectory read_states(const std::filesystem::path& path);

}  // namespace dsekit
