#include "dsekit/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace dsekit {

void ScenarioConfig::validate() const {
  params.validate();
  if (!(initial_inputs.vt > 0.0)) {
    throw std::invalid_argument("ScenarioConfig: initial vt must be > 0");
  }
  if (!(duration >= 0.0) || !std::isfinite(duration)) {
    throw std::invalid_argument("ScenarioConfig: duration must be >= 0");
  }
  if (!allow_any_rate && pmu_rate != 30 && pmu_rate != 60) {
    throw std::invalid_argument(
        "ScenarioConfig: pmu_rate must be 30 or 60 (set allow_any_rate to "
        "override)");
  }
  if (pmu_rate < 1 || substeps < 1) {
    throw std::invalid_argument(
        "ScenarioConfig: pmu_rate and substeps must be >= 1");
  }
  double prev = -1.0;
  for (const auto& ev : events) {
    if (!(ev.time > prev)) {
      throw std::invalid_argument(
          "ScenarioConfig: event times must be strictly increasing");
    }
    if (ev.time < 0.0 || ev.time > duration) {
      throw std::invalid_argument(
          "ScenarioConfig: event time outside [0, duration]");
    }
    if (!std::isfinite(ev.value)) {
      throw std::invalid_argument("ScenarioConfig: event value not finite");
    }
    if (ev.field == InputField::vt && !(ev.value > 0.0)) {
      throw std::invalid_argument("ScenarioConfig: vt event must stay > 0");
    }
    prev = ev.time;
  }
}

ScenarioConfig ScenarioConfig::load_step_default() {
  ScenarioConfig cfg;
  cfg.events = {{3.5, InputField::vt, 1.05}};
  return cfg;
}

namespace {

void apply_event(GenInput& u, const StepEvent& ev) {
  switch (ev.field) {
    case InputField::tm:
      u.tm = ev.value;
      break;
    case InputField::efd:
      u.efd = ev.value;
      break;
    case InputField::vt:
      u.vt = ev.value;
      break;
  }
}

}  // namespace

TruthTrajectory simulate_truth(const ScenarioConfig& cfg) {
  cfg.validate();

  const int ticks = static_cast<int>(std::llround(cfg.duration * cfg.pmu_rate));
  const double sub_dt = 1.0 / (static_cast<double>(cfg.pmu_rate) * cfg.substeps);

  GenInput u = cfg.initial_inputs;
  std::size_t next_event = 0;
  auto apply_events_up_to = [&](double t) {
    while (next_event < cfg.events.size() && cfg.events[next_event].time <= t) {
      apply_event(u, cfg.events[next_event]);
      ++next_event;
    }
  };

  GenState state = find_equilibrium(cfg.initial_inputs, cfg.params);

  TruthTrajectory traj;
  traj.times.reserve(ticks + 1);
  traj.states.reserve(ticks + 1);
  traj.clean.reserve(ticks + 1);
  traj.inputs.reserve(ticks + 1);

  apply_events_up_to(0.0);
  traj.times.push_back(0.0);
  traj.states.push_back(state);
  traj.clean.push_back(measure(state, u, cfg.params));
  traj.inputs.push_back(u);

  bool warned_eq_p = false;
  for (int k = 1; k <= ticks; ++k) {
    for (int j = 0; j < cfg.substeps; ++j) {
      const double t_sub =
          static_cast<double>((k - 1) * cfg.substeps + j) /
          (static_cast<double>(cfg.pmu_rate) * cfg.substeps);
      apply_events_up_to(t_sub);
      state = step_rk4(state, u, cfg.params, sub_dt, 1);
    }
    const double t_k = static_cast<double>(k) / cfg.pmu_rate;
    apply_events_up_to(t_k);
    if (state.eq_p <= 0.0 && !warned_eq_p) {
      std::fprintf(stderr,
                   "simulate_truth: warning: e'_q <= 0 at t=%.4f, trajectory "
                   "left the physically meaningful region\n",
                   t_k);
      warned_eq_p = true;
    }
    traj.times.push_back(t_k);
    traj.states.push_back(state);
    traj.clean.push_back(measure(state, u, cfg.params));
    traj.inputs.push_back(u);
  }
  return traj;
}

std::vector<PmuRecord> corrupt(const TruthTrajectory& traj,
                               const NoiseSpec& noise, RngStream& rng) {
  std::vector<PmuRecord> records;
  records.reserve(traj.times.size());
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    PmuRecord r;
    r.t = traj.times[i];
    r.pt = traj.clean[i].pt + noise.pt.sample(rng);
    r.qt = traj.clean[i].qt + noise.qt.sample(rng);
    r.vt = traj.inputs[i].vt;
    records.push_back(r);
  }
  return records;
}

namespace {

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& field, int line) {
  std::size_t consumed = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &consumed);
  } catch (const std::exception&) {
    throw ParseError("not a number: '" + field + "'", line);
  }
  if (consumed != field.size()) {
    throw ParseError("trailing garbage in number: '" + field + "'", line);
  }
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    fields.push_back(field);
  }
  return fields;
}

}  // namespace

void write_records(const std::vector<PmuRecord>& records,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // binary: force LF endings
  if (!out) {
    throw IoError("cannot open for writing: " + path.string());
  }
  out << "t,pt,qt,vt\n";
  for (const auto& r : records) {
    out << format_g17(r.t) << ',' << format_g17(r.pt) << ','
        << format_g17(r.qt) << ',' << format_g17(r.vt) << '\n';
  }
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

std::vector<PmuRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open for reading: " + path.string());
  }
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) {
    throw ParseError("empty file, expected header 't,pt,qt,vt'", 1);
  }
  ++line_no;
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  if (line != "t,pt,qt,vt") {
    throw ParseError("bad header, expected 't,pt,qt,vt'", line_no);
  }

  std::vector<PmuRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const auto fields = split_csv(line);
    if (fields.size() != 4) {
      throw ParseError("expected 4 fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    PmuRecord r;
    r.t = parse_double(fields[0], line_no);
    r.pt = parse_double(fields[1], line_no);
    r.qt = parse_double(fields[2], line_no);
    r.vt = parse_double(fields[3], line_no);
    if (!std::isfinite(r.t) || !std::isfinite(r.pt) || !std::isfinite(r.qt) ||
        !std::isfinite(r.vt)) {
      throw ParseError("non-finite value", line_no);
    }
    if (r.t < 0.0) {
      throw ParseError("negative timestamp", line_no);
    }
    if (!records.empty() && !(r.t > records.back().t)) {
      throw ParseError("non-monotone timestamp", line_no);
    }
    records.push_back(r);
  }
  return records;
}

void write_states(const TruthTrajectory& traj,
                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open for writing: " + path.string());
  }
  out << "t,delta,domega,eq_p,ed_p\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const GenState& s = traj.states[i];
    out << format_g17(traj.times[i]) << ',' << format_g17(s.delta) << ','
        << format_g17(s.domega) << ',' << format_g17(s.eq_p) << ','
        << format_g17(s.ed_p) << '\n';
  }
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

TruthTrajectory read_states(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open for reading: " + path.string());
  }
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) {
    throw ParseError("empty file, expected header 't,delta,domega,eq_p,ed_p'",
                     1);
  }
  ++line_no;
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  if (line != "t,delta,domega,eq_p,ed_p") {
    throw ParseError("bad header, expected 't,delta,domega,eq_p,ed_p'",
                     line_no);
  }
  TruthTrajectory traj;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const auto fields = split_csv(line);
    if (fields.size() != 5) {
      throw ParseError("expected 5 fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    const double t = parse_double(fields[0], line_no);
    if (!traj.times.empty() && !(t > traj.times.back())) {
      throw ParseError("non-monotone timestamp", line_no);
    }
    traj.times.push_back(t);
    traj.states.push_back(GenState{
        parse_double(fields[1], line_no), parse_double(fields[2], line_no),
        parse_double(fields[3], line_no), parse_double(fields[4], line_no)});
  }
  return traj;
}

}  // namespace dsekit
