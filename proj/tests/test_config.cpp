#include "dsekit/config.hpp"

#include <gtest/gtest.h>

#include "dsekit/harness.hpp"

using namespace dsekit;

TEST(ConfigMap, ParsesTypicalFile) {
  const ConfigMap cfg = ConfigMap::from_string(
      "# comment\n"
      "\n"
      "enkf.ensemble_size = 100\n"
      "ukf.alpha = 0.5\n"
      "scenario.allow_any_rate = true\n"
      "experiment.prior_offset = 0.1 0.001 0.05 0.05\n");
  EXPECT_EQ(cfg.get_int("enkf.ensemble_size", 0), 100);
  EXPECT_DOUBLE_EQ(cfg.get_double("ukf.alpha", 0.0), 0.5);
  EXPECT_TRUE(cfg.get_bool("scenario.allow_any_rate", false));
  EXPECT_EQ(cfg.get_doubles("experiment.prior_offset", {}).size(), 4u);
  EXPECT_EQ(cfg.get_int("missing.key", 7), 7);
}

TEST(ConfigMap, MalformedLineNamesLineNumber) {
  try {
    ConfigMap::from_string("a = 1\nno equals sign here\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 2);
  }
}

TEST(ConfigMap, DuplicateKeyRejected) {
  try {
    ConfigMap::from_string("a = 1\na = 2\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 2);
  }
}

TEST(ConfigMap, BadNumberNamesLine) {
  const ConfigMap cfg = ConfigMap::from_string("x = 1\ny = 2z\n");
  EXPECT_EQ(cfg.get_int("x", 0), 1);
  try {
    cfg.get_double("y", 0.0);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 2);
  }
}

TEST(ExperimentFromConfig, DefaultsWhenEmpty) {
  const ExperimentConfig ec = experiment_from_config(ConfigMap::from_string(""));
  EXPECT_EQ(ec.trials, 11);
  EXPECT_EQ(ec.enkf.ensemble_size, 100);
  EXPECT_DOUBLE_EQ(ec.ukf.alpha, 1.0);
  EXPECT_DOUBLE_EQ(ec.warmup, 1.0);
  EXPECT_EQ(ec.scenario.pmu_rate, 60);
  ASSERT_EQ(ec.scenario.events.size(), 1u);
  EXPECT_DOUBLE_EQ(ec.scenario.events[0].time, 3.5);
  EXPECT_DOUBLE_EQ(ec.scenario.events[0].value, 1.05);
  EXPECT_DOUBLE_EQ(ec.ukf.meas_cov(0, 0), 1.9e-4);
  EXPECT_DOUBLE_EQ(ec.enkf.meas_cov(1, 1), 1.9e-4);
}

TEST(ExperimentFromConfig, ParsesEventsAndNoise) {
  const ExperimentConfig ec = experiment_from_config(ConfigMap::from_string(
      "scenario.event.1.time = 2.0\n"
      "scenario.event.1.field = tm\n"
      "scenario.event.1.value = 0.9\n"
      "scenario.event.2.time = 4.0\n"
      "scenario.event.2.field = vt\n"
      "scenario.event.2.value = 1.02\n"
      "noise.pt.1 = 0.8 0.0 1e-4\n"
      "noise.pt.2 = 0.2 0.0 2e-3\n"));
  ASSERT_EQ(ec.scenario.events.size(), 2u);
  EXPECT_EQ(ec.scenario.events[0].field, InputField::tm);
  EXPECT_EQ(ec.scenario.events[1].field, InputField::vt);
  ASSERT_EQ(ec.scenario.noise.pt.components().size(), 2u);
  EXPECT_DOUBLE_EQ(ec.scenario.noise.pt.components()[1].variance, 2e-3);
  // qt falls back to the default bimodal mixture.
  EXPECT_DOUBLE_EQ(ec.scenario.noise.qt.components()[0].weight, 0.9);
}

TEST(ExperimentFromConfig, UnknownKeyRejectedWithLine) {
  try {
    experiment_from_config(ConfigMap::from_string(
        "ukf.alpha = 0.9\n"
        "ukf.alhpa = 0.9\n"));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 2);
  }
}

TEST(ExperimentFromConfig, BadEventFieldRejected) {
  EXPECT_THROW(experiment_from_config(ConfigMap::from_string(
                   "scenario.event.1.time = 2.0\n"
                   "scenario.event.1.field = voltage\n"
                   "scenario.event.1.value = 1.0\n")),
               ParseError);
}

TEST(ExperimentFromConfig, SeedPropagatesToScenario) {
  const ExperimentConfig ec = experiment_from_config(
      ConfigMap::from_string("experiment.seed = 777\n"));
  EXPECT_EQ(ec.seed, 777u);
  EXPECT_EQ(ec.scenario.seed, 777u);
}
