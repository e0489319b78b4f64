// Copyright 2026 The stratnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <cmath>

#include "stratnet/harness.hpp"

namespace stratnet {
namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.n_nodes = 10;
  cfg.gammas = {0.0, 0.3};
  cfg.replications = 6;
  cfg.draws_per_test = 19;
  cfg.tau_r = 1.0;
  cfg.pilot_steps = 200;
  cfg.seed = 11;
  return cfg;
}

TEST(Calibration, LinkProbabilities) {
  const auto t = design_calibration();
  ASSERT_EQ(t.size(), 6u);
  const double expected[] = {0.90, 0.50, 0.10, 0.50, 0.10, 0.012};
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(t[i].probability, expected[i], 0.005) << t[i].label;
}

TEST(Population, DrawsFollowTheSupport) {
  Rng rng(4);
  const Population pop = Population::design();
  const AgentDraw agents = draw_agents(4000, pop, rng);
  int high = 0, group1 = 0;
  for (int i = 0; i < 4000; ++i) {
    high += agents.delta.a[i] > 0;
    group1 += agents.groups[i] == 1;
    EXPECT_EQ(std::fabs(agents.delta.b[i]), 1.1);
  }
  EXPECT_NEAR(high / 4000.0, 0.5, 0.03);
  EXPECT_NEAR(group1 / 4000.0, 0.5, 0.03);
  EXPECT_EQ(agents.delta.lambda, pop.lambda);
}

TEST(Population, Validation) {
  Population p = Population::design();
  p.weights = {1.0};
  EXPECT_THROW(p.validate(), UsageError);
  p = Population::design();
  p.points[0].group = 5;
  EXPECT_THROW(p.validate(), UsageError);
}

TEST(Experiment, ConfigValidation) {
  ExperimentConfig cfg = small_config();
  cfg.gammas = {-0.1};
  EXPECT_THROW(cfg.validate(), UsageError);
  cfg = small_config();
  cfg.alpha = 1.0;
  EXPECT_THROW(cfg.validate(), UsageError);
  cfg = small_config();
  cfg.n_nodes = 2;
  EXPECT_THROW(cfg.validate(), UsageError);
}

TEST(Experiment, ZeroAlphaNeverRejects) {
  ExperimentConfig cfg = small_config();
  cfg.alpha = 0.0;
  const PowerTable t = run_experiment(cfg);
  ASSERT_EQ(t.rows.size(), cfg.gammas.size() * cfg.statistics.size());
  for (const auto& r : t.rows) {
    EXPECT_EQ(r.reject_rate, 0.0);
    EXPECT_EQ(r.reps + r.failures, cfg.replications);
  }
}

TEST(Experiment, ReproducibleAcrossJobCounts) {
  ExperimentConfig cfg = small_config();
  const PowerTable a = run_experiment(cfg);
  cfg.jobs = 3;
  const PowerTable b = run_experiment(cfg);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].reject_rate, b.rows[i].reject_rate);
    EXPECT_EQ(a.rows[i].reps, b.rows[i].reps);
  }
  EXPECT_NO_THROW(a.find(0.3, HarnessStatistic::kTransitivityIndex));
  EXPECT_THROW(a.find(0.7, HarnessStatistic::kTransitivityIndex), UsageError);
}

TEST(Experiment, StatisticNamesRoundTrip) {
  for (auto s : {HarnessStatistic::kLocallyBestInfeasible, HarnessStatistic::kLocallyBestFeasible,
                 HarnessStatistic::kTransitivityIndex})
    EXPECT_EQ(harness_statistic_from_string(to_string(s)), s);
  EXPECT_THROW(harness_statistic_from_string("nope"), UsageError);
}

TEST(Design, SummaryIsDeterministic) {
  const DesignSummary a = null_design_summary(16, 20, 5);
  const DesignSummary b = null_design_summary(16, 20, 5, Population::design(), 4);
  EXPECT_EQ(a.mean_density, b.mean_density);
  EXPECT_EQ(a.mean_in_degree_sd, b.mean_in_degree_sd);
  EXPECT_GT(a.mean_density, 0.2);
  EXPECT_LT(a.mean_density, 0.5);
}

TEST(Design, PopulationStandardDeviation) {
  EXPECT_DOUBLE_EQ(degree_sd({1, 3}), 1.0);
  EXPECT_DOUBLE_EQ(degree_sd({2, 2, 2}), 0.0);
}

}  // namespace
}  // namespace stratnet
