// Copyright 2026 The ppdo Authors.
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

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"
#include "ppdo/experiments.hpp"
#include "ppdo/problem_io.hpp"
#include "test_support.hpp"

namespace ppdo {
namespace {

bool same_spec(const ProblemSpec& a, const ProblemSpec& b) {
  if (a.num_agents() != b.num_agents() || a.rho != b.rho ||
      a.objective_offset != b.objective_offset || a.constraint_offset != b.constraint_offset) {
    return false;
  }
  for (std::size_t i = 0; i < a.num_agents(); ++i) {
    const AgentSpec& x = a.agents[i];
    const AgentSpec& y = b.agents[i];
    if (x.objective_coupling != y.objective_coupling ||
        x.constraint_coupling != y.constraint_coupling || x.box.lower != y.box.lower ||
        x.box.upper != y.box.upper || x.local.index() != y.local.index()) {
      return false;
    }
  }
  return true;
}

// Numerical instance ------------------------------------------------------------

TEST(NumericalExample, DualSubgradientAtOriginIsOffset) {
  const Experiment e = build_numerical_example();
  const Vector h = dual_subgradient(e.spec, initial_state(e.spec).x);
  EXPECT_EQ(h, (Vector{{-1.0, 1.0}}));
}

TEST(NumericalExample, Hyperparameters) {
  const Experiment e = build_numerical_example();
  EXPECT_EQ(e.params.alpha, (std::vector<double>{5e-3, 5e-3}));
  EXPECT_EQ(e.params.beta, 2.0);
  EXPECT_EQ(e.params.tau_x, 0.98);
  EXPECT_EQ(e.params.tau_lambda, 0.98);
  EXPECT_EQ(e.params.eps0, 1e-4);
  EXPECT_EQ(e.sigma, 3u);
  EXPECT_EQ(e.spec.rho, 1.0);
}

TEST(NumericalExample, EachAgentHoldsOnlyItsOwnSlice) {
  const Experiment e = build_numerical_example();
  const AgentSpec& a1 = e.spec.agents[0];
  EXPECT_EQ(a1.objective_coupling, (Matrix{{-1.0, 0.0}, {1.0, -0.5}}));
  EXPECT_EQ(a1.constraint_coupling, (Matrix{{1.0, 0.0}, {1.0, -1.0}}));
  const auto& f1 = std::get<QuadraticObjective>(a1.local);
  EXPECT_EQ(f1.quad, (Matrix{{1.0, 0.0}, {1.0, 1.0}}));
  EXPECT_EQ(f1.linear, (Vector{{1.0, 1.0}}));
  EXPECT_EQ(f1.constant, 1.0);
  const auto& f2 = std::get<QuadraticObjective>(e.spec.agents[1].local);
  EXPECT_EQ(f2.quad, (Matrix{{0.0, 1.0}, {1.0, 1.0}}));
  EXPECT_EQ(f2.constant, 0.0);
}

TEST(NumericalExample, VariantsDifferOnlyInOneCoefficient) {
  const Experiment fixed = build_numerical_example(NumericalVariant::kCorrected);
  const Experiment printed = build_numerical_example(NumericalVariant::kAsPrinted);
  EXPECT_EQ(fixed.spec.agents[1].constraint_coupling, (Matrix{{0.0, 1.0}, {-1.0, 1.0}}));
  EXPECT_EQ(printed.spec.agents[1].constraint_coupling, (Matrix{{0.0, 1.0}, {-1.0, -1.0}}));
  EXPECT_TRUE(fixed.x_star.has_value());
  EXPECT_FALSE(printed.x_star.has_value());
}

TEST(NumericalExample, PlaintextSolveReachesReportedOptimum) {
  const Experiment e = build_numerical_example();
  const HarnessResult r = run_experiment(e, {});
  ASSERT_TRUE(r.converged());
  ASSERT_TRUE(r.final_gap().has_value());
  EXPECT_LE(*r.final_gap(), 2 * 5e-3);
  EXPECT_LE((r.trajectory.final_state().x[0] - e.x_star->at(0)).norm(), 5e-3);
  EXPECT_LE((r.trajectory.final_state().x[1] - e.x_star->at(1)).norm(), 5e-3);
}

TEST(NumericalExample, AsPrintedInstanceHasADifferentOptimum) {
  // Interior-point solve of the instance with A_g2(2,2) = -1.
  Experiment e = build_numerical_example(NumericalVariant::kAsPrinted);
  e.params.eps0 = 1e-8;
  e.params.k_max = 50000;
  const Trajectory t = solve_plaintext(e.spec, e.params);
  ASSERT_TRUE(t.converged);
  const PrimalPoint& x = t.final_state().x;
  EXPECT_LE((x[0] - Vector{{0.0, 0.4700}}).norm(), 5e-4);
  EXPECT_LE((x[1] - Vector{{0.4295, 0.1005}}).norm(), 5e-4);
  EXPECT_GT((x[0] - numerical_reported_optimum()[0]).norm(), 0.05);
}

// Traffic instance --------------------------------------------------------------

TEST(Traffic, IncidenceMatchesRoutes) {
  const TrafficConfig cfg;
  const Matrix a = incidence_matrix(cfg.routes, 9, 5);
  ASSERT_EQ(a.rows(), 9);
  ASSERT_EQ(a.cols(), 5);
  for (int j = 0; j < 9; ++j) {
    const bool on = j == 1 || j == 2 || j == 5;
    EXPECT_EQ(a(j, 0), on ? 1.0 : 0.0) << "link " << j + 1;
  }
  EXPECT_TRUE(a.row(6).isZero(0.0));
  EXPECT_EQ(a.row(8).sum(), 4.0);
  EXPECT_EQ(a.sum(), 14.0);
}

TEST(Traffic, EmptyRouteGivesZeroColumn) {
  const Matrix a = incidence_matrix({{1, 2}, {}}, 3, 2);
  EXPECT_TRUE(a.col(1).isZero(0.0));
}

TEST(Traffic, OutOfRangeLinkRejected) {
  EXPECT_THROW(incidence_matrix({{1, 10}}, 9, 1), ConfigError);
  EXPECT_THROW(incidence_matrix({{0}}, 9, 1), ConfigError);
  EXPECT_THROW(incidence_matrix({{1}}, 9, 2), ConfigError);
}

TEST(Traffic, BuiltInstanceShape) {
  const Experiment tr = build_traffic_example();
  ASSERT_EQ(tr.spec.num_agents(), 5u);
  EXPECT_EQ(tr.spec.rho, 2.0);
  EXPECT_TRUE(tr.spec.objective_offset.isZero(0.0));
  EXPECT_EQ(tr.spec.constraint_offset, Vector::Constant(9, -1.0));
  const Matrix a = incidence_matrix(TrafficConfig{}.routes, 9, 5);
  const double k[] = {10, 0, 10, 10, 10};
  for (std::size_t i = 0; i < 5; ++i) {
    const AgentSpec& ag = tr.spec.agents[i];
    EXPECT_EQ(ag.objective_coupling, a.col(static_cast<Eigen::Index>(i)));
    EXPECT_EQ(ag.constraint_coupling, a.col(static_cast<Eigen::Index>(i)));
    EXPECT_EQ(std::get<NegLogObjective>(ag.local).weight, k[i]);
    EXPECT_EQ(ag.box.lower[0], 0.0);
    EXPECT_TRUE(std::isinf(ag.box.upper[0]));
  }
  EXPECT_EQ(tr.params.alpha, std::vector<double>(5, 1e-3));
  EXPECT_EQ(tr.params.beta, 0.5);
  EXPECT_EQ(tr.params.tau_x, 0.98);
  EXPECT_EQ(tr.sigma, 3u);
}

TEST(Traffic, CongestionCostAtOnes) {
  const Experiment tr = build_traffic_example();
  const PrimalPoint ones(5, Vector::Ones(1));
  // Link loads at x = 1: (1, 2, 1, 1, 2, 2, 0, 1, 4); squared norm 32.
  const double congestion = 32.0;
  EXPECT_NEAR(eval_objective(tr.spec, ones), congestion - 40.0 * std::log(2.0), 1e-12);
}

TEST(Traffic, ZeroWeightAgentHasNoLocalGradient) {
  const Experiment tr = build_traffic_example();
  for (double x : {0.0, 0.5, 3.0, 100.0}) {
    EXPECT_EQ(local_gradient(tr.spec.agents[1].local, Vector{{x}})[0], 0.0);
  }
}

TEST(Traffic, DualSubgradientAtOrigin) {
  const Experiment tr = build_traffic_example();
  EXPECT_EQ(dual_subgradient(tr.spec, initial_state(tr.spec).x), Vector::Constant(9, -1.0));
}

TEST(Traffic, CapacityMustBePositive) {
  TrafficConfig cfg;
  cfg.b[3] = 0.0;
  EXPECT_THROW(build_traffic_example(cfg), ConfigError);
}

TEST(Traffic, ReferenceFileMatchesBuiltInReference) {
  const auto j = nlohmann::json::parse(testing::read_file(testing::fixture_path("traffic_reference.json")));
  const PrimalPoint ref = traffic_reference_optimum();
  ASSERT_EQ(j.at("x").size(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_EQ(j.at("x")[i][0].get<double>(), ref[i][0]);
  EXPECT_EQ(j.at("solver").at("eps0").get<double>(), 1e-8);
  // Independent interior-point solution agrees to well below the 1e-2 test tolerance.
  for (std::size_t i = 0; i < ref.size(); ++i) {
    EXPECT_NEAR(j.at("interior_point_check").at("x")[i][0].get<double>(), ref[i][0], 1e-6);
  }
}

// Metrics -----------------------------------------------------------------------

TEST(Metrics, IdenticalPointsHaveZeroError) {
  const PrimalPoint x = numerical_reported_optimum();
  EXPECT_EQ(encryption_error(x, x), 0.0);
  EXPECT_EQ(optimality_gap(x, x), 0.0);
}

TEST(Metrics, SumOfPerAgentNorms) {
  const PrimalPoint a{Vector{{3.0, 4.0}}, Vector{{1.0}}};
  const PrimalPoint b{Vector{{0.0, 0.0}}, Vector{{-1.0}}};
  EXPECT_DOUBLE_EQ(optimality_gap(a, b), 7.0);
  EXPECT_DOUBLE_EQ(encryption_error(a, b), 7.0);
}

TEST(Metrics, TrajectoryLengthMismatchRejected) {
  const Experiment e = build_numerical_example();
  SolverParams p = e.params;
  p.k_max = 5;
  const Trajectory a = solve_plaintext(e.spec, p);
  p.k_max = 6;
  const Trajectory b = solve_plaintext(e.spec, p);
  EXPECT_THROW(encryption_error(a, b), DimensionError);
  EXPECT_EQ(encryption_error(a, a), std::vector<double>(6, 0.0));
}

// Harness -------------------------------------------------------------------------

HarnessOptions encrypted(unsigned sigma, unsigned key_bits = 51) {
  HarnessOptions o;
  CryptoSettings c;
  c.sigma = sigma;
  c.key_bits = key_bits;
  o.crypto = c;
  o.compare_plaintext = true;
  o.master_seed = 42;
  return o;
}

TEST(Harness, NumericalEncryptionErrorBelowOneHundredth) {
  const HarnessResult r = run_experiment(build_numerical_example(), encrypted(3));
  ASSERT_TRUE(r.converged());
  for (const auto& rec : r.records) {
    ASSERT_TRUE(rec.pe.has_value());
    ASSERT_GE(*rec.pe, 0.0);
    ASSERT_LT(*rec.pe, 0.01) << "k = " << rec.k;
  }
}

TEST(Harness, HighPrecisionEncryptionErrorBelowOneMillionth) {
  const HarnessResult r = run_experiment(build_numerical_example(), encrypted(9));
  for (const auto& rec : r.records) ASSERT_LT(*rec.pe, 1e-6) << "k = " << rec.k;
}

TEST(Harness, GapShrinksAfterTransient) {
  for (const Experiment& e : {build_numerical_example(), build_traffic_example()}) {
    const HarnessResult r = run_experiment(e, encrypted(3));
    ASSERT_GT(r.records.size(), 100u) << e.name;
    EXPECT_LT(*r.records.back().ge, *r.records[99].ge) << e.name;
  }
}

TEST(Harness, RecordsAreIndexedAndComplete) {
  const HarnessResult r = run_experiment(build_numerical_example(), encrypted(3));
  ASSERT_EQ(static_cast<int>(r.records.size()), r.iterations());
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    EXPECT_EQ(r.records[i].k, static_cast<int>(i) + 1);
    EXPECT_EQ(r.records[i].x.size(), 4);
    EXPECT_EQ(r.records[i].lambda.size(), 2);
    EXPECT_GE(*r.records[i].ge, 0.0);
  }
  EXPECT_EQ(r.baseline->iterations(), r.iterations());
}

TEST(Harness, PlaintextOnlyLeavesEncryptionErrorEmpty) {
  const HarnessResult r = run_experiment(build_numerical_example(), {});
  EXPECT_FALSE(r.max_pe().has_value());
  EXPECT_FALSE(r.run.has_value());
}

// Problem files ---------------------------------------------------------------------

TEST(ProblemFiles, FixturesMatchBuilders) {
  const Experiment num = load_experiment_file(testing::fixture_path("numerical.json"));
  const Experiment ref_num = build_numerical_example();
  EXPECT_TRUE(same_spec(num.spec, ref_num.spec));
  EXPECT_EQ(num.params.alpha, ref_num.params.alpha);
  EXPECT_EQ(num.params.beta, ref_num.params.beta);
  EXPECT_EQ(num.x_star->at(1), ref_num.x_star->at(1));

  const Experiment tr = load_experiment_file(testing::fixture_path("traffic.json"));
  const Experiment ref_tr = build_traffic_example();
  EXPECT_TRUE(same_spec(tr.spec, ref_tr.spec));
  EXPECT_EQ(tr.params.alpha, ref_tr.params.alpha);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(tr.x_star->at(i), ref_tr.x_star->at(i));
}

TEST(ProblemFiles, JsonRoundTrip) {
  for (const Experiment& e : {build_numerical_example(), build_traffic_example()}) {
    const Experiment back = experiment_from_json(experiment_to_json(e));
    EXPECT_TRUE(same_spec(back.spec, e.spec)) << e.name;
    EXPECT_EQ(experiment_to_json(back), experiment_to_json(e));
  }
}

TEST(ProblemFiles, UnknownKeyRejected) {
  auto j = experiment_to_json(build_numerical_example());
  j["agents"][0]["A_x"] = 1;
  try {
    experiment_from_json(j);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("A_x"), std::string::npos) << e.what();
  }
}

TEST(ProblemFiles, DimensionMismatchRejected) {
  auto j = experiment_to_json(build_numerical_example());
  j["agents"][1]["A_u"] = {{0.0, -2.0, 1.0}, {0.0, -10.0, 1.0}};
  EXPECT_THROW(experiment_from_json(j), DimensionError);
}

}  // namespace
}  // namespace ppdo
