// Copyright 2026 The fairobd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "fairobd/offline.hpp"
#include "oracles.hpp"

namespace fairobd {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void expect_vec_near(const Vec& a, const Vec& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "coordinate " << i;
}

std::vector<testing::Interval> intervals(const Episode& ep) {
  std::vector<testing::Interval> dims;
  for (const auto& s : ep.steps()) dims.push_back(testing::as_interval(s.action_set));
  return dims;
}

TEST(OfflineOpt, SymmetricFixedPoint) {
  const Episode ep = testing::symmetric_episode(3);
  const auto r = solve_offline_opt(ep);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.cost.total, 1.75, 1e-6);
  for (const auto& x : r.trajectory) expect_vec_near(x, {0.5, 0.5}, 1e-3);
  EXPECT_LE(r.lower_bound, r.objective + 1e-12);
  EXPECT_LE(r.lower_bound, 1.75 + 1e-9);
}

TEST(OfflineOpt, SeparableWithoutFairness) {
  testing::RandomInstanceSpec spec;
  spec.horizon = 8;
  spec.weight = 0.0;
  spec.beta1_hi = 0.0;
  const Episode ep = testing::random_episode(2, spec);
  const auto r = solve_offline_opt(ep);
  EXPECT_TRUE(r.converged);
  for (std::size_t t = 0; t < ep.horizon(); ++t)
    expect_vec_near(r.trajectory[t], hitting_minimizer(ep.step(t)), 1e-6);
}

TEST(OfflineOpt, TwoRoundGridOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    testing::RandomInstanceSpec spec;
    spec.n = 2;
    spec.m = 2;
    spec.horizon = 2;
    spec.beta1_hi = 50.0;
    const Episode ep = testing::random_episode(seed, spec);
    const auto r = solve_offline_opt(ep);
    const double grid = testing::product_grid_minimize(
        intervals(ep), 0.02, [&](const std::vector<Vec>& x) { return testing::direct_cost(ep, x); });
    EXPECT_NEAR(r.cost.total, grid, 1e-2) << "seed " << seed;
    EXPECT_LE(r.cost.total, grid + 1e-7) << "seed " << seed;
    EXPECT_LE(r.lower_bound, grid + 1e-9) << "seed " << seed;
  }
}

TEST(OfflineOpt, BoundsBracketAndReformulation) {
  testing::RandomInstanceSpec spec;
  spec.horizon = 24;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Episode ep = testing::random_episode(seed, spec);
    const auto r = solve_offline_opt(ep);
    EXPECT_TRUE(r.converged) << "seed " << seed;
    EXPECT_LE(r.lower_bound, r.objective);
    EXPECT_DOUBLE_EQ(r.objective, r.cost.total);
    // With z_t fixed at the episode average, the reformulated objective is
    // the same number.
    const Vec z = average_fairness_vector(ep, r.trajectory);
    EXPECT_DOUBLE_EQ(r.cost.hitting + r.cost.switching + ep.fairness().value(z), r.cost.total);
    for (std::size_t t = 0; t < ep.horizon(); ++t)
      EXPECT_TRUE(is_feasible(ep.step(t).action_set, r.trajectory[t], 1e-9));
  }
}

TEST(OfflineOpt, Deterministic) {
  testing::RandomInstanceSpec spec;
  spec.horizon = 10;
  const Episode ep = testing::random_episode(8, spec);
  const auto a = solve_offline_opt(ep);
  const auto b = solve_offline_opt(ep);
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.trajectory, b.trajectory);
}

TEST(FairOpt, ZeroWeightReturnsProjectedStart) {
  testing::RandomInstanceSpec spec;
  spec.horizon = 5;
  spec.weight = 0.0;
  const Episode ep = testing::random_episode(4, spec);
  const auto r = solve_fair_opt(ep);
  EXPECT_EQ(r.cost.fairness, 0.0);
  for (std::size_t t = 0; t < ep.horizon(); ++t)
    expect_vec_near(r.trajectory[t], project(ep.step(t).action_set, ep.x0()), 0.0);
}

TEST(FairOpt, CleanLocationAbsorbsLoad) {
  std::vector<ContextStep> steps;
  for (int t = 0; t < 2; ++t)
    steps.push_back({QuadraticHitting::centered({0.5, 0.5}, 1.0), Matrix::diagonal(Vec{2.0, 0.0}),
                     make_capped_simplex(1.0, {1.0, 1.0})});
  const Episode ep = Episode::create(std::move(steps), {0.5, 0.5}, 0.0, {3.5, kInf});
  const auto r = solve_fair_opt(ep);
  EXPECT_NEAR(r.cost.fairness, 0.0, 1e-6);
  for (const auto& x : r.trajectory) expect_vec_near(x, {0.0, 1.0}, 1e-6);
  const double grid = testing::product_grid_minimize(
      intervals(ep), 0.01, [&](const std::vector<Vec>& x) {
        return ep.fairness().value(average_fairness_vector(ep, x));
      });
  EXPECT_NEAR(r.cost.fairness, grid, 1e-6);
}

TEST(FairOpt, IdenticalRatesMatchGrid) {
  std::vector<ContextStep> steps;
  const Matrix a = Matrix::from_rows({{1.5, 1.5}, {1.5, 1.5}});
  for (int t = 0; t < 2; ++t)
    steps.push_back({QuadraticHitting::centered({0.5, 0.5}, 1.0), a,
                     make_capped_simplex(0.8, {1.0, 1.0})});
  const Episode ep = Episode::create(std::move(steps), {0.4, 0.4}, 0.0, {2.0, kInf});
  const auto r = solve_fair_opt(ep);
  const double grid = testing::product_grid_minimize(
      intervals(ep), 0.01, [&](const std::vector<Vec>& x) {
        return ep.fairness().value(average_fairness_vector(ep, x));
      });
  EXPECT_NEAR(r.cost.fairness, grid, 1e-3);
}

TEST(FairOpt, LowerBoundBelowObjectiveAndGrid) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    testing::RandomInstanceSpec spec;
    spec.n = 2;
    spec.m = 2;
    spec.horizon = 2;
    const Episode ep = testing::random_episode(100 + seed, spec);
    const auto r = solve_fair_opt(ep);
    const double grid = testing::product_grid_minimize(
        intervals(ep), 0.01, [&](const std::vector<Vec>& x) {
          return ep.fairness().value(average_fairness_vector(ep, x));
        });
    EXPECT_LE(r.lower_bound, r.objective + 1e-12);
    EXPECT_LE(r.lower_bound, grid + 1e-9);
    EXPECT_NEAR(r.objective, grid, 1e-3 * std::max(1.0, grid)) << "seed " << seed;
    EXPECT_DOUBLE_EQ(r.objective, r.cost.fairness);
  }
}

TEST(NormBall, Projections) {
  expect_vec_near(project_norm_ball(Vec{3.0, 4.0}, 2.0, 1.0), {0.6, 0.8}, 1e-15);
  expect_vec_near(project_norm_ball(Vec{3.0, -0.5}, kInf, 1.0), {1.0, -0.5}, 0.0);
  expect_vec_near(project_norm_ball(Vec{0.1, 0.2}, 1.0, 1.0), {0.1, 0.2}, 0.0);
  expect_vec_near(project_norm_ball(Vec{2.0, 0.5}, 1.0, 1.0), {1.0, 0.0}, 1e-12);
  expect_vec_near(project_norm_ball(Vec{2.0, -1.5}, 1.0, 1.0), {0.75, -0.25}, 1e-12);
  expect_vec_near(project_norm_ball(Vec{2.0, -1.5}, 2.0, 0.0), {0.0, 0.0}, 0.0);
}

TEST(NormBall, VariationalInequality) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 2.0);
  for (double q : {1.0, 1.5, 2.0, 3.0, kInf}) {
    for (int k = 0; k < 50; ++k) {
      Vec p(4), y(4);
      for (double& v : p) v = n(rng);
      for (double& v : y) v = n(rng);
      const Vec pp = project_norm_ball(p, q, 1.0);
      EXPECT_LE(norm_p(pp, q), 1.0 + 1e-9) << "q " << q;
      const Vec py = project_norm_ball(y, q, 1.0);
      EXPECT_LE(dot(p - pp, py - pp), 1e-7) << "q " << q;
    }
  }
}

TEST(OfflineOptions, Validation) {
  OfflineOptions o;
  o.max_outer = 0;
  EXPECT_THROW(solve_offline_opt(testing::symmetric_episode(1), o), DomainError);
  o = {};
  o.restarts = -1;
  EXPECT_THROW(solve_fair_opt(testing::symmetric_episode(1), o), DomainError);
}

}  // namespace
}  // namespace fairobd
