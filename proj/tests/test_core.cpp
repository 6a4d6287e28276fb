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

#include "fairobd/core.hpp"
#include "oracles.hpp"

namespace fairobd {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Episode one_step(QuadraticHitting f, Matrix a, FeasibleSet set, Vec x0, double beta1,
                 FairnessSpec g) {
  return Episode::create({{std::move(f), std::move(a), std::move(set)}}, std::move(x0),
                         beta1, g);
}

TEST(TotalCost, SymmetricFixedPoint) {
  const Episode ep = testing::symmetric_episode(1);
  const auto c = total_cost(ep, {{0.5, 0.5}});
  EXPECT_DOUBLE_EQ(c.hitting, 0.0);
  EXPECT_DOUBLE_EQ(c.switching, 0.0);
  EXPECT_DOUBLE_EQ(c.fairness, 1.75);
  EXPECT_DOUBLE_EQ(c.total, 1.75);
}

TEST(TotalCost, ChasingCentersWithoutFairnessIsFree) {
  std::vector<ContextStep> steps;
  Trajectory x;
  for (int t = 0; t < 5; ++t) {
    const Vec c{0.1 * t, 1.0 - 0.1 * t};
    steps.push_back({QuadraticHitting::centered(c, 3.0), Matrix::identity(2),
                     make_box(2, 0.0, 1.0)});
    x.push_back(c);
  }
  const Episode ep = Episode::create(std::move(steps), {0.0, 0.0}, 0.0, {0.0, kInf});
  EXPECT_DOUBLE_EQ(total_cost(ep, x).total, 0.0);
}

TEST(TotalCost, SwitchingOnly) {
  // f == 0 is the m -> 0 limit; a tiny curvature centred on x1 contributes nothing.
  const Episode ep = one_step(QuadraticHitting::centered({1.0, 0.0}, 1e-300), Matrix(1, 2),
                              make_box(2, 0.0, 1.0), {0.0, 0.0}, 1000.0, {0.0, kInf});
  const auto c = total_cost(ep, {{1.0, 0.0}});
  EXPECT_DOUBLE_EQ(c.switching, 500.0);
  EXPECT_DOUBLE_EQ(c.total, 500.0);
}

TEST(TotalCost, Errors) {
  const Episode ep = testing::symmetric_episode(2);
  EXPECT_THROW(total_cost(ep, {{0.5, 0.5}}), ShapeError);
  EXPECT_THROW(total_cost(ep, {{0.5, 0.5}, {0.5}}), ShapeError);
  EXPECT_THROW(total_cost(ep, {{0.5, 0.5}, {kInf, 0.5}}), NumericError);
}

TEST(TotalCost, AdditivityNonnegativityAndDirectOracle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  testing::RandomInstanceSpec spec;
  spec.horizon = 12;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Episode ep = testing::random_episode(seed, spec);
    Trajectory x;
    for (std::size_t t = 0; t < ep.horizon(); ++t) {
      Vec p(ep.action_dim());
      for (double& v : p) v = 2.0 * u(rng) - 0.5;
      x.push_back(project(ep.step(t).action_set, p));
    }
    const auto c = total_cost(ep, x);
    EXPECT_GE(c.hitting, 0.0);
    EXPECT_GE(c.switching, 0.0);
    EXPECT_GE(c.fairness, 0.0);
    EXPECT_NEAR(c.total, c.hitting + c.switching + c.fairness, 1e-12 * std::abs(c.total));
    EXPECT_NEAR(c.total, testing::direct_cost(ep, x), 1e-9 * (1.0 + c.total));
  }
}

TEST(TotalCost, AuxReformulationIsExact) {
  testing::RandomInstanceSpec spec;
  spec.horizon = 9;
  const Episode ep = testing::random_episode(3, spec);
  Trajectory x;
  for (std::size_t t = 0; t < ep.horizon(); ++t)
    x.push_back(project(ep.step(t).action_set, Vec(ep.action_dim(), 0.3)));
  const Vec z = average_fairness_vector(ep, x);
  double avg_g = 0.0;
  for (std::size_t t = 0; t < ep.horizon(); ++t) avg_g += ep.fairness().value(z);
  avg_g /= static_cast<double>(ep.horizon());
  EXPECT_DOUBLE_EQ(avg_g, total_cost(ep, x).fairness);
}

Episode scalar_identity_episode(std::size_t horizon) {
  std::vector<ContextStep> steps;
  for (std::size_t t = 0; t < horizon; ++t)
    steps.push_back({QuadraticHitting::centered({0.0}, 1.0), Matrix(1, 1, 1.0),
                     make_box(1, 0.0, 10.0)});
  return Episode::create(std::move(steps), {0.0}, 0.0, {1.0, 1.0});
}

TEST(FairnessDeviation, HandEvaluated) {
  const Episode ep = scalar_identity_episode(4);
  EXPECT_DOUBLE_EQ(fairness_deviation(ep, {{1.0}, {1.0}, {3.0}, {3.0}}, 2), 4.0);
}

TEST(FairnessDeviation, BaseCases) {
  const Episode ep = scalar_identity_episode(6);
  const Trajectory flat(6, Vec{2.5});
  for (std::size_t r : {1u, 2u, 3u, 6u}) EXPECT_NEAR(fairness_deviation(ep, flat, r), 0.0, 1e-12);
  const Trajectory x{{1.0}, {4.0}, {2.0}, {0.5}, {3.0}, {1.5}};
  EXPECT_NEAR(fairness_deviation(ep, x, 6), 0.0, 1e-12);
  Trajectory twice = x;
  for (auto& v : twice) v[0] *= 2.0;
  EXPECT_NEAR(fairness_deviation(ep, twice, 2), 2.0 * fairness_deviation(ep, x, 2), 1e-12);
  EXPECT_THROW(fairness_deviation(ep, x, 4), FrameSizeError);
  EXPECT_THROW(fairness_deviation(ep, x, 0), FrameSizeError);
}

TEST(Lipschitz, Examples) {
  EXPECT_DOUBLE_EQ(lipschitz_constant({3.5, kInf}, 7), 3.5);
  EXPECT_DOUBLE_EQ(lipschitz_constant({1.0, 1.0}, 4), 2.0);
  EXPECT_DOUBLE_EQ(lipschitz_constant({1.0, 2.0}, 9), 1.0);
}

TEST(Lipschitz, BoundsSampledSlopes) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double p : {1.0, 1.5, 2.0, 3.0, kInf}) {
    const FairnessSpec g{2.0, p};
    const double lip = lipschitz_constant(g, 5);
    for (int k = 0; k < 200; ++k) {
      Vec a(5), b(5);
      for (double& v : a) v = n(rng);
      for (double& v : b) v = n(rng);
      EXPECT_LE(std::abs(g.value(a) - g.value(b)), lip * distance(a, b) + 1e-12);
    }
  }
}

TEST(Fairness, SubgradientTiesPickLowestIndex) {
  const FairnessSpec g{2.0, kInf};
  EXPECT_EQ(g.subgradient(Vec{1.0, -1.0, 0.5}), (Vec{2.0, 0.0, 0.0}));
  EXPECT_EQ(g.subgradient(Vec{0.0, 0.0}), (Vec{0.0, 0.0}));
}

TEST(Episode, Validation) {
  const auto f = QuadraticHitting::centered({0.5, 0.5}, 1.0);
  const auto set = make_capped_simplex(1.0, {1.0, 1.0});
  EXPECT_THROW(Episode::create({}, {0.5, 0.5}, 0.0, {}), ShapeError);
  EXPECT_THROW(one_step(f, Matrix::identity(3), set, {0.5, 0.5}, 0.0, {}), ShapeError);
  EXPECT_THROW(one_step(f, Matrix::identity(2), set, {1.0, 1.0}, 0.0, {}), InfeasibleError);
  EXPECT_THROW(one_step(f, Matrix::identity(2), set, {0.5, 0.5}, -1.0, {}), DomainError);
  EXPECT_THROW(one_step(f, Matrix::identity(2), set, {0.5, 0.5}, 0.0, {1.0, 0.5}), DomainError);
  EXPECT_THROW(one_step(f, Matrix::identity(2), make_capped_simplex(3.0, {1.0, 1.0}),
                        {0.5, 0.5}, 0.0, {}),
               InfeasibleError);
  QuadraticHitting neg = f;
  neg.offset = -1.0;
  EXPECT_THROW(one_step(neg, Matrix::identity(2), set, {0.5, 0.5}, 0.0, {}), DomainError);
}

TEST(Episode, AuxBoxContainsImages) {
  testing::RandomInstanceSpec spec;
  spec.horizon = 6;
  spec.nonnegative_matrix = false;
  const Episode ep = testing::random_episode(5, spec);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  const Box& aux = ep.aux_box();
  for (std::size_t t = 0; t < ep.horizon(); ++t) {
    for (int k = 0; k < 50; ++k) {
      Vec p(ep.action_dim());
      for (double& v : p) v = u(rng);
      const Vec y = ep.step(t).fairness_matrix.apply(project(ep.step(t).action_set, p));
      for (std::size_t j = 0; j < y.size(); ++j) {
        EXPECT_GE(y[j], aux.lower[j] - 1e-12);
        EXPECT_LE(y[j], aux.upper[j] + 1e-12);
      }
    }
  }
  EXPECT_NEAR(ep.diameter(), distance(aux.lower, aux.upper), 1e-12);
}

}  // namespace
}  // namespace fairobd
