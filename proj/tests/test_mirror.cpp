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
#include <random>

#include "fairobd/mirror.hpp"

namespace fairobd {
namespace {

TEST(Bregman, Examples) {
  const auto l2 = ReferenceFunction::squared_l2();
  const auto ent = ReferenceFunction::negative_entropy(0.01, 100.0);
  EXPECT_DOUBLE_EQ(bregman(l2, Vec{1.0, 2.0}, Vec{0.0, 0.0}), 2.5);
  EXPECT_DOUBLE_EQ(bregman(l2, Vec{0.3, -2.0}, Vec{0.3, -2.0}), 0.0);
  EXPECT_DOUBLE_EQ(bregman(ent, Vec{0.3, 2.0}, Vec{0.3, 2.0}), 0.0);
  EXPECT_NEAR(bregman(ent, Vec{1.0}, Vec{std::exp(1.0)}), std::exp(1.0) - 2.0, 1e-15);
  EXPECT_THROW(bregman(ent, Vec{0.0}, Vec{1.0}), DomainError);
  EXPECT_THROW(ent.value(Vec{-1.0}), DomainError);
}

TEST(Bregman, EntropyMatchesDefinition) {
  const auto ent = ReferenceFunction::negative_entropy(0.01, 100.0);
  const Vec x{0.4, 1.7, 3.0};
  const Vec y{1.1, 0.2, 2.5};
  const double direct = ent.value(x) - ent.value(y) - dot(ent.gradient(y), x - y);
  EXPECT_NEAR(bregman(ent, x, y), direct, 1e-12);
}

TEST(ReferenceFunction, Constants) {
  const auto l2 = ReferenceFunction::squared_l2();
  EXPECT_EQ(l2.strong_convexity, 1.0);
  EXPECT_EQ(l2.smoothness, 1.0);
  const auto ent = ReferenceFunction::negative_entropy(0.5, 4.0);
  EXPECT_DOUBLE_EQ(ent.strong_convexity, 0.25);
  EXPECT_DOUBLE_EQ(ent.smoothness, 2.0);
  EXPECT_THROW(ReferenceFunction::negative_entropy(0.0, 1.0), DomainError);
  EXPECT_THROW(ReferenceFunction::negative_entropy(2.0, 1.0), DomainError);
}

TEST(DualUpdate, Examples) {
  const auto l2 = ReferenceFunction::squared_l2();
  EXPECT_DOUBLE_EQ(dual_update(l2, {{3.0}, false}, Vec{0.5}, 0.001).kappa[0], 2.9995);
  EXPECT_DOUBLE_EQ(dual_update(l2, {{0.1}, true}, Vec{200.0}, 0.001).kappa[0], 0.0);
  EXPECT_DOUBLE_EQ(dual_update(l2, {{0.1}, false}, Vec{200.0}, 0.001).kappa[0], 0.1 - 0.2);
  const auto ent = ReferenceFunction::negative_entropy(1e-3, 1e3);
  EXPECT_NEAR(dual_update(ent, {{1.0}, true}, Vec{1.0}, 0.5).kappa[0], std::exp(-0.5), 1e-15);
}

TEST(DualUpdate, Errors) {
  const auto l2 = ReferenceFunction::squared_l2();
  const auto ent = ReferenceFunction::negative_entropy(1e-3, 1e3);
  EXPECT_THROW(dual_update(l2, {{1.0}, true}, Vec{1.0}, 0.0), DomainError);
  EXPECT_THROW(dual_update(l2, {{1.0}, true}, Vec{1.0, 2.0}, 0.1), ShapeError);
  EXPECT_THROW(dual_update(l2, {{1.0}, true}, Vec{NAN}, 0.1), NumericError);
  EXPECT_THROW(dual_update(ent, {{1.0, 1.0}, true}, Vec{0.0, -1e308}, 10.0), NumericError);
  try {
    dual_update(ent, {{1.0, 1.0}, true}, Vec{0.0, -1e308}, 10.0);
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("coordinate 1"), std::string::npos);
  }
  EXPECT_THROW(dual_update(ent, {{0.0}, true}, Vec{1.0}, 0.1), DomainError);
}

struct Fuzz {
  DualState state;
  Vec d;
  Vec other;  // kappa'
  double eta;
};

Fuzz fuzz(std::mt19937_64& rng, bool entropy) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n(0.0, 1.0);
  const std::size_t m = 1 + rng() % 7;
  Fuzz f;
  f.state.clamp_nonnegative = false;
  f.eta = std::pow(10.0, -3.0 + 3.0 * u(rng));
  f.d.resize(m);
  f.state.kappa.resize(m);
  f.other.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    f.d[i] = 3.0 * n(rng);
    f.state.kappa[i] = entropy ? 0.1 + 5.0 * u(rng) : 5.0 * n(rng);
    f.other[i] = entropy ? 0.1 + 5.0 * u(rng) : 5.0 * n(rng);
  }
  return f;
}

class DualUpdateProperties : public ::testing::TestWithParam<bool> {};

TEST_P(DualUpdateProperties, PushBackStationarityAndStepBound) {
  const bool entropy = GetParam();
  // Bounds wide enough to contain every iterate of the fuzz.
  const auto h = entropy ? ReferenceFunction::negative_entropy(1e-3, 1e3)
                         : ReferenceFunction::squared_l2();
  std::mt19937_64 rng(entropy ? 2 : 1);
  for (int k = 0; k < 500; ++k) {
    const Fuzz f = fuzz(rng, entropy);
    const Vec next = dual_update(h, f.state, f.d, f.eta).kappa;
    const Vec& cur = f.state.kappa;
    const double lhs = dot(next, f.d) + bregman(h, next, cur) / f.eta;
    const double rhs = dot(f.other, f.d) + bregman(h, f.other, cur) / f.eta -
                       bregman(h, f.other, next) / f.eta;
    const double scale = 1.0 + std::abs(lhs) + std::abs(rhs);
    EXPECT_GE(rhs - lhs, -1e-9 * scale);

    const Vec gn = h.gradient(next);
    const Vec gc = h.gradient(cur);
    for (std::size_t i = 0; i < cur.size(); ++i)
      EXPECT_NEAR(f.d[i] + (gn[i] - gc[i]) / f.eta, 0.0, 1e-9 * (1.0 + std::abs(f.d[i])));

    if (!entropy) {
      EXPECT_LE(distance(next, cur), f.eta * norm2(f.d) / h.strong_convexity + 1e-12);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(References, DualUpdateProperties, ::testing::Bool(),
                         [](const auto& info) { return info.param ? "Entropy" : "SquaredL2"; });

TEST(DualUpdate, ClampKeepsNonnegative) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 3.0);
  DualState s{{0.0, 1.0, 2.0}, true};
  for (int k = 0; k < 200; ++k) {
    s = dual_update(ReferenceFunction::squared_l2(), s, Vec{n(rng), n(rng), n(rng)}, 0.3);
    for (double v : s.kappa) EXPECT_GE(v, 0.0);
  }
}

}  // namespace
}  // namespace fairobd
