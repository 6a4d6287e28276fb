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

#pragma once

// Mirror-descent machinery for the dual variable kappa: reference functions,
// Bregman divergences and the one-step dual update
//
//   kappa_{t+1} = argmin_kappa <d_t, kappa> + (1/eta) V_h(kappa, kappa_t).

#include <cfloat>
#include <cmath>
#include <string>

#include "fairobd/error.hpp"
#include "fairobd/linalg.hpp"

namespace fairobd {

enum class ReferenceKind { kSquaredL2, kNegativeEntropy };

inline constexpr double kEntropyFloor = 1e-300;

struct ReferenceFunction {
  ReferenceKind kind = ReferenceKind::kSquaredL2;
  double strong_convexity = 1.0;  // l
  double smoothness = 1.0;        // beta_2

  static ReferenceFunction squared_l2() { return {}; }

  // h(k) = sum k_i log k_i restricted to [kappa_min, kappa_max]^M, where it
  // is (1/kappa_max)-strongly convex and (1/kappa_min)-smooth.
  static ReferenceFunction negative_entropy(double kappa_min, double kappa_max) {
    if (!(kappa_min > 0.0) || !(kappa_max >= kappa_min))
      throw DomainError("entropy bounds need 0 < kappa_min <= kappa_max");
    return {ReferenceKind::kNegativeEntropy, 1.0 / kappa_max, 1.0 / kappa_min};
  }

  double value(ConstVecView k) const {
    if (kind == ReferenceKind::kSquaredL2) return 0.5 * dot(k, k);
    double s = 0.0;
    for (double v : k) {
      if (!(v > 0.0)) throw DomainError("negative entropy needs positive input");
      s += v * std::log(v);
    }
    return s;
  }

  Vec gradient(ConstVecView k) const {
    Vec g(k.begin(), k.end());
    if (kind == ReferenceKind::kSquaredL2) return g;
    for (double& v : g) v = std::log(std::max(v, kEntropyFloor)) + 1.0;
    return g;
  }
};

struct DualState {
  Vec kappa;
  bool clamp_nonnegative = true;
};

// V_h(x, y) = h(x) - h(y) - <grad h(y), x - y>
inline double bregman(const ReferenceFunction& h, ConstVecView x,
                      ConstVecView y) {
  if (x.size() != y.size()) throw ShapeError("bregman arguments differ in size");
  if (h.kind == ReferenceKind::kSquaredL2) return 0.5 * squared_distance(x, y);
  // Closed form sum x log(x/y) - x + y avoids cancellation between h terms.
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw DomainError("negative entropy bregman needs positive arguments");
    s += x[i] * (std::log(x[i]) - std::log(y[i])) - x[i] + y[i];
  }
  return std::max(s, 0.0);
}

inline DualState dual_update(const ReferenceFunction& h, const DualState& state,
                             ConstVecView d, double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw DomainError("learning rate must be positive and finite");
  if (d.size() != state.kappa.size())
    throw ShapeError("dual gradient and kappa differ in size");
  if (!all_finite(d)) throw NumericError("dual gradient is not finite");

  DualState next = state;
  if (h.kind == ReferenceKind::kSquaredL2) {
    for (std::size_t i = 0; i < d.size(); ++i) {
      next.kappa[i] = state.kappa[i] - eta * d[i];
      if (state.clamp_nonnegative) next.kappa[i] = std::max(next.kappa[i], 0.0);
    }
    return next;
  }
  // Multiplicative update, evaluated in log space.
  const double log_max = std::log(DBL_MAX);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(state.kappa[i] > 0.0))
      throw DomainError("negative entropy update needs positive kappa");
    const double log_next =
        std::log(std::max(state.kappa[i], kEntropyFloor)) - eta * d[i];
    if (log_next > log_max)
      throw NumericError("dual update overflow at coordinate " +
                         std::to_string(i));
    next.kappa[i] = std::max(std::exp(log_next), kEntropyFloor);
  }
  return next;
}

}  // namespace fairobd
