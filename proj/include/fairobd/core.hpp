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

// Problem instances and exact evaluation of the fairness-regularized
// smoothed online cost:
//
//   cost(x_1..x_T) = (1/T) sum_t [f_t(x_t) + (beta1/2)||x_t - x_{t-1}||^2]
//                    + g((1/T) sum_t A_t x_t)

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fairobd/error.hpp"
#include "fairobd/geometry.hpp"
#include "fairobd/linalg.hpp"

namespace fairobd {

// f(x) = (m/2)||x - center||^2 + linear . x + offset
struct QuadraticHitting {
  Vec center;
  double curvature = 1.0;
  Vec linear;
  double offset = 0.0;

  static QuadraticHitting centered(Vec center, double curvature) {
    Vec linear(center.size(), 0.0);
    return {std::move(center), curvature, std::move(linear), 0.0};
  }

  std::size_t dimension() const noexcept { return center.size(); }

  double value(ConstVecView x) const {
    return 0.5 * curvature * squared_distance(x, center) + dot(linear, x) +
           offset;
  }

  Vec gradient(ConstVecView x) const {
    Vec g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      g[i] = curvature * (x[i] - center[i]) + linear[i];
    return g;
  }

  // Minimizer over all of R^N.
  Vec unconstrained_minimizer() const {
    Vec v = center;
    axpy(-1.0 / curvature, linear, v);
    return v;
  }
};

// g(y) = weight * ||y||_p, p in [1, inf].
struct FairnessSpec {
  double weight = 0.0;
  double p = std::numeric_limits<double>::infinity();

  double value(ConstVecView y) const {
    if (weight == 0.0) return 0.0;
    return weight * norm_p(y, p);
  }

  // One subgradient of g at y. For p = inf ties pick the lowest index; at
  // y = 0 the zero vector is returned.
  Vec subgradient(ConstVecView y) const {
    Vec s(y.size(), 0.0);
    if (weight == 0.0 || y.empty()) return s;
    if (std::isinf(p)) {
      std::size_t arg = 0;
      double best = -1.0;
      for (std::size_t j = 0; j < y.size(); ++j) {
        if (std::abs(y[j]) > best) {
          best = std::abs(y[j]);
          arg = j;
        }
      }
      if (best > 0.0) s[arg] = weight * (y[arg] > 0.0 ? 1.0 : -1.0);
      return s;
    }
    if (p == 1.0) {
      for (std::size_t j = 0; j < y.size(); ++j)
        s[j] = y[j] > 0.0 ? weight : (y[j] < 0.0 ? -weight : 0.0);
      return s;
    }
    const double norm = norm_p(y, p);
    if (norm == 0.0) return s;
    for (std::size_t j = 0; j < y.size(); ++j) {
      const double r = std::abs(y[j]) / norm;
      const double mag = weight * std::pow(r, p - 1.0);
      s[j] = y[j] > 0.0 ? mag : (y[j] < 0.0 ? -mag : 0.0);
    }
    return s;
  }

  // Exponent of the dual norm.
  double dual_exponent() const {
    if (std::isinf(p)) return 1.0;
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    return p / (p - 1.0);
  }
};

// Smallest standard l2-relative Lipschitz constant of w||.||_p on R^M.
inline double lipschitz_constant(const FairnessSpec& spec, std::size_t dim) {
  if (!(spec.p >= 1.0)) throw DomainError("fairness norm order p must be >= 1");
  if (dim == 0) throw ShapeError("fairness dimension must be positive");
  if (spec.p >= 2.0) return spec.weight;
  return spec.weight *
         std::pow(static_cast<double>(dim), 1.0 / spec.p - 0.5);
}

// Everything about one round that is revealed at the start of that round.
struct ContextStep {
  QuadraticHitting hitting;
  Matrix fairness_matrix;  // A_t, M x N
  FeasibleSet action_set;
};

// Episode-level quantities known before play starts.
struct EpisodeMeta {
  std::size_t horizon = 0;
  std::size_t action_dim = 0;    // N
  std::size_t fairness_dim = 0;  // M
  Vec x0;
  double beta1 = 0.0;
  FairnessSpec fairness;
  Box aux_box;           // over-approximation of {A x}
  double diameter = 0.0; // Z
  double lipschitz = 0.0;  // L

  double switching_cost(ConstVecView x, ConstVecView prev) const {
    return 0.5 * beta1 * squared_distance(x, prev);
  }
};

struct EpisodeOverrides {
  std::optional<double> diameter;
  std::optional<Box> aux_box;
  std::optional<double> lipschitz;
};

// Bounding box of {A x : x in box}, by interval arithmetic per row.
inline Box image_box(const Matrix& a, const Box& box) {
  Box out{Vec(a.rows(), 0.0), Vec(a.rows(), 0.0)};
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) {
      const double u = a(r, c) * box.lower[c];
      const double v = a(r, c) * box.upper[c];
      lo += std::min(u, v);
      hi += std::max(u, v);
    }
    out.lower[r] = lo;
    out.upper[r] = hi;
  }
  return out;
}

// Immutable problem instance. Construction validates shapes, feasibility of
// x0 and nonnegativity of every hitting cost on its action set, and derives
// the auxiliary box, Z and L unless overridden.
class Episode {
 public:
  static Episode create(std::vector<ContextStep> steps, Vec x0, double beta1,
                        FairnessSpec fairness,
                        const EpisodeOverrides& overrides = {}) {
    if (steps.empty()) throw ShapeError("episode needs at least one round");
    if (!(beta1 >= 0.0) || !std::isfinite(beta1))
      throw DomainError("switching weight beta1 must be finite and >= 0");
    if (!(fairness.weight >= 0.0) || !std::isfinite(fairness.weight))
      throw DomainError("fairness weight must be finite and >= 0");
    if (!(fairness.p >= 1.0)) throw DomainError("fairness norm order p must be >= 1");

    const std::size_t n = x0.size();
    const std::size_t m = steps.front().fairness_matrix.rows();
    if (n == 0 || m == 0) throw ShapeError("empty action or fairness dimension");
    if (!all_finite(x0)) throw NumericError("x0 is not finite");

    for (std::size_t t = 0; t < steps.size(); ++t) {
      const auto& s = steps[t];
      const std::string where = " at round " + std::to_string(t + 1);
      if (s.hitting.dimension() != n || s.hitting.linear.size() != n)
        throw ShapeError("hitting cost dimension mismatch" + where);
      if (s.fairness_matrix.rows() != m || s.fairness_matrix.cols() != n)
        throw ShapeError("fairness matrix must be " + std::to_string(m) + "x" +
                         std::to_string(n) + where);
      if (dimension(s.action_set) != n)
        throw ShapeError("action set dimension mismatch" + where);
      if (!(s.hitting.curvature > 0.0) || !std::isfinite(s.hitting.curvature))
        throw DomainError("hitting curvature must be positive" + where);
      if (!all_finite(s.hitting.center) || !all_finite(s.hitting.linear) ||
          !std::isfinite(s.hitting.offset) || !s.fairness_matrix.is_finite())
        throw NumericError("non-finite context data" + where);
      if (!is_nonempty(s.action_set))
        throw InfeasibleError("action set is empty" + where);
      // The isotropic quadratic attains its minimum over the set at the
      // projection of its unconstrained minimizer.
      const Vec v = project(s.action_set, s.hitting.unconstrained_minimizer());
      const double fmin = s.hitting.value(v);
      if (fmin < -1e-9 * (1.0 + std::abs(s.hitting.offset)))
        throw DomainError("hitting cost is negative on the action set" + where +
                          " (min " + std::to_string(fmin) + ")");
    }
    if (!is_feasible(steps.front().action_set, x0, 1e-9))
      throw InfeasibleError("x0 is not feasible for the first round");

    EpisodeMeta meta;
    meta.horizon = steps.size();
    meta.action_dim = n;
    meta.fairness_dim = m;
    meta.x0 = std::move(x0);
    meta.beta1 = beta1;
    meta.fairness = fairness;

    if (overrides.aux_box) {
      if (overrides.aux_box->dimension() != m)
        throw ShapeError("aux box dimension must equal M");
      meta.aux_box = *overrides.aux_box;
    } else {
      Box aux{Vec(m, std::numeric_limits<double>::infinity()),
              Vec(m, -std::numeric_limits<double>::infinity())};
      for (const auto& s : steps) {
        const Box img = image_box(s.fairness_matrix, bounding_box(s.action_set));
        for (std::size_t j = 0; j < m; ++j) {
          aux.lower[j] = std::min(aux.lower[j], img.lower[j]);
          aux.upper[j] = std::max(aux.upper[j], img.upper[j]);
        }
      }
      meta.aux_box = std::move(aux);
    }
    meta.diameter = overrides.diameter.value_or(
        distance(meta.aux_box.lower, meta.aux_box.upper));
    meta.lipschitz =
        overrides.lipschitz.value_or(lipschitz_constant(fairness, m));
    return Episode(std::move(steps), std::move(meta));
  }

  const std::vector<ContextStep>& steps() const noexcept { return steps_; }
  const ContextStep& step(std::size_t t) const { return steps_.at(t); }
  const EpisodeMeta& meta() const noexcept { return meta_; }

  std::size_t horizon() const noexcept { return meta_.horizon; }
  std::size_t action_dim() const noexcept { return meta_.action_dim; }
  std::size_t fairness_dim() const noexcept { return meta_.fairness_dim; }
  const Vec& x0() const noexcept { return meta_.x0; }
  double beta1() const noexcept { return meta_.beta1; }
  const FairnessSpec& fairness() const noexcept { return meta_.fairness; }
  const Box& aux_box() const noexcept { return meta_.aux_box; }
  double diameter() const noexcept { return meta_.diameter; }
  double lipschitz() const noexcept { return meta_.lipschitz; }

 private:
  Episode(std::vector<ContextStep> steps, EpisodeMeta meta)
      : steps_(std::move(steps)), meta_(std::move(meta)) {}

  std::vector<ContextStep> steps_;
  EpisodeMeta meta_;
};

using Trajectory = std::vector<Vec>;

struct CostBreakdown {
  double hitting = 0.0;
  double switching = 0.0;
  double fairness = 0.0;
  double total = 0.0;
};

namespace detail {

inline void check_trajectory(const Episode& ep, const Trajectory& traj) {
  if (traj.size() != ep.horizon())
    throw ShapeError("trajectory has " + std::to_string(traj.size()) +
                     " rounds, episode has " + std::to_string(ep.horizon()));
  for (std::size_t t = 0; t < traj.size(); ++t) {
    if (traj[t].size() != ep.action_dim())
      throw ShapeError("action dimension mismatch at round " +
                       std::to_string(t + 1));
    if (!all_finite(traj[t]))
      throw NumericError("non-finite action at round " + std::to_string(t + 1));
  }
}

}  // namespace detail

// A_t x_t for every round.
inline std::vector<Vec> fairness_vectors(const Episode& ep,
                                         const Trajectory& traj) {
  detail::check_trajectory(ep, traj);
  std::vector<Vec> out;
  out.reserve(traj.size());
  for (std::size_t t = 0; t < traj.size(); ++t)
    out.push_back(ep.step(t).fairness_matrix.apply(traj[t]));
  return out;
}

// (1/T) sum_t A_t x_t
inline Vec average_fairness_vector(const Episode& ep, const Trajectory& traj) {
  const auto ys = fairness_vectors(ep, traj);
  Vec avg(ep.fairness_dim(), 0.0);
  for (const auto& y : ys) axpy(1.0, y, avg);
  for (double& v : avg) v /= static_cast<double>(ep.horizon());
  return avg;
}

inline CostBreakdown total_cost(const Episode& ep, const Trajectory& traj) {
  detail::check_trajectory(ep, traj);
  const double horizon = static_cast<double>(ep.horizon());
  CostBreakdown c;
  const Vec* prev = &ep.x0();
  for (std::size_t t = 0; t < traj.size(); ++t) {
    c.hitting += ep.step(t).hitting.value(traj[t]);
    c.switching += ep.meta().switching_cost(traj[t], *prev);
    prev = &traj[t];
  }
  c.hitting /= horizon;
  c.switching /= horizon;
  c.fairness = ep.fairness().value(average_fairness_vector(ep, traj));
  c.total = c.hitting + c.switching + c.fairness;
  return c;
}

// Measured delta of a trajectory for frame size R: sum over frames of
// || sum_{t in frame} A_t x_t - (R/T) sum_t A_t x_t ||_2.
inline double fairness_deviation(const Episode& ep, const Trajectory& traj,
                                 std::size_t frame) {
  const std::size_t horizon = ep.horizon();
  if (frame == 0 || horizon % frame != 0)
    throw FrameSizeError("frame size " + std::to_string(frame) +
                         " does not divide horizon " + std::to_string(horizon));
  const auto ys = fairness_vectors(ep, traj);
  Vec total(ep.fairness_dim(), 0.0);
  for (const auto& y : ys) axpy(1.0, y, total);
  const double share = static_cast<double>(frame) / static_cast<double>(horizon);
  double deviation = 0.0;
  for (std::size_t k = 0; k < horizon / frame; ++k) {
    Vec diff = scaled(total, -share);
    for (std::size_t t = k * frame; t < (k + 1) * frame; ++t)
      axpy(1.0, ys[t], diff);
    deviation += norm2(diff);
  }
  return deviation;
}

}  // namespace fairobd
