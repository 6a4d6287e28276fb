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

// Feasible action sets and their exact Euclidean projections.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <variant>

#include "fairobd/error.hpp"
#include "fairobd/linalg.hpp"

namespace fairobd {

// Axis-aligned box {x : lower <= x <= upper}.
struct Box {
  Vec lower;
  Vec upper;

  std::size_t dimension() const noexcept { return lower.size(); }
};

// {x : sum_i x_i = total, 0 <= x_i <= caps_i}.
struct CappedSimplex {
  double total = 0.0;
  Vec caps;

  std::size_t dimension() const noexcept { return caps.size(); }
  double capacity() const {
    return std::accumulate(caps.begin(), caps.end(), 0.0);
  }
};

using FeasibleSet = std::variant<Box, CappedSimplex>;

inline Box make_box(Vec lower, Vec upper) {
  if (lower.size() != upper.size())
    throw ShapeError("box bounds have different lengths");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!(lower[i] <= upper[i]))
      throw DomainError("box lower bound exceeds upper bound at coordinate " +
                        std::to_string(i));
  }
  return Box{std::move(lower), std::move(upper)};
}

inline Box make_box(std::size_t n, double lo, double hi) {
  return make_box(Vec(n, lo), Vec(n, hi));
}

inline CappedSimplex make_capped_simplex(double total, Vec caps) {
  if (!std::isfinite(total)) throw NumericError("capped simplex total is not finite");
  for (double c : caps) {
    if (!(c > 0.0)) throw DomainError("capped simplex caps must be positive");
  }
  return CappedSimplex{total, std::move(caps)};
}

inline std::size_t dimension(const FeasibleSet& set) {
  return std::visit([](const auto& s) { return s.dimension(); }, set);
}

// Nonempty check; for the capped simplex this is 0 <= total <= sum caps.
inline bool is_nonempty(const FeasibleSet& set, double tol = 1e-12) {
  if (const auto* cs = std::get_if<CappedSimplex>(&set)) {
    return cs->total >= -tol && cs->total <= cs->capacity() + tol;
  }
  const auto& box = std::get<Box>(set);
  for (std::size_t i = 0; i < box.dimension(); ++i)
    if (box.lower[i] > box.upper[i]) return false;
  return true;
}

namespace detail {

inline void require_dimension(const FeasibleSet& set, ConstVecView point) {
  if (point.size() != dimension(set))
    throw ShapeError("point has dimension " + std::to_string(point.size()) +
                     ", set has dimension " + std::to_string(dimension(set)));
}

inline double clamped_sum(ConstVecView p, ConstVecView caps, double tau) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    s += std::clamp(p[i] - tau, 0.0, caps[i]);
  return s;
}

inline Vec project_capped_simplex(const CappedSimplex& cs, ConstVecView p) {
  const std::size_t n = p.size();
  const double capacity = cs.capacity();
  if (cs.total < 0.0 || cs.total > capacity * (1.0 + 1e-12) + 1e-12) {
    throw InfeasibleError("capped simplex is empty: total " +
                          std::to_string(cs.total) + " exceeds capacity " +
                          std::to_string(capacity));
  }
  if (cs.total <= 0.0) return Vec(n, 0.0);
  if (cs.total >= capacity) return cs.caps;

  // x_i(tau) = clamp(p_i - tau, 0, cap_i) is nonincreasing in tau.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    lo = std::min(lo, p[i] - cs.caps[i]);
    hi = std::max(hi, p[i]);
  }
  double tau = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    tau = 0.5 * (lo + hi);
    const double residual = clamped_sum(p, cs.caps, tau) - cs.total;
    if (std::abs(residual) < 1e-12) break;
    if (residual > 0.0)
      lo = tau;
    else
      hi = tau;
  }

  // Finish exactly on the active set identified by bisection.
  double free_sum = 0.0;
  double capped_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = p[i] - tau;
    if (v >= cs.caps[i]) {
      capped_sum += cs.caps[i];
    } else if (v > 0.0) {
      free_sum += p[i];
      ++free_count;
    }
  }
  Vec x(n);
  const double bisect_residual =
      std::abs(clamped_sum(p, cs.caps, tau) - cs.total);
  if (free_count > 0) {
    const double exact_tau =
        (free_sum + capped_sum - cs.total) / static_cast<double>(free_count);
    const double exact_residual =
        std::abs(clamped_sum(p, cs.caps, exact_tau) - cs.total);
    if (exact_residual <= bisect_residual) tau = exact_tau;
  }
  for (std::size_t i = 0; i < n; ++i)
    x[i] = std::clamp(p[i] - tau, 0.0, cs.caps[i]);
  return x;
}

}  // namespace detail

inline Vec project(const FeasibleSet& set, ConstVecView point) {
  detail::require_dimension(set, point);
  if (!all_finite(point)) throw NumericError("cannot project a non-finite point");
  if (const auto* cs = std::get_if<CappedSimplex>(&set))
    return detail::project_capped_simplex(*cs, point);
  const auto& box = std::get<Box>(set);
  Vec x(point.begin(), point.end());
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = std::clamp(x[i], box.lower[i], box.upper[i]);
  return x;
}

inline bool is_feasible(const FeasibleSet& set, ConstVecView point,
                        double tol) {
  if (point.size() != dimension(set)) return false;
  if (!all_finite(point)) return false;
  if (const auto* cs = std::get_if<CappedSimplex>(&set)) {
    double s = 0.0;
    for (std::size_t i = 0; i < point.size(); ++i) {
      if (point[i] < -tol || point[i] > cs->caps[i] + tol) return false;
      s += point[i];
    }
    return std::abs(s - cs->total) <= tol;
  }
  const auto& box = std::get<Box>(set);
  for (std::size_t i = 0; i < point.size(); ++i) {
    if (point[i] < box.lower[i] - tol || point[i] > box.upper[i] + tol)
      return false;
  }
  return true;
}

// Tightest axis-aligned box containing the set.
inline Box bounding_box(const FeasibleSet& set) {
  if (const auto* box = std::get_if<Box>(&set)) return *box;
  const auto& cs = std::get<CappedSimplex>(set);
  const double capacity = cs.capacity();
  Box b{Vec(cs.dimension()), Vec(cs.dimension())};
  for (std::size_t i = 0; i < cs.dimension(); ++i) {
    b.lower[i] = std::max(0.0, cs.total - (capacity - cs.caps[i]));
    b.upper[i] = std::min(cs.caps[i], cs.total);
  }
  return b;
}

// argmin_{x in set} cost . x. Ties resolve toward the lowest index.
inline Vec linear_minimize(const FeasibleSet& set, ConstVecView cost) {
  detail::require_dimension(set, cost);
  const std::size_t n = cost.size();
  Vec x(n, 0.0);
  if (const auto* box = std::get_if<Box>(&set)) {
    for (std::size_t i = 0; i < n; ++i)
      x[i] = cost[i] < 0.0 ? box->upper[i] : box->lower[i];
    return x;
  }
  const auto& cs = std::get<CappedSimplex>(set);
  if (cs.total > cs.capacity() * (1.0 + 1e-12) + 1e-12 || cs.total < 0.0)
    throw InfeasibleError("capped simplex is empty");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cost[a] < cost[b];
  });
  double remaining = cs.total;
  for (std::size_t i : order) {
    if (remaining <= 0.0) break;
    x[i] = std::min(cs.caps[i], remaining);
    remaining -= x[i];
  }
  return x;
}

// Euclidean diameter of the set (exact for boxes, the bounding-box diagonal
// for capped simplices).
inline double diameter_bound(const FeasibleSet& set) {
  const Box b = bounding_box(set);
  return distance(b.lower, b.upper);
}

}  // namespace fairobd
