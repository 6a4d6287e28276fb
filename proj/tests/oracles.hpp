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

// Independent oracles and instance generators shared by the unit tests and
// the acceptance binary. Oracles never call the solvers they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "fairobd/core.hpp"
#include "fairobd/geometry.hpp"
#include "fairobd/linalg.hpp"

namespace fairobd::testing {

// Every grid point of the set at spacing h (N <= 3). Capped simplices are
// walked along their first N - 1 coordinates with the last one implied.
inline std::vector<Vec> grid_points(const FeasibleSet& set, double h) {
  std::vector<Vec> pts;
  const Box bb = bounding_box(set);
  const std::size_t n = bb.dimension();
  auto axis = [&](std::size_t i) {
    std::vector<double> v;
    const int steps = static_cast<int>(std::floor((bb.upper[i] - bb.lower[i]) / h + 1e-9));
    for (int k = 0; k <= steps; ++k) v.push_back(bb.lower[i] + k * h);
    if (v.back() < bb.upper[i] - 1e-12) v.push_back(bb.upper[i]);
    return v;
  };
  if (const auto* cs = std::get_if<CappedSimplex>(&set)) {
    if (n == 1) return {Vec{cs->total}};
    if (n == 2) {
      for (double a : axis(0)) {
        const Vec p{a, cs->total - a};
        if (is_feasible(set, p, 1e-12)) pts.push_back(p);
      }
      return pts;
    }
    for (double a : axis(0))
      for (double b : axis(1)) {
        const Vec p{a, b, cs->total - a - b};
        if (is_feasible(set, p, 1e-12)) pts.push_back(p);
      }
    return pts;
  }
  if (n == 1) {
    for (double a : axis(0)) pts.push_back({a});
  } else if (n == 2) {
    for (double a : axis(0))
      for (double b : axis(1)) pts.push_back({a, b});
  } else {
    for (double a : axis(0))
      for (double b : axis(1))
        for (double c : axis(2)) pts.push_back({a, b, c});
  }
  return pts;
}

struct GridResult {
  Vec argmin;
  double value = std::numeric_limits<double>::infinity();
};

inline GridResult grid_minimize(const FeasibleSet& set, double h,
                                const std::function<double(const Vec&)>& f) {
  GridResult r;
  for (const Vec& p : grid_points(set, h)) {
    const double v = f(p);
    if (v < r.value) {
      r.value = v;
      r.argmin = p;
    }
  }
  return r;
}

// Parametrization of a 1-D feasible slice: N = 1 boxes and N = 2 capped
// simplices are both intervals in their first coordinate.
struct Interval {
  double lo;
  double hi;
  std::function<Vec(double)> point;
};

inline Interval as_interval(const FeasibleSet& set) {
  const Box bb = bounding_box(set);
  if (const auto* cs = std::get_if<CappedSimplex>(&set)) {
    const double total = cs->total;
    if (cs->dimension() == 1) return {total, total, [total](double) { return Vec{total}; }};
    return {bb.lower[0], bb.upper[0], [total](double a) { return Vec{a, total - a}; }};
  }
  return {bb.lower[0], bb.upper[0], [](double a) { return Vec{a}; }};
}

// Dense grid plus golden-section polishing of the best cell, for objectives
// over a product of intervals (one per round).
inline double product_grid_minimize(const std::vector<Interval>& dims, double h,
                                    const std::function<double(const std::vector<Vec>&)>& f,
                                    std::vector<Vec>* best_point = nullptr) {
  const std::size_t k = dims.size();
  std::vector<std::vector<double>> axes(k);
  for (std::size_t i = 0; i < k; ++i) {
    const int steps = std::max(0, static_cast<int>(std::floor((dims[i].hi - dims[i].lo) / h)));
    for (int s = 0; s <= steps; ++s) axes[i].push_back(dims[i].lo + s * h);
    if (axes[i].back() < dims[i].hi - 1e-12) axes[i].push_back(dims[i].hi);
  }
  std::vector<double> coords(k);
  auto eval = [&](const std::vector<double>& c) {
    std::vector<Vec> pts(k);
    for (std::size_t i = 0; i < k; ++i) pts[i] = dims[i].point(c[i]);
    return f(pts);
  };
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_c(k);
  std::vector<std::size_t> idx(k, 0);
  for (;;) {
    for (std::size_t i = 0; i < k; ++i) coords[i] = axes[i][idx[i]];
    const double v = eval(coords);
    if (v < best) {
      best = v;
      best_c = coords;
    }
    std::size_t i = 0;
    while (i < k && ++idx[i] == axes[i].size()) idx[i++] = 0;
    if (i == k) break;
  }
  // Coordinate-wise golden-section refinement around the best grid point.
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int sweep = 0; sweep < 30; ++sweep) {
    for (std::size_t i = 0; i < k; ++i) {
      double lo = std::max(dims[i].lo, best_c[i] - h);
      double hi = std::min(dims[i].hi, best_c[i] + h);
      auto at = [&](double a) {
        auto c = best_c;
        c[i] = a;
        return eval(c);
      };
      double x1 = hi - phi * (hi - lo);
      double x2 = lo + phi * (hi - lo);
      double f1 = at(x1);
      double f2 = at(x2);
      for (int it = 0; it < 60; ++it) {
        if (f1 < f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - phi * (hi - lo);
          f1 = at(x1);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + phi * (hi - lo);
          f2 = at(x2);
        }
      }
      const double a = 0.5 * (lo + hi);
      const double v = at(a);
      if (v < best) {
        best = v;
        best_c[i] = a;
      }
    }
  }
  if (best_point) {
    best_point->resize(k);
    for (std::size_t i = 0; i < k; ++i) (*best_point)[i] = dims[i].point(best_c[i]);
  }
  return best;
}

// Direct evaluation of the full cost, written independently of total_cost.
inline double direct_cost(const Episode& ep, const std::vector<Vec>& x) {
  const std::size_t horizon = ep.horizon();
  double hit = 0.0;
  double sw = 0.0;
  Vec sum(ep.fairness_dim(), 0.0);
  for (std::size_t t = 0; t < horizon; ++t) {
    const auto& s = ep.step(t);
    const auto& f = s.hitting;
    double q = 0.0;
    double lin = 0.0;
    for (std::size_t i = 0; i < x[t].size(); ++i) {
      q += (x[t][i] - f.center[i]) * (x[t][i] - f.center[i]);
      lin += f.linear[i] * x[t][i];
    }
    hit += 0.5 * f.curvature * q + lin + f.offset;
    const Vec& prev = t == 0 ? ep.x0() : x[t - 1];
    double d = 0.0;
    for (std::size_t i = 0; i < x[t].size(); ++i) d += (x[t][i] - prev[i]) * (x[t][i] - prev[i]);
    sw += 0.5 * ep.beta1() * d;
    for (std::size_t r = 0; r < sum.size(); ++r)
      for (std::size_t c = 0; c < x[t].size(); ++c)
        sum[r] += s.fairness_matrix(r, c) * x[t][c];
  }
  const double inv = 1.0 / static_cast<double>(horizon);
  for (double& v : sum) v *= inv;
  double norm = 0.0;
  const double p = ep.fairness().p;
  if (std::isinf(p)) {
    for (double v : sum) norm = std::max(norm, std::abs(v));
  } else {
    for (double v : sum) norm += std::pow(std::abs(v), p);
    norm = std::pow(norm, 1.0 / p);
  }
  return inv * (hit + sw) + ep.fairness().weight * norm;
}

struct RandomInstanceSpec {
  std::size_t n = 7;
  std::size_t m = 7;
  std::size_t horizon = 72;
  double curvature_lo = 1.0;
  double curvature_hi = 40.0;
  double beta1_lo = 0.0;
  double beta1_hi = 2000.0;
  double weight = 3.5;
  double p = std::numeric_limits<double>::infinity();
  bool capped_simplex = true;
  bool nonnegative_matrix = true;
};

// Random quadratic instance; each hitting cost is nonnegative on its set
// because the offset lifts it by the (analytic) minimum when needed.
inline Episode random_episode(std::uint64_t seed, const RandomInstanceSpec& spec,
                              double* curvature_out = nullptr) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double m = spec.curvature_lo + (spec.curvature_hi - spec.curvature_lo) * u(rng);
  const double beta1 = spec.beta1_lo + (spec.beta1_hi - spec.beta1_lo) * u(rng);
  if (curvature_out) *curvature_out = m;
  std::vector<ContextStep> steps;
  Vec caps(spec.n);
  for (double& c : caps) c = 0.5 + u(rng);
  double cap_sum = 0.0;
  for (double c : caps) cap_sum += c;
  for (std::size_t t = 0; t < spec.horizon; ++t) {
    QuadraticHitting f;
    f.curvature = m;
    f.center.resize(spec.n);
    f.linear.resize(spec.n);
    for (auto& c : f.center) c = u(rng);
    for (auto& b : f.linear) b = u(rng);
    Matrix a(spec.m, spec.n, 0.0);
    for (std::size_t r = 0; r < spec.m; ++r)
      for (std::size_t c = 0; c < spec.n; ++c)
        a(r, c) = spec.nonnegative_matrix ? u(rng) : 2.0 * u(rng) - 1.0;
    FeasibleSet set;
    if (spec.capped_simplex)
      set = make_capped_simplex((0.1 + 0.8 * u(rng)) * cap_sum, caps);
    else
      set = make_box(spec.n, 0.0, 1.0);
    const Vec v = project(set, f.unconstrained_minimizer());
    f.offset = std::max(0.0, -f.value(v));
    steps.push_back({std::move(f), std::move(a), std::move(set)});
  }
  const Vec x0 = project(steps.front().action_set, Vec(spec.n, 0.0));
  return Episode::create(std::move(steps), x0, beta1, FairnessSpec{spec.weight, spec.p});
}

// f = ||x - (0.5, 0.5)||^2, A = I, g = 3.5||.||_inf, unit simplex, x0 at the
// center. The constant center trajectory is optimal with total cost 1.75.
inline Episode symmetric_episode(std::size_t horizon) {
  std::vector<ContextStep> steps;
  for (std::size_t t = 0; t < horizon; ++t)
    steps.push_back({QuadraticHitting::centered({0.5, 0.5}, 2.0), Matrix::identity(2),
                     make_capped_simplex(1.0, {1.0, 1.0})});
  return Episode::create(std::move(steps), {0.5, 0.5}, 0.0,
                         FairnessSpec{3.5, std::numeric_limits<double>::infinity()});
}

}  // namespace fairobd::testing
