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

// Per-round primal solves: the hitting-cost minimizer v_t, the action
// subproblem
//
//   min_x f_t(x) + lambda1 (beta1/2)||x - x_prev||^2 + (lambda2/2)||x - v_t||^2
//         + kappa . A_t x
//
// and the auxiliary subproblem min_{z in aux box} g(z) - kappa . z. Given
// kappa the two are independent.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "fairobd/core.hpp"
#include "fairobd/error.hpp"
#include "fairobd/geometry.hpp"
#include "fairobd/linalg.hpp"

namespace fairobd {

enum class StepRule { kFixed, kBacktracking };

struct SolveOptions {
  double grad_tol = 1e-8;  // on the projected-gradient mapping norm
  int max_iters = 10000;
  StepRule step_rule = StepRule::kBacktracking;
  double initial_step = 1.0;
  std::uint64_t seed = 0;
  int restarts = 0;  // extra randomized restarts for offline solvers

  void validate() const {
    if (!(grad_tol > 0.0)) throw DomainError("grad_tol must be positive");
    if (max_iters < 1) throw DomainError("max_iters must be >= 1");
    if (!(initial_step > 0.0)) throw DomainError("initial_step must be positive");
  }
};

struct PgResult {
  Vec x;
  double residual = 0.0;  // projected-gradient mapping norm at x
  int iterations = 0;
};

// Projected gradient descent for a smooth convex objective over one set.
// `lipschitz` is used by the fixed step rule; backtracking halves from
// opts.initial_step and keeps the accepted step for later iterations.
inline PgResult projected_gradient(
    const FeasibleSet& set, const std::function<double(ConstVecView)>& value,
    const std::function<Vec(ConstVecView)>& gradient, Vec x, double lipschitz,
    const SolveOptions& opts) {
  opts.validate();
  x = project(set, x);
  double step = opts.step_rule == StepRule::kFixed ? 1.0 / lipschitz
                                                   : opts.initial_step;
  PgResult res;
  double fx = value(x);
  for (int it = 0; it < opts.max_iters; ++it) {
    const Vec g = gradient(x);
    Vec trial;
    for (;;) {
      Vec y = x;
      axpy(-step, g, y);
      trial = project(set, y);
      if (opts.step_rule == StepRule::kFixed) break;
      const Vec diff = trial - x;
      const double model =
          fx + dot(g, diff) + squared_distance(trial, x) / (2.0 * step);
      const double ft = value(trial);
      const double roundoff =
          16.0 * std::numeric_limits<double>::epsilon() *
          std::max({std::abs(fx), std::abs(ft), std::abs(model)});
      if (ft <= model + roundoff || step < 1e-300) break;
      step *= 0.5;
    }
    const double mapping = distance(trial, x) / step;
    res.iterations = it + 1;
    res.residual = mapping;
    x = std::move(trial);
    fx = value(x);
    if (mapping <= opts.grad_tol) break;
  }
  // Report the residual at the returned point.
  {
    const Vec g = gradient(x);
    Vec y = x;
    axpy(-step, g, y);
    res.residual = distance(project(set, y), x) / step;
  }
  res.x = std::move(x);
  return res;
}

// The x-part of the per-round objective.
struct ActionObjective {
  const QuadraticHitting* hitting = nullptr;
  Vec prev;
  double switch_weight = 0.0;  // lambda1 * beta1
  Vec anchor;                  // v_t
  double anchor_weight = 0.0;  // lambda2
  Vec dual_linear;             // A_t^T kappa (empty when kappa = 0)

  double curvature() const {
    return hitting->curvature + switch_weight + anchor_weight;
  }

  double value(ConstVecView x) const {
    double v = hitting->value(x);
    if (switch_weight != 0.0) v += 0.5 * switch_weight * squared_distance(x, prev);
    if (anchor_weight != 0.0) v += 0.5 * anchor_weight * squared_distance(x, anchor);
    if (!dual_linear.empty()) v += dot(dual_linear, x);
    return v;
  }

  Vec gradient(ConstVecView x) const {
    Vec g = hitting->gradient(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (switch_weight != 0.0) g[i] += switch_weight * (x[i] - prev[i]);
      if (anchor_weight != 0.0) g[i] += anchor_weight * (x[i] - anchor[i]);
      if (!dual_linear.empty()) g[i] += dual_linear[i];
    }
    return g;
  }
};

inline PgResult minimize_action(const ActionObjective& obj,
                                const FeasibleSet& set, Vec start,
                                const SolveOptions& opts) {
  PgResult r = projected_gradient(
      set, [&](ConstVecView x) { return obj.value(x); },
      [&](ConstVecView x) { return obj.gradient(x); }, std::move(start),
      obj.curvature(), opts);
  if (r.residual > opts.grad_tol) {
    throw ConvergenceError("action subproblem did not converge in " +
                               std::to_string(opts.max_iters) + " iterations",
                           r.residual);
  }
  return r;
}

// v_t = argmin_{x in X_t} f_t(x)
inline Vec hitting_minimizer(const ContextStep& step,
                             const SolveOptions& opts = {}) {
  ActionObjective obj;
  obj.hitting = &step.hitting;
  const Vec start = step.hitting.unconstrained_minimizer();
  return minimize_action(obj, step.action_set, start, opts).x;
}

namespace detail {

// min_{lo <= z <= hi} w|z|_1 - kappa . z, coordinate by coordinate. Flat
// directions resolve toward `ref`.
inline Vec aux_solve_l1(double w, ConstVecView kappa, const Box& box,
                        ConstVecView ref) {
  const std::size_t m = kappa.size();
  Vec z(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double lo = box.lower[j];
    const double hi = box.upper[j];
    const double k = kappa[j];
    if (k > w) {
      z[j] = hi;
    } else if (k < -w) {
      z[j] = lo;
    } else if (w == 0.0) {  // k == 0: objective flat in this coordinate
      z[j] = std::clamp(ref[j], lo, hi);
    } else if (k == w) {    // flat on [max(0, lo), hi]
      z[j] = hi >= 0.0 ? std::clamp(ref[j], std::max(0.0, lo), hi) : hi;
    } else if (k == -w) {   // flat on [lo, min(0, hi)]
      z[j] = lo <= 0.0 ? std::clamp(ref[j], lo, std::min(0.0, hi)) : lo;
    } else {
      z[j] = std::clamp(0.0, lo, hi);
    }
  }
  return z;
}

// min_{lo <= z <= hi} w|z|_inf - kappa . z. With s = |z|_inf fixed the best
// z is coordinatewise, and the resulting phi(s) is convex piecewise linear
// with breakpoints at |lo_j|, |hi_j|; enumerate them.
inline Vec aux_solve_linf(double w, ConstVecView kappa, const Box& box,
                          ConstVecView ref) {
  const std::size_t m = kappa.size();
  double s_min = 0.0;
  double s_max = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    s_min = std::max({s_min, box.lower[j], -box.upper[j]});
    s_max = std::max({s_max, std::abs(box.lower[j]), std::abs(box.upper[j])});
  }
  auto coord = [&](std::size_t j, double s) {
    const double lo = std::max(box.lower[j], -s);
    const double hi = std::min(box.upper[j], s);
    if (kappa[j] > 0.0) return hi;
    if (kappa[j] < 0.0) return lo;
    return std::clamp(ref[j], lo, hi);
  };
  auto phi = [&](double s) {
    double v = w * s;
    for (std::size_t j = 0; j < m; ++j)
      if (kappa[j] != 0.0) v -= kappa[j] * coord(j, s);
    return v;
  };

  std::vector<double> cand{s_min, s_max};
  for (std::size_t j = 0; j < m; ++j) {
    for (double b : {std::abs(box.lower[j]), std::abs(box.upper[j])})
      if (b > s_min && b < s_max) cand.push_back(b);
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  double best = std::numeric_limits<double>::infinity();
  for (double s : cand) best = std::min(best, phi(s));
  const double tie = 1e-13 * (1.0 + std::abs(best));
  double s_a = s_max;
  double s_b = s_min;
  for (double s : cand) {
    if (phi(s) <= best + tie) {
      s_a = std::min(s_a, s);
      s_b = std::max(s_b, s);
    }
  }
  // Among optimal s prefer the one matching the reference point.
  double s_ref = 0.0;
  for (std::size_t j = 0; j < m; ++j)
    s_ref = std::max(s_ref, std::abs(std::clamp(ref[j], box.lower[j], box.upper[j])));
  const double s = std::clamp(s_ref, s_a, s_b);

  Vec z(m);
  for (std::size_t j = 0; j < m; ++j) z[j] = coord(j, s);
  return z;
}

// Generic p. phi(s) = w s - max{kappa . z : z in box, |z|_p <= s} is convex
// in s. Given the multiplier nu of the norm constraint the inner maximum is
// separable, z_j = clamp(sign(k_j) (|k_j| / (p nu))^{1/(p-1)}), so nu comes
// from bisection and s from golden-section search.
inline Vec aux_solve_generic(const FairnessSpec& g, ConstVecView kappa,
                             const Box& box) {
  const std::size_t m = kappa.size();
  const double p = g.p;
  auto at_nu = [&](double nu) {
    Vec z(m);
    for (std::size_t j = 0; j < m; ++j) {
      double t = 0.0;
      if (kappa[j] != 0.0) {
        if (nu <= 0.0)
          t = kappa[j] > 0.0 ? box.upper[j] : box.lower[j];
        else
          t = std::copysign(std::pow(std::abs(kappa[j]) / (p * nu), 1.0 / (p - 1.0)),
                            kappa[j]);
      }
      z[j] = std::clamp(t, box.lower[j], box.upper[j]);
    }
    return z;
  };
  const Vec far = at_nu(0.0);
  const Vec near = at_nu(std::numeric_limits<double>::infinity());
  auto inner = [&](double s) {
    if (norm_p(far, p) <= s) return far;
    double lo = -700.0;  // log nu, norm too large
    double hi = 700.0;   // log nu, norm within s
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (norm_p(at_nu(std::exp(mid)), p) <= s)
        hi = mid;
      else
        lo = mid;
    }
    return at_nu(std::exp(hi));
  };
  auto obj = [&](ConstVecView z) { return g.value(z) - dot(kappa, z); };

  Vec best = obj(near) <= obj(far) ? near : far;
  double best_val = obj(best);
  auto consider = [&](const Vec& z) {
    const double v = obj(z);
    if (v < best_val) {
      best_val = v;
      best = z;
    }
    return v;
  };
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = norm_p(near, p);
  double b = norm_p(far, p);
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = consider(inner(x1));
  double f2 = consider(inner(x2));
  for (int it = 0; it < 120 && b - a > 1e-15 * (1.0 + b); ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = consider(inner(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = consider(inner(x2));
    }
  }
  return best;
}

}  // namespace detail

// z_t = argmin_{z in aux box} g(z) - kappa . z. When the minimizer is not
// unique the one closest to `ref` (typically A_t x_t) is preferred, so a
// zero dual with zero fairness weight leaves d_t = 0.
inline Vec solve_aux(const FairnessSpec& g, ConstVecView kappa, const Box& box,
                     ConstVecView ref) {
  if (kappa.size() != box.dimension() || ref.size() != box.dimension())
    throw ShapeError("aux subproblem dimension mismatch");
  if (!all_finite(kappa)) throw NumericError("kappa is not finite");
  if (g.weight == 0.0 || g.p == 1.0) return detail::aux_solve_l1(g.weight, kappa, box, ref);
  if (std::isinf(g.p)) return detail::aux_solve_linf(g.weight, kappa, box, ref);
  return detail::aux_solve_generic(g, kappa, box);
}

inline double aux_objective(const FairnessSpec& g, ConstVecView kappa,
                            ConstVecView z) {
  return g.value(z) - dot(kappa, z);
}

struct RoundSolution {
  Vec x;
  Vec z;
  Vec v;  // hitting minimizer
  double residual = 0.0;
};

inline void validate_lambdas(double lambda1, double lambda2) {
  if (!(lambda1 >= 0.0 && lambda1 <= 1.0))
    throw DomainError("lambda1 must lie in [0, 1]");
  if (!(lambda2 >= 0.0) || !std::isfinite(lambda2))
    throw DomainError("lambda2 must be finite and >= 0");
}

inline ActionObjective make_action_objective(const ContextStep& step,
                                             ConstVecView x_prev,
                                             ConstVecView kappa, double lambda1,
                                             double lambda2, double beta1,
                                             const Vec& v) {
  ActionObjective obj;
  obj.hitting = &step.hitting;
  obj.prev.assign(x_prev.begin(), x_prev.end());
  obj.switch_weight = lambda1 * beta1;
  obj.anchor = v;
  obj.anchor_weight = lambda2;
  bool zero = true;
  for (double k : kappa) zero = zero && k == 0.0;
  if (!zero) obj.dual_linear = step.fairness_matrix.apply_transpose(kappa);
  return obj;
}

// Full per-round objective (x-part plus z-part) at (x, z).
inline double round_objective(const ContextStep& step, ConstVecView x_prev,
                              ConstVecView kappa, double lambda1,
                              double lambda2, const EpisodeMeta& meta,
                              const Vec& v, ConstVecView x, ConstVecView z) {
  const ActionObjective obj =
      make_action_objective(step, x_prev, kappa, lambda1, lambda2, meta.beta1, v);
  return obj.value(x) + aux_objective(meta.fairness, kappa, z);
}

inline RoundSolution solve_per_round(const ContextStep& step,
                                     ConstVecView x_prev, ConstVecView kappa,
                                     double lambda1, double lambda2,
                                     const EpisodeMeta& meta,
                                     const SolveOptions& opts = {}) {
  validate_lambdas(lambda1, lambda2);
  if (x_prev.size() != meta.action_dim || kappa.size() != meta.fairness_dim)
    throw ShapeError("per-round solve dimension mismatch");
  RoundSolution sol;
  sol.v = hitting_minimizer(step, opts);
  const ActionObjective obj = make_action_objective(step, x_prev, kappa, lambda1,
                                                    lambda2, meta.beta1, sol.v);
  PgResult r = minimize_action(obj, step.action_set, sol.v, opts);
  sol.x = std::move(r.x);
  sol.residual = r.residual;
  sol.z = solve_aux(meta.fairness, kappa, meta.aux_box,
                    step.fairness_matrix.apply(sol.x));
  return sol;
}

}  // namespace fairobd
