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

// Full-horizon offline benchmarks.
//
// OPT minimizes the complete cost over the stacked trajectory. Writing
// g(y) = max_{|k|_q <= w} k . y turns it into a saddle problem whose dual
//
//   D(k) = min_X (1/T) sum_t [f_t(x_t) + (beta1/2)||x_t - x_{t-1}||^2
//                             + (A_t^T k) . x_t]
//
// is smooth and concave in the M-dimensional k because every f_t is
// strongly convex. We maximize D by accelerated projected gradient; each
// evaluation is an exact projection per round when beta1 = 0 and an
// accelerated projected-gradient solve of the chain QP otherwise. Every
// iterate yields a feasible trajectory (an upper bound) and a certified
// lower bound, so the reported gap is rigorous.
//
// FairOPT minimizes only g((1/T) sum_t A_t x_t) by projected subgradient
// descent with best-iterate tracking.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fairobd/core.hpp"
#include "fairobd/error.hpp"
#include "fairobd/geometry.hpp"
#include "fairobd/linalg.hpp"
#include "fairobd/solvers.hpp"

namespace fairobd {

struct OfflineOptions {
  int max_outer = 20000;
  int max_inner = 200000;
  double gap_abs = 1e-9;
  double gap_rel = 1e-6;
  int restarts = 1;          // extra runs from seeded random starts
  double agreement = 0.005;  // relative total-cost agreement across runs
  std::uint64_t seed = 0;
  int subgradient_iters = 20000;  // FairOPT
  double fair_gap_rel = 1e-4;     // FairOPT early stop

  void validate() const {
    if (max_outer < 1 || max_inner < 1 || subgradient_iters < 1)
      throw DomainError("offline iteration caps must be >= 1");
    if (!(gap_abs >= 0.0) || !(gap_rel >= 0.0))
      throw DomainError("offline gap tolerances must be >= 0");
    if (restarts < 0) throw DomainError("restarts must be >= 0");
  }
};

struct OfflineResult {
  Trajectory trajectory;
  CostBreakdown cost;
  double objective = 0.0;    // value of the minimized objective at trajectory
  double lower_bound = 0.0;  // certified lower bound on the optimum
  int iterations = 0;
  long inner_iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;

  double gap() const { return objective - lower_bound; }
};

// Euclidean projection onto {k : |k|_q <= radius}.
inline Vec project_norm_ball(ConstVecView k, double q, double radius) {
  Vec out(k.begin(), k.end());
  if (radius <= 0.0) return Vec(k.size(), 0.0);
  if (norm_p(k, q) <= radius) return out;
  if (std::isinf(q)) {
    for (double& v : out) v = std::clamp(v, -radius, radius);
    return out;
  }
  if (q == 2.0) return scaled(k, radius / norm2(k));
  if (q == 1.0) {
    // Sort-based l1-ball projection.
    Vec a(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) a[i] = std::abs(k[i]);
    Vec sorted = a;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cum = 0.0;
    double theta = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      cum += sorted[i];
      const double cand = (cum - radius) / static_cast<double>(i + 1);
      if (sorted[i] - cand > 0.0) theta = cand;
    }
    for (std::size_t i = 0; i < k.size(); ++i) {
      const double mag = std::max(a[i] - theta, 0.0);
      out[i] = k[i] >= 0.0 ? mag : -mag;
    }
    return out;
  }
  // General q: the KKT point has |y_i| solving |y_i| + mu q |y_i|^{q-1} =
  // |k_i|; bisect on mu with an inner bisection per coordinate.
  auto coord = [&](double a, double mu) {
    double lo = 0.0;
    double hi = a;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid + mu * q * std::pow(mid, q - 1.0) > a)
        hi = mid;
      else
        lo = mid;
    }
    return 0.5 * (lo + hi);
  };
  auto ball_norm = [&](double mu) {
    Vec y(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) y[i] = coord(std::abs(k[i]), mu);
    return norm_p(y, q);
  };
  double mu_lo = 0.0;
  double mu_hi = 1.0;
  while (ball_norm(mu_hi) > radius && mu_hi < 1e300) mu_hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (mu_lo + mu_hi);
    if (ball_norm(mid) > radius)
      mu_lo = mid;
    else
      mu_hi = mid;
  }
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double mag = coord(std::abs(k[i]), mu_hi);
    out[i] = k[i] >= 0.0 ? mag : -mag;
  }
  return out;
}

// Upper bound on the squared spectral norm: min(|A|_F^2, |A|_1 |A|_inf).
inline double spectral_norm_sq_bound(const Matrix& a) {
  double max_col = 0.0;
  double max_row = 0.0;
  Vec col(a.cols(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double row = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) {
      row += std::abs(a(r, c));
      col[c] += std::abs(a(r, c));
    }
    max_row = std::max(max_row, row);
  }
  for (double v : col) max_col = std::max(max_col, v);
  return std::min(a.frobenius_squared(), max_col * max_row);
}

namespace detail {

// min_X J(X) = sum_t [f_t(x_t) + (beta1/2)||x_t - x_{t-1}||^2 + q_t . x_t]
// over the product of per-round sets, warm-started from the last solution.
class ChainQp {
 public:
  explicit ChainQp(const Episode& ep) : ep_(ep) {
    const std::size_t horizon = ep.horizon();
    linear_.assign(horizon, Vec(ep.action_dim(), 0.0));
    double m_max = 0.0;
    m_min_ = std::numeric_limits<double>::infinity();
    for (const auto& s : ep.steps()) {
      m_max = std::max(m_max, s.hitting.curvature);
      m_min_ = std::min(m_min_, s.hitting.curvature);
    }
    lipschitz_ = m_max + 4.0 * ep.beta1();
    x_.reserve(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
      const auto& s = ep.step(t);
      x_.push_back(project(s.action_set, s.hitting.unconstrained_minimizer()));
    }
  }

  double min_curvature() const { return m_min_; }
  const Trajectory& solution() const { return x_; }

  // Sets q_t = A_t^T kappa.
  void set_dual(ConstVecView kappa) {
    for (std::size_t t = 0; t < ep_.horizon(); ++t)
      linear_[t] = ep_.step(t).fairness_matrix.apply_transpose(kappa);
  }

  double value(const Trajectory& x) const {
    double v = 0.0;
    const Vec* prev = &ep_.x0();
    for (std::size_t t = 0; t < x.size(); ++t) {
      v += ep_.step(t).hitting.value(x[t]) + dot(linear_[t], x[t]);
      v += 0.5 * ep_.beta1() * squared_distance(x[t], *prev);
      prev = &x[t];
    }
    return v;
  }

  Trajectory gradient(const Trajectory& x) const {
    const std::size_t horizon = x.size();
    Trajectory g(horizon);
    const double b1 = ep_.beta1();
    for (std::size_t t = 0; t < horizon; ++t) {
      g[t] = ep_.step(t).hitting.gradient(x[t]);
      axpy(1.0, linear_[t], g[t]);
      if (b1 != 0.0) {
        const Vec& prev = t == 0 ? ep_.x0() : x[t - 1];
        for (std::size_t i = 0; i < g[t].size(); ++i) {
          g[t][i] += b1 * (x[t][i] - prev[i]);
          if (t + 1 < horizon) g[t][i] -= b1 * (x[t + 1][i] - x[t][i]);
        }
      }
    }
    return g;
  }

  // Certified lower bound on min J from the point x: J is block-wise
  // m_t-strongly convex, so
  //   J(Y) >= J(x) + sum_t min_{y in X_t} <g_t, y - x_t> + (m_t/2)|y - x_t|^2.
  double lower_bound(const Trajectory& x) const {
    const Trajectory g = gradient(x);
    double lb = value(x);
    for (std::size_t t = 0; t < x.size(); ++t) {
      const auto& s = ep_.step(t);
      const double m = s.hitting.curvature;
      Vec target = x[t];
      axpy(-1.0 / m, g[t], target);
      const Vec y = project(s.action_set, target);
      const Vec diff = y - x[t];
      lb += dot(g[t], diff) + 0.5 * m * dot(diff, diff);
    }
    return lb;
  }

  // Solves to a gradient-mapping tolerance; returns iterations used.
  int solve(double tol, int max_iters) {
    const std::size_t horizon = ep_.horizon();
    if (ep_.beta1() == 0.0) {
      for (std::size_t t = 0; t < horizon; ++t) {
        const auto& s = ep_.step(t);
        Vec target = s.hitting.unconstrained_minimizer();
        axpy(-1.0 / s.hitting.curvature, linear_[t], target);
        x_[t] = project(s.action_set, target);
      }
      return 1;
    }
    const double lip = lipschitz_;
    const double root_q = std::sqrt(lip / m_min_);
    const double momentum = (root_q - 1.0) / (root_q + 1.0);
    Trajectory prev = x_;
    Trajectory y = x_;
    double fx = value(x_);
    bool restarted = true;
    int it = 0;
    for (; it < max_iters; ++it) {
      const Trajectory g = gradient(y);
      Trajectory next(horizon);
      double mapping_sq = 0.0;
      for (std::size_t t = 0; t < horizon; ++t) {
        Vec target = y[t];
        axpy(-1.0 / lip, g[t], target);
        next[t] = project(ep_.step(t).action_set, target);
        mapping_sq += squared_distance(next[t], y[t]);
      }
      const double fn = value(next);
      if (!restarted && fn > fx) {
        // Adaptive restart: drop momentum and retry from the current point.
        y = x_;
        prev = x_;
        restarted = true;
        continue;
      }
      restarted = false;
      prev = std::move(x_);
      x_ = std::move(next);
      fx = fn;
      if (std::sqrt(mapping_sq) * lip <= tol) {
        ++it;
        break;
      }
      for (std::size_t t = 0; t < horizon; ++t) {
        y[t] = x_[t];
        for (std::size_t i = 0; i < y[t].size(); ++i)
          y[t][i] += momentum * (x_[t][i] - prev[t][i]);
      }
    }
    return it;
  }

 private:
  const Episode& ep_;
  Trajectory x_;
  std::vector<Vec> linear_;
  double lipschitz_ = 0.0;
  double m_min_ = 1.0;
};

struct DualAscentRun {
  Trajectory best_x;
  double best_upper = std::numeric_limits<double>::infinity();
  double best_lower = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  long inner_iterations = 0;
};

inline DualAscentRun dual_ascent(const Episode& ep, Vec kappa0,
                                 const OfflineOptions& opts) {
  const double horizon = static_cast<double>(ep.horizon());
  const FairnessSpec& g = ep.fairness();
  const double q = g.dual_exponent();
  ChainQp inner(ep);

  double norm_sq_mean = 0.0;
  for (const auto& s : ep.steps()) norm_sq_mean += spectral_norm_sq_bound(s.fairness_matrix);
  norm_sq_mean /= horizon;
  const double lip = std::max(norm_sq_mean / inner.min_curvature(), 1e-300);

  DualAscentRun run;
  auto evaluate = [&](ConstVecView kappa, double inner_tol) {
    inner.set_dual(kappa);
    run.inner_iterations += inner.solve(inner_tol, opts.max_inner);
    const Trajectory& x = inner.solution();
    const double lower = inner.lower_bound(x) / horizon;
    const double upper = total_cost(ep, x).total;
    run.best_lower = std::max(run.best_lower, lower);
    if (upper < run.best_upper) {
      run.best_upper = upper;
      run.best_x = x;
    }
    return average_fairness_vector(ep, x);
  };
  auto done = [&] {
    return run.best_upper - run.best_lower <=
           opts.gap_abs + opts.gap_rel * std::abs(run.best_upper);
  };

  // An inexact inner solution with gradient-mapping norm r costs about
  // r^2 / (2 m T) of lower bound, so the inner tolerance follows the gap.
  const double tol_scale = 2.0 * inner.min_curvature() * horizon;
  auto next_tol = [&] {
    const double target = opts.gap_abs + opts.gap_rel * std::abs(run.best_upper);
    const double eps = 0.01 * std::max(target, 0.01 * (run.best_upper - run.best_lower));
    return std::max(1e-12, std::sqrt(tol_scale * eps));
  };
  double inner_tol = std::sqrt(tol_scale);
  // Primal recovery through a nonsmooth g needs accurate dual gradients, so
  // the inner solves also stay within a fixed fraction of the gradient scale.
  double floor_tol = 0.0;
  auto tighten = [&] {
    if (floor_tol == 0.0) {
      double sq = 0.0;
      for (const auto& gt : inner.gradient(inner.solution())) sq += dot(gt, gt);
      floor_tol = std::max(1e-6 * std::sqrt(sq), 1e-12);
    }
    inner_tol = std::min({inner_tol, next_tol(), floor_tol});
  };

  Vec kappa = project_norm_ball(kappa0, q, g.weight);
  if (g.weight == 0.0) {
    for (int k = 0; k < opts.max_outer; ++k) {
      evaluate(kappa, inner_tol);
      run.iterations = k + 1;
      if (done()) break;
      inner_tol *= 0.1;
      tighten();
    }
    return run;
  }
  Vec kappa_prev = kappa;
  double t_prev = 1.0;
  for (int k = 0; k < opts.max_outer; ++k) {
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_prev * t_prev));
    Vec zeta = kappa;
    axpy((t_prev - 1.0) / t_next, kappa - kappa_prev, zeta);
    zeta = project_norm_ball(zeta, q, g.weight);
    const Vec grad = evaluate(zeta, inner_tol);
    run.iterations = k + 1;
    if (done()) break;
    Vec step = zeta;
    axpy(1.0 / lip, grad, step);
    Vec next = project_norm_ball(step, q, g.weight);
    // Gradient-based restart for ascent.
    if (dot(grad, next - kappa) < 0.0) {
      t_prev = 1.0;
    } else {
      t_prev = t_next;
    }
    kappa_prev = std::move(kappa);
    kappa = std::move(next);
    tighten();
  }
  return run;
}

}  // namespace detail

inline OfflineResult solve_offline_opt(const Episode& ep,
                                       const OfflineOptions& opts = {}) {
  opts.validate();
  const std::size_t m = ep.fairness_dim();
  const FairnessSpec& g = ep.fairness();

  auto finish = [&](detail::DualAscentRun run) {
    OfflineResult r;
    r.trajectory = std::move(run.best_x);
    r.cost = total_cost(ep, r.trajectory);
    r.objective = r.cost.total;
    r.lower_bound = run.best_lower;
    r.iterations = run.iterations;
    r.inner_iterations = run.inner_iterations;
    r.converged = r.objective - r.lower_bound <=
                  opts.gap_abs + opts.gap_rel * std::abs(r.objective);
    return r;
  };

  OfflineResult best = finish(detail::dual_ascent(ep, Vec(m, 0.0), opts));
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int r = 0; r < opts.restarts && g.weight > 0.0; ++r) {
    Vec start(m);
    for (double& v : start) v = g.weight * unif(rng);
    OfflineResult other = finish(detail::dual_ascent(ep, start, opts));
    const double scale = std::max(std::abs(best.objective), 1e-12);
    if (std::abs(other.objective - best.objective) > opts.agreement * scale) {
      std::ostringstream msg;
      msg << "OPT restarts disagree: " << best.objective << " vs "
          << other.objective;
      best.warnings.push_back(msg.str());
    }
    const double lower = std::max(best.lower_bound, other.lower_bound);
    if (other.objective < best.objective) {
      other.warnings = std::move(best.warnings);
      best = std::move(other);
    }
    best.lower_bound = lower;
    best.converged = best.objective - best.lower_bound <=
                     opts.gap_abs + opts.gap_rel * std::abs(best.objective);
  }
  if (!best.converged) {
    std::ostringstream msg;
    msg << "OPT duality gap " << best.gap() << " above tolerance after "
        << best.iterations << " iterations";
    best.warnings.push_back(msg.str());
  }
  return best;
}

namespace detail {

struct SubgradientRun {
  Trajectory best_x;
  double best_value = std::numeric_limits<double>::infinity();
  double best_lower = -std::numeric_limits<double>::infinity();
  int iterations = 0;
};

inline SubgradientRun fair_subgradient(const Episode& ep, Trajectory x,
                                       const OfflineOptions& opts) {
  const std::size_t horizon = ep.horizon();
  const double inv_t = 1.0 / static_cast<double>(horizon);
  const FairnessSpec& g = ep.fairness();

  double diam_sq = 0.0;
  for (const auto& s : ep.steps()) {
    const double d = diameter_bound(s.action_set);
    diam_sq += d * d;
  }
  const double radius = std::sqrt(diam_sq);

  // Weak duality: g(y) >= s . y whenever |s|_q <= w, so the linear
  // minimization over the sets bounds the optimum from below. The running
  // mean of the subgradients gives a much tighter bound than the last one.
  auto dual_value = [&](ConstVecView s) {
    double lower = 0.0;
    for (std::size_t t = 0; t < horizon; ++t) {
      const Vec c = ep.step(t).fairness_matrix.apply_transpose(s);
      lower += inv_t * dot(c, linear_minimize(ep.step(t).action_set, c));
    }
    return lower;
  };

  SubgradientRun run;
  Vec s_sum(ep.fairness_dim(), 0.0);
  std::vector<Vec> cost(horizon);
  for (int k = 1; k <= opts.subgradient_iters; ++k) {
    run.iterations = k;
    const Vec avg = average_fairness_vector(ep, x);
    const double value = g.value(avg);
    if (value < run.best_value) {
      run.best_value = value;
      run.best_x = x;
    }
    const Vec s = g.subgradient(avg);
    axpy(1.0, s, s_sum);
    if (k == 1 || k % 10 == 0) {
      run.best_lower = std::max({run.best_lower, dual_value(s),
                                 dual_value(scaled(s_sum, 1.0 / k))});
      if (run.best_value - run.best_lower <=
          opts.gap_abs + opts.fair_gap_rel * std::abs(run.best_value))
        break;
    }
    double grad_sq = 0.0;
    for (std::size_t t = 0; t < horizon; ++t) {
      cost[t] = ep.step(t).fairness_matrix.apply_transpose(s);
      for (double& c : cost[t]) c *= inv_t;
      grad_sq += dot(cost[t], cost[t]);
    }
    if (grad_sq == 0.0) break;
    const double step = radius / (std::sqrt(grad_sq) * std::sqrt(static_cast<double>(k)));
    for (std::size_t t = 0; t < horizon; ++t) {
      axpy(-step, cost[t], x[t]);
      x[t] = project(ep.step(t).action_set, x[t]);
    }
  }
  return run;
}

}  // namespace detail

inline OfflineResult solve_fair_opt(const Episode& ep,
                                    const OfflineOptions& opts = {}) {
  opts.validate();
  const std::size_t horizon = ep.horizon();
  Trajectory start(horizon);
  for (std::size_t t = 0; t < horizon; ++t)
    start[t] = project(ep.step(t).action_set, ep.x0());

  auto finish = [&](detail::SubgradientRun run) {
    OfflineResult r;
    r.trajectory = std::move(run.best_x);
    r.cost = total_cost(ep, r.trajectory);
    r.objective = run.best_value;
    r.lower_bound = run.best_lower;
    r.iterations = run.iterations;
    r.converged = r.objective - r.lower_bound <=
                  1e-3 * std::max(1.0, std::abs(r.objective));
    return r;
  };

  OfflineResult best = finish(detail::fair_subgradient(ep, start, opts));
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int r = 0; r < opts.restarts && ep.fairness().weight > 0.0 &&
                  best.objective > best.lower_bound;
       ++r) {
    Trajectory alt(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
      const Box b = bounding_box(ep.step(t).action_set);
      Vec p(ep.action_dim());
      for (std::size_t i = 0; i < p.size(); ++i)
        p[i] = b.lower[i] + 0.5 * (1.0 + unif(rng)) * (b.upper[i] - b.lower[i]);
      alt[t] = project(ep.step(t).action_set, p);
    }
    OfflineResult other = finish(detail::fair_subgradient(ep, alt, opts));
    const double scale = std::max(std::abs(best.objective), 1e-12);
    if (std::abs(other.objective - best.objective) > opts.agreement * scale &&
        std::abs(other.objective - best.objective) > 1e-6) {
      std::ostringstream msg;
      msg << "FairOPT restarts disagree: " << best.objective << " vs "
          << other.objective;
      best.warnings.push_back(msg.str());
    }
    const double lower = std::max(best.lower_bound, other.lower_bound);
    if (other.objective < best.objective) {
      other.warnings = std::move(best.warnings);
      best = std::move(other);
    }
    best.lower_bound = lower;
  }
  return best;
}

}  // namespace fairobd
