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

// Online policies: FairOBD and the ROBD, DMD and HitMin baselines, plus the
// closed-form constants of the competitive analysis.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fairobd/core.hpp"
#include "fairobd/error.hpp"
#include "fairobd/linalg.hpp"
#include "fairobd/mirror.hpp"
#include "fairobd/solvers.hpp"

namespace fairobd {

enum class PolicyKind { kFairObd, kRobd, kDmd, kHitMin };

inline std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kFairObd: return "FairOBD";
    case PolicyKind::kRobd: return "ROBD";
    case PolicyKind::kDmd: return "DMD";
    case PolicyKind::kHitMin: return "HitMin";
  }
  return "?";
}

inline PolicyKind parse_policy(std::string_view name) {
  std::string lower(name);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "fairobd") return PolicyKind::kFairObd;
  if (lower == "robd") return PolicyKind::kRobd;
  if (lower == "dmd") return PolicyKind::kDmd;
  if (lower == "hitmin") return PolicyKind::kHitMin;
  throw ConfigError("unknown policy '" + std::string(name) + "'");
}

inline constexpr PolicyKind kAllPolicies[] = {
    PolicyKind::kFairObd, PolicyKind::kRobd, PolicyKind::kDmd, PolicyKind::kHitMin};

enum class EtaSchedule {
  kConstant,          // eta as given
  kHorizonCubeRoot,   // eta * T^{-1/3}
};

struct HyperParams {
  double lambda1 = 1.0;
  double lambda2 = 0.0;
  double eta = 1e-3;
  EtaSchedule schedule = EtaSchedule::kConstant;
  Vec kappa1;  // empty means zeros
  ReferenceFunction reference = ReferenceFunction::squared_l2();
  bool clamp_nonnegative = true;
  bool dmd_keep_lambda2 = false;  // DMD drops lambda2 unless set
  bool record_diagnostics = true;
  SolveOptions solve;

  void validate() const {
    validate_lambdas(lambda1, lambda2);
    if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("eta must be > 0");
    if (!all_finite(kappa1)) throw NumericError("kappa1 is not finite");
    solve.validate();
  }

  double effective_eta(std::size_t horizon) const {
    if (schedule == EtaSchedule::kHorizonCubeRoot)
      return eta * std::cbrt(1.0 / static_cast<double>(horizon));
    return eta;
  }
};

struct RoundRecord {
  Vec x;
  Vec z;
  Vec d;
  Vec kappa;  // dual variable used in this round
};

struct PolicyState {
  Vec x_prev;
  DualState dual;
  std::size_t t = 0;  // rounds played
  std::vector<RoundRecord> diagnostics;
};

inline PolicyState initial_state(const EpisodeMeta& meta, const HyperParams& hyper) {
  PolicyState s;
  s.x_prev = meta.x0;
  s.dual.clamp_nonnegative = hyper.clamp_nonnegative;
  if (hyper.kappa1.empty()) {
    s.dual.kappa.assign(meta.fairness_dim, 0.0);
  } else {
    if (hyper.kappa1.size() != meta.fairness_dim)
      throw ShapeError("kappa1 must have length M");
    s.dual.kappa = hyper.kappa1;
  }
  if (hyper.reference.kind == ReferenceKind::kNegativeEntropy) {
    for (double k : s.dual.kappa)
      if (!(k > 0.0)) throw DomainError("negative entropy needs kappa1 > 0");
  }
  return s;
}

struct StepResult {
  Vec action;
  PolicyState state;
};

inline StepResult policy_step(PolicyKind kind, PolicyState state,
                              const ContextStep& step, const EpisodeMeta& meta,
                              const HyperParams& hyper) {
  if (state.t >= meta.horizon)
    throw EpisodeExhaustedError("policy stepped past the horizon T = " +
                                std::to_string(meta.horizon));
  RoundRecord rec;
  switch (kind) {
    case PolicyKind::kHitMin:
      rec.x = hitting_minimizer(step, hyper.solve);
      break;
    case PolicyKind::kRobd: {
      const Vec zero(meta.fairness_dim, 0.0);
      RoundSolution sol = solve_per_round(step, state.x_prev, zero, hyper.lambda1,
                                          hyper.lambda2, meta, hyper.solve);
      rec.x = std::move(sol.x);
      break;
    }
    case PolicyKind::kFairObd:
    case PolicyKind::kDmd: {
      double l1 = hyper.lambda1;
      double l2 = hyper.lambda2;
      if (kind == PolicyKind::kDmd) {
        l1 = 0.0;
        if (!hyper.dmd_keep_lambda2) l2 = 0.0;
      }
      RoundSolution sol = solve_per_round(step, state.x_prev, state.dual.kappa,
                                          l1, l2, meta, hyper.solve);
      rec.d = sol.z - step.fairness_matrix.apply(sol.x);
      rec.x = std::move(sol.x);
      rec.z = std::move(sol.z);
      rec.kappa = state.dual.kappa;
      state.dual = dual_update(hyper.reference, state.dual, rec.d,
                               hyper.effective_eta(meta.horizon));
      break;
    }
  }
  state.x_prev = rec.x;
  ++state.t;
  Vec action = rec.x;
  if (hyper.record_diagnostics) state.diagnostics.push_back(std::move(rec));
  return {std::move(action), std::move(state)};
}

struct EpisodeRun {
  Trajectory trajectory;
  CostBreakdown cost;
  PolicyState final_state;
};

inline EpisodeRun run_episode(PolicyKind kind, const Episode& ep,
                              const HyperParams& hyper) {
  hyper.validate();
  PolicyState state = initial_state(ep.meta(), hyper);
  EpisodeRun run;
  run.trajectory.reserve(ep.horizon());
  for (std::size_t t = 0; t < ep.horizon(); ++t) {
    StepResult r = policy_step(kind, std::move(state), ep.step(t), ep.meta(), hyper);
    run.trajectory.push_back(std::move(r.action));
    state = std::move(r.state);
  }
  run.cost = total_cost(ep, run.trajectory);
  run.final_state = std::move(state);
  return run;
}

// Competitive-analysis constants.

struct Lambdas {
  double lambda1;
  double lambda2;
};

inline Lambdas optimal_lambdas(double m, double beta1) {
  if (!(m > 0.0)) throw DomainError("curvature m must be > 0");
  if (!(beta1 >= 0.0)) throw DomainError("beta1 must be >= 0");
  return {1.0, 0.5 * m * (1.0 + std::sqrt(1.0 + 4.0 * beta1 / m)) - m};
}

inline double theoretical_cr(double m, double beta1) {
  if (!(m > 0.0)) throw DomainError("curvature m must be > 0");
  return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * beta1 / m));
}

// C = max{(m + l2) / (m l1), 1 + l1 beta1 / (m + l2)}.
inline double competitive_constant(double m, double beta1, double lambda1,
                                   double lambda2) {
  if (!(m > 0.0) || !(lambda1 > 0.0))
    throw DomainError("competitive constant needs m > 0 and lambda1 > 0");
  return std::max((m + lambda2) / (m * lambda1),
                  1.0 + lambda1 * beta1 / (m + lambda2));
}

struct BoundParams {
  double eta = 0.0;
  double l = 1.0;
  double beta2 = 1.0;
  double diameter = 0.0;  // Z
  double lipschitz = 0.0; // L
  double frame = 1.0;     // R
  double kappa1_norm = 0.0;
  double delta = 0.0;
  double lambda1 = 1.0;
  double horizon = 1.0;   // T
};

// Additive slack of the FairOBD cost bound; lambda1 = 1 gives the
// no-switching form.
inline double theorem_bound(const BoundParams& p) {
  if (!(p.eta > 0.0) || !(p.l > 0.0) || !(p.lambda1 > 0.0) || !(p.horizon > 0.0))
    throw DomainError("theorem_bound needs eta, l, lambda1, T > 0");
  const double z = p.diameter;
  const double lip = p.lipschitz;
  const double inner = (z * z / (p.l * p.l) + 2.0 * lip * z / (p.eta * p.l) +
                        2.0 * z * p.kappa1_norm / (p.eta * p.eta * p.l)) /
                       p.horizon;
  const double bracket = p.eta * z * z * p.frame / (2.0 * p.l) +
                         z * p.kappa1_norm + p.beta2 * lip * std::sqrt(inner) +
                         lip * p.delta / p.horizon;
  return bracket / p.lambda1;
}

}  // namespace fairobd
