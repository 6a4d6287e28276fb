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

// Sliding-window data-center provisioning experiment.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairobd/bench/traces.hpp"
#include "fairobd/core.hpp"
#include "fairobd/error.hpp"
#include "fairobd/geometry.hpp"
#include "fairobd/offline.hpp"
#include "fairobd/policies.hpp"

namespace fairobd::bench {

struct PolicyEntry {
  std::string label;
  PolicyKind kind = PolicyKind::kFairObd;
  HyperParams hyper;
};

struct ExperimentConfig {
  double u1 = 10.0;
  double u2 = 1000.0;
  double u3 = 3.5;
  double q = 1.0;
  double p = std::numeric_limits<double>::infinity();
  std::size_t window = 72;
  std::size_t stride = 1;
  std::uint64_t seed = 0;
  std::vector<PolicyEntry> policies;  // empty: the four defaults
  bool run_opt = true;
  bool run_fair_opt = true;
  OfflineOptions offline;
  unsigned workers = 0;  // 0: hardware concurrency

  void validate() const {
    if (!(u1 > 0.0)) throw ConfigError("u1 must be > 0 (hitting strong convexity)");
    if (!(u2 >= 0.0) || !(u3 >= 0.0) || !(q > 0.0))
      throw ConfigError("u2, u3 must be >= 0 and q > 0");
    if (!(p >= 1.0)) throw ConfigError("p must be >= 1");
    if (window < 1 || stride < 1) throw ConfigError("window and stride must be >= 1");
    for (const auto& e : policies) {
      try {
        e.hyper.validate();
      } catch (const Error& err) {
        throw ConfigError("policy '" + e.label + "': " + err.what());
      }
    }
  }
};

// Experiment defaults: kappa1 = 3, lambda1 = 1, lambda2 = 30 and eta = 1e-3
// for FairOBD and DMD; ROBD uses the optimal lambdas for m = 2 u1 and
// beta1 = u2.
inline HyperParams default_hyper(PolicyKind kind, const ExperimentConfig& cfg,
                                 std::size_t locations) {
  HyperParams h;
  h.record_diagnostics = false;
  switch (kind) {
    case PolicyKind::kFairObd:
    case PolicyKind::kDmd:
      h.lambda1 = 1.0;
      h.lambda2 = 30.0;
      h.eta = 1e-3;
      h.kappa1.assign(locations, 3.0);
      break;
    case PolicyKind::kRobd: {
      const Lambdas l = optimal_lambdas(2.0 * cfg.u1, cfg.u2);
      h.lambda1 = l.lambda1;
      h.lambda2 = l.lambda2;
      break;
    }
    case PolicyKind::kHitMin:
      break;
  }
  return h;
}

inline std::vector<PolicyEntry> resolved_policies(const ExperimentConfig& cfg,
                                                  std::size_t locations) {
  if (!cfg.policies.empty()) return cfg.policies;
  std::vector<PolicyEntry> out;
  for (PolicyKind k : kAllPolicies)
    out.push_back({std::string(to_string(k)), k, default_hyper(k, cfg, locations)});
  return out;
}

inline std::size_t window_count(std::size_t horizon, std::size_t window,
                                std::size_t stride) {
  if (window > horizon) return 0;
  return (horizon - window) / stride + 1;
}

inline Episode build_episode(const ExperimentConfig& cfg, const Traces& tr,
                             std::size_t start) {
  const std::size_t n = tr.locations();
  if (start + cfg.window > tr.horizon())
    throw DomainError("window [" + std::to_string(start) + ", " +
                      std::to_string(start + cfg.window) + ") exceeds trace length " +
                      std::to_string(tr.horizon()));
  Vec caps(n);
  for (std::size_t i = 0; i < n; ++i) caps[i] = tr.datacenters[i].capacity;
  const double capacity = tr.total_capacity();

  std::vector<ContextStep> steps;
  steps.reserve(cfg.window);
  for (std::size_t k = 0; k < cfg.window; ++k) {
    const std::size_t t = start + k;
    const double demand = tr.workload[t];
    if (demand > capacity * (1.0 + 1e-12))
      throw InfeasibleError("workload " + std::to_string(demand) + " at t = " +
                            std::to_string(t) + " exceeds total capacity " +
                            std::to_string(capacity));
    QuadraticHitting f;
    f.center.assign(n, 0.0);
    f.curvature = 2.0 * cfg.u1;
    f.linear.resize(n);
    Vec health(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& d = tr.datacenters[i];
      f.linear[i] = d.electricity[t] * d.pue * cfg.q;
      health[i] = d.pue * d.health[t] * cfg.q;
    }
    steps.push_back({std::move(f), Matrix::diagonal(health),
                     make_capped_simplex(std::min(demand, capacity), caps)});
  }
  // Start from the capacity-proportional split of the first demand.
  Vec x0(n);
  const double first = std::min(tr.workload[start], capacity);
  for (std::size_t i = 0; i < n; ++i) x0[i] = first * caps[i] / capacity;
  return Episode::create(std::move(steps), std::move(x0), cfg.u2,
                         FairnessSpec{cfg.u3, cfg.p});
}

struct WindowCost {
  std::size_t start = 0;
  CostBreakdown cost;
};

struct WindowFailure {
  std::size_t start = 0;
  std::string kind;  // "convergence", "infeasible", "numeric", "error"
  std::string message;
};

struct ReportRow {
  std::string policy;
  CostBreakdown mean;
  std::vector<WindowCost> windows;
  std::vector<std::string> warnings;
  std::vector<WindowFailure> failures;
};

struct ExperimentReport {
  nlohmann::json config;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::size_t window_count = 0;
  std::vector<ReportRow> rows;

  const ReportRow* find(const std::string& policy) const {
    for (const auto& r : rows)
      if (r.policy == policy) return &r;
    return nullptr;
  }
  bool has_failures() const {
    return std::any_of(rows.begin(), rows.end(),
                       [](const ReportRow& r) { return !r.failures.empty(); });
  }
  bool has_convergence_failures() const {
    for (const auto& r : rows)
      for (const auto& f : r.failures)
        if (f.kind == "convergence") return true;
    return false;
  }
};

inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

inline CostBreakdown mean_cost(const std::vector<WindowCost>& windows) {
  CostBreakdown m;
  if (windows.empty()) return m;
  for (const auto& w : windows) {
    m.hitting += w.cost.hitting;
    m.switching += w.cost.switching;
    m.fairness += w.cost.fairness;
    m.total += w.cost.total;
  }
  const double n = static_cast<double>(windows.size());
  m.hitting /= n;
  m.switching /= n;
  m.fairness /= n;
  m.total /= n;
  return m;
}

namespace detail {

struct Cell {
  bool ok = false;
  CostBreakdown cost;
  std::vector<std::string> warnings;
  WindowFailure failure;
};

template <class Fn>
Cell guarded(std::size_t start, Fn&& fn) {
  Cell c;
  c.failure.start = start;
  try {
    fn(c);
    c.ok = true;
  } catch (const ConvergenceError& e) {
    c.failure = {start, "convergence", e.what()};
  } catch (const InfeasibleError& e) {
    c.failure = {start, "infeasible", e.what()};
  } catch (const NumericError& e) {
    c.failure = {start, "numeric", e.what()};
  } catch (const std::exception& e) {
    c.failure = {start, "error", e.what()};
  }
  return c;
}

}  // namespace detail

// `config_json` is recorded verbatim in the report and hashed.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg, const Traces& tr,
                                       const nlohmann::json& config_json = {}) {
  cfg.validate();
  validate_traces(tr);
  const std::size_t count = window_count(tr.horizon(), cfg.window, cfg.stride);
  if (count == 0)
    throw ConfigError("window " + std::to_string(cfg.window) +
                      " exceeds trace length " + std::to_string(tr.horizon()));
  const auto entries = resolved_policies(cfg, tr.locations());

  std::vector<std::string> labels;
  for (const auto& e : entries) labels.push_back(e.label);
  if (cfg.run_opt) labels.emplace_back("OPT");
  if (cfg.run_fair_opt) labels.emplace_back("FairOPT");
  const std::size_t cols = labels.size();

  std::vector<detail::Cell> cells(count * cols);
  auto work = [&](std::size_t w) {
    const std::size_t start = w * cfg.stride;
    detail::Cell* row = &cells[w * cols];
    std::optional<Episode> ep;
    try {
      ep.emplace(build_episode(cfg, tr, start));
    } catch (const std::exception&) {
      for (std::size_t c = 0; c < cols; ++c)
        row[c] = detail::guarded(start, [&](detail::Cell&) {
          build_episode(cfg, tr, start);
        });
      return;
    }
    std::size_t c = 0;
    for (const auto& e : entries) {
      row[c++] = detail::guarded(start, [&](detail::Cell& cell) {
        cell.cost = run_episode(e.kind, *ep, e.hyper).cost;
      });
    }
    OfflineOptions off = cfg.offline;
    off.seed = cfg.seed + start;
    if (cfg.run_opt) {
      row[c++] = detail::guarded(start, [&](detail::Cell& cell) {
        OfflineResult r = solve_offline_opt(*ep, off);
        cell.cost = r.cost;
        for (auto& msg : r.warnings)
          cell.warnings.push_back("window " + std::to_string(start) + ": " + msg);
      });
    }
    if (cfg.run_fair_opt) {
      row[c++] = detail::guarded(start, [&](detail::Cell& cell) {
        OfflineResult r = solve_fair_opt(*ep, off);
        cell.cost = r.cost;
        for (auto& msg : r.warnings)
          cell.warnings.push_back("window " + std::to_string(start) + ": " + msg);
      });
    }
  };

  unsigned workers = cfg.workers ? cfg.workers : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  if (workers == 1) {
    for (std::size_t w = 0; w < count; ++w) work(w);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < workers; ++i)
      pool.emplace_back([&] {
        for (std::size_t w = next++; w < count; w = next++) work(w);
      });
  }

  ExperimentReport rep;
  rep.config = config_json;
  rep.config_hash = fnv1a_hex(config_json.dump());
  rep.seed = cfg.seed;
  rep.window_count = count;
  for (std::size_t c = 0; c < cols; ++c) {
    ReportRow row;
    row.policy = labels[c];
    for (std::size_t w = 0; w < count; ++w) {
      const auto& cell = cells[w * cols + c];
      if (cell.ok)
        row.windows.push_back({w * cfg.stride, cell.cost});
      else
        row.failures.push_back(cell.failure);
      row.warnings.insert(row.warnings.end(), cell.warnings.begin(), cell.warnings.end());
    }
    row.mean = mean_cost(row.windows);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace fairobd::bench
