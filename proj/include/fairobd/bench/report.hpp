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

// JSON configuration and report serialization, and the text table.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairobd/bench/experiment.hpp"
#include "fairobd/bench/synth.hpp"
#include "fairobd/bench/traces.hpp"
#include "fairobd/error.hpp"
#include "fairobd/mirror.hpp"
#include "fairobd/policies.hpp"

namespace fairobd::bench {

using nlohmann::json;

struct TraceSource {
  std::optional<std::filesystem::path> workload;
  std::optional<std::filesystem::path> datacenters;
  std::uint64_t synth_seed = 0;
  std::size_t synth_days = 7;
  std::size_t synth_locations = 7;

  bool synthetic() const { return !workload; }
};

inline TraceSource parse_trace_source(const json& j,
                                      const std::filesystem::path& base = {}) {
  TraceSource src;
  try {
    if (j.contains("traces")) {
      const auto& t = j.at("traces");
      src.workload = base / t.at("workload").get<std::string>();
      src.datacenters = base / t.at("datacenters").get<std::string>();
    } else if (j.contains("synthetic")) {
      const auto& s = j.at("synthetic");
      src.synth_seed = s.value("seed", std::uint64_t{0});
      src.synth_days = s.value("days", std::size_t{7});
      src.synth_locations = s.value("locations", std::size_t{7});
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("traces: ") + e.what());
  }
  return src;
}

inline Traces load_source(const TraceSource& src) {
  if (src.synthetic())
    return synth_trace(src.synth_seed, src.synth_days, src.synth_locations);
  return load_traces(*src.workload, *src.datacenters);
}

inline double parse_norm_order(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    throw ConfigError("p must be a number or \"inf\"");
  }
  return v.get<double>();
}

inline void apply_hyper(const json& j, HyperParams& h, std::size_t locations) {
  h.lambda1 = j.value("lambda1", h.lambda1);
  h.lambda2 = j.value("lambda2", h.lambda2);
  h.eta = j.value("eta", h.eta);
  h.clamp_nonnegative = j.value("clamp", h.clamp_nonnegative);
  h.dmd_keep_lambda2 = j.value("dmd_keep_lambda2", h.dmd_keep_lambda2);
  if (j.contains("schedule")) {
    const auto s = j.at("schedule").get<std::string>();
    if (s == "constant")
      h.schedule = EtaSchedule::kConstant;
    else if (s == "cbrt")
      h.schedule = EtaSchedule::kHorizonCubeRoot;
    else
      throw ConfigError("schedule must be \"constant\" or \"cbrt\"");
  }
  if (j.contains("kappa1")) {
    const auto& k = j.at("kappa1");
    if (k.is_number())
      h.kappa1.assign(locations, k.get<double>());
    else
      h.kappa1 = k.get<Vec>();
  }
  if (j.contains("reference")) {
    const auto r = j.at("reference").get<std::string>();
    if (r == "squared_l2")
      h.reference = ReferenceFunction::squared_l2();
    else if (r == "negative_entropy")
      h.reference = ReferenceFunction::negative_entropy(j.value("kappa_min", 1e-3),
                                                        j.value("kappa_max", 10.0));
    else
      throw ConfigError("reference must be \"squared_l2\" or \"negative_entropy\"");
  }
}

inline ExperimentConfig parse_experiment_config(const json& j, std::size_t locations) {
  ExperimentConfig cfg;
  try {
    cfg.u1 = j.value("u1", cfg.u1);
    cfg.u2 = j.value("u2", cfg.u2);
    cfg.u3 = j.value("u3", cfg.u3);
    cfg.q = j.value("q", cfg.q);
    if (j.contains("p")) cfg.p = parse_norm_order(j.at("p"));
    cfg.window = j.value("window", cfg.window);
    cfg.stride = j.value("stride", cfg.stride);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.run_opt = j.value("opt", cfg.run_opt);
    cfg.run_fair_opt = j.value("fair_opt", cfg.run_fair_opt);
    cfg.workers = j.value("workers", cfg.workers);
    if (j.contains("offline")) {
      const auto& o = j.at("offline");
      cfg.offline.max_outer = o.value("max_outer", cfg.offline.max_outer);
      cfg.offline.gap_rel = o.value("gap_rel", cfg.offline.gap_rel);
      cfg.offline.gap_abs = o.value("gap_abs", cfg.offline.gap_abs);
      cfg.offline.restarts = o.value("restarts", cfg.offline.restarts);
      cfg.offline.subgradient_iters =
          o.value("subgradient_iters", cfg.offline.subgradient_iters);
    }
    if (j.contains("policies")) {
      for (const auto& p : j.at("policies")) {
        PolicyEntry e;
        const json spec = p.is_string() ? json{{"policy", p}} : p;
        e.kind = parse_policy(spec.at("policy").get<std::string>());
        e.label = spec.value("label", std::string(to_string(e.kind)));
        e.hyper = default_hyper(e.kind, cfg, locations);
        apply_hyper(spec.contains("hyper") ? spec.at("hyper") : spec, e.hyper, locations);
        cfg.policies.push_back(std::move(e));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline json to_json(const CostBreakdown& c) {
  return {{"hitting", c.hitting},
          {"switching", c.switching},
          {"fairness", c.fairness},
          {"total", c.total}};
}

inline CostBreakdown cost_from_json(const json& j) {
  return {j.at("hitting").get<double>(), j.at("switching").get<double>(),
          j.at("fairness").get<double>(), j.at("total").get<double>()};
}

inline json to_json(const ExperimentReport& rep) {
  json rows = json::array();
  for (const auto& r : rep.rows) {
    json windows = json::array();
    for (const auto& w : r.windows) {
      json c = to_json(w.cost);
      c["start"] = w.start;
      windows.push_back(std::move(c));
    }
    json failures = json::array();
    for (const auto& f : r.failures)
      failures.push_back({{"start", f.start}, {"kind", f.kind}, {"message", f.message}});
    rows.push_back({{"policy", r.policy},
                    {"mean", to_json(r.mean)},
                    {"successful_windows", r.windows.size()},
                    {"windows", std::move(windows)},
                    {"warnings", r.warnings},
                    {"failures", std::move(failures)}});
  }
  return {{"config", rep.config},
          {"config_hash", rep.config_hash},
          {"seed", rep.seed},
          {"window_count", rep.window_count},
          {"rows", std::move(rows)}};
}

inline ExperimentReport report_from_json(const json& j) {
  ExperimentReport rep;
  try {
    rep.config = j.at("config");
    rep.config_hash = j.at("config_hash").get<std::string>();
    rep.seed = j.at("seed").get<std::uint64_t>();
    rep.window_count = j.at("window_count").get<std::size_t>();
    for (const auto& r : j.at("rows")) {
      ReportRow row;
      row.policy = r.at("policy").get<std::string>();
      row.mean = cost_from_json(r.at("mean"));
      for (const auto& w : r.at("windows"))
        row.windows.push_back({w.at("start").get<std::size_t>(), cost_from_json(w)});
      row.warnings = r.at("warnings").get<std::vector<std::string>>();
      for (const auto& f : r.at("failures"))
        row.failures.push_back({f.at("start").get<std::size_t>(),
                                f.at("kind").get<std::string>(),
                                f.at("message").get<std::string>()});
      rep.rows.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
  return rep;
}

// Metrics down, policies across.
inline std::string render_table(const ExperimentReport& rep) {
  std::ostringstream out;
  std::size_t width = 10;
  for (const auto& r : rep.rows) width = std::max(width, r.policy.size() + 2);
  out << std::left << std::setw(12) << "Metric";
  for (const auto& r : rep.rows) out << std::right << std::setw(static_cast<int>(width)) << r.policy;
  out << "\n";
  const char* names[] = {"Hitting", "Switching", "Fairness", "Total"};
  for (int k = 0; k < 4; ++k) {
    out << std::left << std::setw(12) << names[k];
    for (const auto& r : rep.rows) {
      const double v = k == 0   ? r.mean.hitting
                       : k == 1 ? r.mean.switching
                       : k == 2 ? r.mean.fairness
                                : r.mean.total;
      out << std::right << std::setw(static_cast<int>(width)) << std::fixed
          << std::setprecision(2) << v;
    }
    out << "\n";
  }
  out << std::left << std::setw(12) << "Windows";
  for (const auto& r : rep.rows)
    out << std::right << std::setw(static_cast<int>(width))
        << (std::to_string(r.windows.size()) + "/" + std::to_string(rep.window_count));
  out << "\n";
  out << "config " << rep.config_hash << "  seed " << rep.seed << "\n";
  for (const auto& r : rep.rows) {
    for (const auto& w : r.warnings) out << "warning [" << r.policy << "] " << w << "\n";
    for (const auto& f : r.failures)
      out << "failed [" << r.policy << "] window " << f.start << " (" << f.kind
          << "): " << f.message << "\n";
  }
  return out.str();
}

}  // namespace fairobd::bench
