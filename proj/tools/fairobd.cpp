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


// fairobd: run the provisioning experiment, the lower-bound games, parameter
// sweeps and synthetic trace generation from the command line.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fairobd/adversary.hpp"
#include "fairobd/bench/experiment.hpp"
#include "fairobd/bench/report.hpp"
#include "fairobd/bench/synth.hpp"
#include "fairobd/bench/traces.hpp"
#include "fairobd/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fairobd;

namespace {

enum Exit { kOk = 0, kConfig = 1, kData = 2, kSolver = 3 };

struct Common {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::string policies;
  std::optional<double> eta;
  std::optional<std::size_t> window;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

// Applies command-line overrides to the raw config so the report records
// exactly what ran.
json effective_config(const Common& c) {
  json j = c.config.empty() ? json::object() : read_json(c.config);
  if (c.seed) {
    j["seed"] = *c.seed;
    if (j.contains("synthetic")) j["synthetic"]["seed"] = *c.seed;
  }
  if (c.window) j["window"] = *c.window;
  if (!c.policies.empty()) {
    j["policies"] = json::array();
    for (const auto& p : split_list(c.policies)) j["policies"].push_back(p);
  }
  if (c.eta) {
    if (!j.contains("policies")) {
      j["policies"] = json::array();
      for (PolicyKind k : kAllPolicies) j["policies"].push_back(std::string(to_string(k)));
    }
    for (auto& p : j["policies"]) {
      if (p.is_string()) p = json{{"policy", p}};
      const auto kind = parse_policy(p.at("policy").get<std::string>());
      if (kind == PolicyKind::kFairObd || kind == PolicyKind::kDmd) p["eta"] = *c.eta;
    }
  }
  return j;
}

fs::path config_dir(const Common& c) {
  return c.config.empty() ? fs::path{} : fs::path(c.config).parent_path();
}

bench::ExperimentReport run_once(const json& j, const fs::path& base) {
  const bench::TraceSource src = bench::parse_trace_source(j, base);
  const bench::Traces tr = bench::load_source(src);
  const bench::ExperimentConfig cfg = bench::parse_experiment_config(j, tr.locations());
  return bench::run_experiment(cfg, tr, j);
}

void write_report(const bench::ExperimentReport& rep, const fs::path& dir,
                  const std::string& stem) {
  fs::create_directories(dir);
  std::ofstream(dir / (stem + ".json")) << bench::to_json(rep).dump(2) << "\n";
  std::ofstream(dir / (stem + ".txt")) << bench::render_table(rep);
}

int report_status(const bench::ExperimentReport& rep) {
  return rep.has_convergence_failures() ? kSolver : kOk;
}

int cmd_run(const Common& c) {
  const json j = effective_config(c);
  const auto rep = run_once(j, config_dir(c));
  write_report(rep, c.out, "report");
  std::cout << bench::render_table(rep);
  return report_status(rep);
}

int cmd_sweep(const Common& c, const std::string& etas, const std::string& u3s,
              const std::string& lambda2s) {
  const json base = effective_config(c);
  auto values = [](const std::string& s, double fallback) {
    std::vector<double> v;
    for (const auto& item : split_list(s)) v.push_back(std::stod(item));
    if (v.empty()) v.push_back(fallback);
    return v;
  };
  const auto eta_v = values(etas, 1e-3);
  const auto u3_v = values(u3s, base.value("u3", 3.5));
  const auto l2_v = values(lambda2s, 30.0);

  int status = kOk;
  json summary = json::array();
  std::cout << "eta        u3        lambda2   FairOBD_total  FairOBD_fairness\n";
  for (double eta : eta_v)
    for (double u3 : u3_v)
      for (double l2 : l2_v) {
        json j = base;
        j["u3"] = u3;
        j["opt"] = false;
        j["fair_opt"] = false;
        j["policies"] = json::array({json{{"policy", "FairOBD"}, {"eta", eta}, {"lambda2", l2}}});
        const auto rep = run_once(j, config_dir(c));
        status = std::max(status, report_status(rep));
        const auto* row = rep.find("FairOBD");
        std::ostringstream stem;
        stem << "sweep_eta" << eta << "_u3" << u3 << "_l2" << l2;
        write_report(rep, c.out, stem.str());
        std::printf("%-10g %-9g %-9g %-14.4f %-.4f\n", eta, u3, l2, row->mean.total,
                    row->mean.fairness);
        summary.push_back({{"eta", eta}, {"u3", u3}, {"lambda2", l2},
                           {"mean", bench::to_json(row->mean)}});
      }
  fs::create_directories(c.out);
  std::ofstream(fs::path(c.out) / "sweep.json") << summary.dump(2) << "\n";
  return status;
}

int cmd_adversary(const std::string& game, const std::string& policy, std::size_t horizon,
                  double m0, std::optional<double> eta) {
  GameConfig cfg;
  cfg.horizon = horizon;
  cfg.m0 = m0;
  cfg.policy = parse_policy(policy);
  if (cfg.policy == PolicyKind::kRobd) {
    const Lambdas l = optimal_lambdas(m0, 0.0);
    cfg.hyper.lambda1 = l.lambda1;
    cfg.hyper.lambda2 = l.lambda2;
  }
  cfg.hyper.record_diagnostics = false;
  if (eta) cfg.hyper.eta = *eta;
  GameResult r;
  if (game == "regret")
    r = regret_game(cfg);
  else if (game == "cr")
    r = cr_game(cfg);
  else
    throw ConfigError("game must be 'regret' or 'cr'");
  json out = {{"game", game},
              {"policy", policy},
              {"T", horizon},
              {"m0", m0},
              {"online_cost", r.online_cost},
              {"offline_cost_bound", r.offline_cost_bound},
              {"certificate", r.infinite ? json("infinite") : json(r.certificate)},
              {"theoretical_bound", r.theoretical_bound},
              {"chosen_option", r.chosen_option},
              {"S_dagger", r.s_dagger},
              {"log", r.log}};
  std::cout << out.dump(2) << "\n";
  return kOk;
}

int cmd_synth(std::uint64_t seed, std::size_t days, std::size_t locations,
              const std::string& out) {
  const auto tr = bench::synth_trace(seed, days, locations);
  bench::write_traces(tr, out);
  std::cout << "wrote " << tr.horizon() << " hours x " << tr.locations()
            << " locations to " << out << "\n";
  return kOk;
}

int cmd_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  std::cout << bench::render_table(bench::report_from_json(j));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness-regularized smoothed online optimization"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "Experiment config (JSON)");
    sub->add_option("--out", common.out, "Output directory");
    sub->add_option("--seed", common.seed, "Seed override");
    sub->add_option("--policies", common.policies, "Comma-separated policies");
    sub->add_option("--eta", common.eta, "Dual step size for FairOBD and DMD");
    sub->add_option("--window", common.window, "Window length in hours");
  };

  auto* run = app.add_subcommand("run", "Run the sliding-window experiment");
  add_common(run);

  auto* sweep = app.add_subcommand("sweep", "Grid over eta, u3 and lambda2 for FairOBD");
  add_common(sweep);
  std::string etas, u3s, lambda2s;
  sweep->add_option("--etas", etas, "Comma-separated eta values");
  sweep->add_option("--u3s", u3s, "Comma-separated u3 values");
  sweep->add_option("--lambda2s", lambda2s, "Comma-separated lambda2 values");

  auto* adv = app.add_subcommand("adversary", "Play a lower-bound game");
  std::string game = "regret";
  std::string policy = "FairOBD";
  std::size_t horizon = 1000;
  double m0 = 2.0;
  std::optional<double> adv_eta;
  adv->add_option("game", game, "regret | cr")->check(CLI::IsMember({"regret", "cr"}));
  adv->add_option("--policy", policy, "FairOBD | ROBD | DMD | HitMin");
  adv->add_option("--T", horizon, "Horizon (even)");
  adv->add_option("--m0", m0, "Hitting curvature");
  adv->add_option("--eta", adv_eta, "Dual step size");

  auto* synth = app.add_subcommand("synth", "Write synthetic traces");
  std::uint64_t synth_seed = 0;
  std::size_t days = 7;
  std::size_t locations = 7;
  std::string synth_out = "traces";
  synth->add_option("--seed", synth_seed, "Seed");
  synth->add_option("--days", days, "Days of hourly data");
  synth->add_option("--locations", locations, "Number of datacenters");
  synth->add_option("--out", synth_out, "Output directory");

  auto* rep = app.add_subcommand("report", "Re-render a saved report");
  std::string report_path;
  rep->add_option("path", report_path, "report.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return cmd_run(common);
    if (*sweep) return cmd_sweep(common, etas, u3s, lambda2s);
    if (*adv) return cmd_adversary(game, policy, horizon, m0, adv_eta);
    if (*synth) return cmd_synth(synth_seed, days, locations, synth_out);
    if (*rep) return cmd_report(report_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const ConvergenceError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kSolver;
  } catch (const InfeasibleError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  }
  return kOk;
}
