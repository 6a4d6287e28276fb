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

// Seeded synthetic stand-in for the hourly workload, electricity-price and
// health-price traces. Location levels follow measured per-site
// averages; each series gets a diurnal swing with its own phase.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include "fairobd/bench/traces.hpp"
#include "fairobd/error.hpp"

namespace fairobd::bench {

struct SiteProfile {
  const char* name;
  double health;       // mean $/MWh
  double electricity;  // mean $/MWh
  double pue;
};

inline constexpr SiteProfile kSites[] = {
    {"arizona", 17.29, 77.7, 1.18},  {"iowa", 62.81, 62.6, 1.16},
    {"illinois", 49.93, 82.6, 1.35}, {"texas", 48.19, 63.0, 1.28},
    {"virginia", 52.68, 87.0, 1.14}, {"washington", 17.55, 62.0, 1.15},
    {"wyoming", 34.79, 76.1, 1.11},
};

inline constexpr double kHealthMin = 17.0;
inline constexpr double kHealthMax = 63.0;

inline Traces synth_trace(std::uint64_t seed, std::size_t days, std::size_t n) {
  if (days < 1) throw DomainError("synth_trace needs days >= 1");
  if (n < 1) throw DomainError("synth_trace needs at least one location");
  const std::size_t horizon = 24 * days;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double omega = 2.0 * std::numbers::pi / 24.0;

  Traces tr;
  tr.timestamps.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) tr.timestamps.push_back(std::to_string(t));

  // Inference demand peaks mid-afternoon, with a mild weekday effect.
  tr.workload.resize(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    const double hour = static_cast<double>(t % 24);
    const double day = static_cast<double>(t / 24);
    double w = 0.55 + 0.3 * std::sin(omega * (hour - 9.0)) +
               0.05 * std::sin(2.0 * std::numbers::pi * day / 7.0) +
               0.03 * noise(rng);
    tr.workload[t] = std::max(w, 0.05);
  }

  for (std::size_t i = 0; i < n; ++i) {
    const SiteProfile& site = kSites[i % std::size(kSites)];
    DatacenterSpec d;
    d.name = site.name;
    if (i >= std::size(kSites)) d.name += "_" + std::to_string(i / std::size(kSites));
    // Extra copies get a small level shift so locations stay distinct.
    const double shift = 1.0 + 0.04 * static_cast<double>(i / std::size(kSites));
    d.pue = site.pue;
    d.capacity = 1.0;
    const double e_level = site.electricity * shift;
    const double h_level = std::clamp(site.health * shift, kHealthMin, kHealthMax);
    const double h_amp =
        std::min({0.3 * h_level, h_level - kHealthMin, kHealthMax - h_level});
    // Time zones shift the local cycle by a few hours.
    const double phase = 3.0 * unif(rng) + static_cast<double>(i % 4);
    d.electricity.resize(horizon);
    d.health.resize(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
      const double hour = static_cast<double>(t % 24) - phase;
      d.electricity[t] = std::max(
          e_level * (1.0 + 0.15 * std::sin(omega * (hour - 10.0)) + 0.02 * noise(rng)),
          0.0);
      const double h = h_level + h_amp * std::sin(omega * (hour - 4.0)) +
                       0.02 * h_level * noise(rng);
      d.health[t] = std::clamp(h, kHealthMin, kHealthMax);
    }
    tr.datacenters.push_back(std::move(d));
  }
  validate_traces(tr);
  normalize_workload(tr);
  return tr;
}

}  // namespace fairobd::bench
