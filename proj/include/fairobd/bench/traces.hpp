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

// Trace files for the data-center experiment.
//
// Workload CSV:      timestamp,workload
// Datacenter CSV:    timestamp,electricity_price,health_price
// Datacenter config: JSON {"datacenters": [{"name", "pue", "capacity",
//                    "series_path"}]}, series paths relative to the config.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairobd/error.hpp"
#include "fairobd/linalg.hpp"

namespace fairobd::bench {

struct DatacenterSpec {
  std::string name;
  double pue = 1.0;       // gamma_i
  double capacity = 1.0;  // M_i
  Vec electricity;        // $/MWh per hour
  Vec health;             // $/MWh per hour
};

struct Traces {
  std::vector<std::string> timestamps;
  Vec workload;  // normalized so that max = sum of capacities
  std::vector<DatacenterSpec> datacenters;

  std::size_t horizon() const { return workload.size(); }
  std::size_t locations() const { return datacenters.size(); }
  double total_capacity() const {
    double s = 0.0;
    for (const auto& d : datacenters) s += d.capacity;
    return s;
  }
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

namespace detail {

inline std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

inline std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_number(const std::string& cell, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    throw ParseError(where + ": not a number: '" + cell + "'");
  }
  if (used != cell.size()) throw ParseError(where + ": not a number: '" + cell + "'");
  if (!std::isfinite(v)) throw ParseError(where + ": non-finite value");
  return v;
}

}  // namespace detail

inline CsvTable parse_csv(std::istream& in, const std::string& name,
                          const std::vector<std::string>& expected) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split_row(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      if (t.header != expected) {
        std::string want;
        for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
        throw ParseError(name + ":" + std::to_string(lineno) +
                         ": expected header '" + want + "'");
      }
      continue;
    }
    if (cells.size() != expected.size())
      throw ParseError(name + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(expected.size()) + " columns, found " +
                       std::to_string(cells.size()));
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw ParseError(name + ": empty file");
  if (t.rows.empty()) throw ParseError(name + ": no data rows");
  return t;
}

inline CsvTable read_csv(const std::filesystem::path& path,
                         const std::vector<std::string>& expected) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_csv(in, path.string(), expected);
}

// Column `col` (0-based) of every row as numbers, >= 0.
inline Vec numeric_column(const CsvTable& t, std::size_t col, const std::string& name) {
  Vec out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string where = name + ": row " + std::to_string(r + 1) + ", column " +
                              t.header[col];
    const double v = detail::parse_number(t.rows[r][col], where);
    if (v < 0.0) throw ParseError(where + ": negative value");
    out.push_back(v);
  }
  return out;
}

// Scales the workload so its peak equals the total capacity.
inline void normalize_workload(Traces& tr) {
  const double peak = tr.workload.empty()
                          ? 0.0
                          : *std::max_element(tr.workload.begin(), tr.workload.end());
  if (peak <= 0.0) throw DataError("workload trace has no positive entries");
  const double scale = tr.total_capacity() / peak;
  for (double& w : tr.workload) w *= scale;
}

inline void validate_traces(const Traces& tr) {
  if (tr.workload.empty()) throw DataError("empty workload trace");
  if (tr.datacenters.empty()) throw DataError("no datacenters");
  const std::size_t h = tr.workload.size();
  for (const auto& d : tr.datacenters) {
    if (d.electricity.size() != h || d.health.size() != h)
      throw AlignmentError("datacenter '" + d.name + "' has " +
                           std::to_string(d.electricity.size()) +
                           " rows, workload has " + std::to_string(h));
    if (!(d.pue >= 1.0)) throw ConfigError("datacenter '" + d.name + "': pue must be >= 1");
    if (!(d.capacity > 0.0))
      throw ConfigError("datacenter '" + d.name + "': capacity must be > 0");
  }
}

inline Traces load_traces(const std::filesystem::path& workload_path,
                          const std::filesystem::path& datacenter_config_path) {
  Traces tr;
  const CsvTable wl = read_csv(workload_path, {"timestamp", "workload"});
  for (const auto& row : wl.rows) tr.timestamps.push_back(row[0]);
  tr.workload = numeric_column(wl, 1, workload_path.string());

  std::ifstream in(datacenter_config_path);
  if (!in) throw DataError("cannot open " + datacenter_config_path.string());
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(datacenter_config_path.string() + ": " + e.what());
  }
  if (!cfg.contains("datacenters") || !cfg["datacenters"].is_array())
    throw ParseError(datacenter_config_path.string() + ": missing 'datacenters' array");
  const auto base = datacenter_config_path.parent_path();
  for (const auto& entry : cfg["datacenters"]) {
    DatacenterSpec d;
    try {
      d.name = entry.at("name").get<std::string>();
      d.pue = entry.at("pue").get<double>();
      d.capacity = entry.at("capacity").get<double>();
      const auto series = base / entry.at("series_path").get<std::string>();
      const CsvTable t =
          read_csv(series, {"timestamp", "electricity_price", "health_price"});
      if (t.rows.size() != wl.rows.size())
        throw AlignmentError(series.string() + " has " + std::to_string(t.rows.size()) +
                             " rows, workload has " + std::to_string(wl.rows.size()));
      for (std::size_t r = 0; r < t.rows.size(); ++r)
        if (t.rows[r][0] != tr.timestamps[r])
          throw AlignmentError(series.string() + ": row " + std::to_string(r + 1) +
                               " timestamp '" + t.rows[r][0] + "' != workload '" +
                               tr.timestamps[r] + "'");
      d.electricity = numeric_column(t, 1, series.string());
      d.health = numeric_column(t, 2, series.string());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(datacenter_config_path.string() + ": " + e.what());
    }
    tr.datacenters.push_back(std::move(d));
  }
  validate_traces(tr);
  normalize_workload(tr);
  return tr;
}

// Writes traces in the format load_traces reads.
inline void write_traces(const Traces& tr, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto stamp = [&](std::size_t t) {
    return t < tr.timestamps.size() ? tr.timestamps[t] : std::to_string(t);
  };
  {
    std::ofstream out(dir / "workload.csv");
    out.precision(17);
    out << "timestamp,workload\n";
    for (std::size_t t = 0; t < tr.horizon(); ++t)
      out << stamp(t) << "," << tr.workload[t] << "\n";
  }
  nlohmann::json cfg;
  cfg["datacenters"] = nlohmann::json::array();
  for (const auto& d : tr.datacenters) {
    const std::string file = d.name + ".csv";
    std::ofstream out(dir / file);
    out.precision(17);
    out << "timestamp,electricity_price,health_price\n";
    for (std::size_t t = 0; t < tr.horizon(); ++t)
      out << stamp(t) << "," << d.electricity[t] << "," << d.health[t] << "\n";
    cfg["datacenters"].push_back(
        {{"name", d.name}, {"pue", d.pue}, {"capacity", d.capacity}, {"series_path", file}});
  }
  std::ofstream out(dir / "datacenters.json");
  out << cfg.dump(2) << "\n";
}

}  // namespace fairobd::bench
