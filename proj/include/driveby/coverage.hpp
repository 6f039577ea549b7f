// Copyright 2026 The Authors.
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

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "driveby/mobility.hpp"

namespace driveby {

/// One unit of coverage credit: a (stratum, interval) pair, counted at
/// most once per selection no matter how many transits hit it.
struct CoverageCell {
  std::int64_t stratum_id = 0;
  std::int64_t interval_id = 0;

  bool operator==(const CoverageCell& o) const {
    return stratum_id == o.stratum_id && interval_id == o.interval_id;
  }
  bool operator<(const CoverageCell& o) const {
    if (stratum_id != o.stratum_id) return stratum_id < o.stratum_id;
    return interval_id < o.interval_id;
  }
};

struct CoverageCellHash {
  size_t operator()(const CoverageCell& c) const {
    std::uint64_t h = static_cast<std::uint64_t>(c.stratum_id) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(c.interval_id) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    return static_cast<size_t>(h);
  }
};

/// Per-cell weights; cells not listed weigh `default_weight` (1 unless
/// configured otherwise). All weights must be >= 0.
class WeightMap {
 public:
  WeightMap() = default;
  explicit WeightMap(double default_weight) : default_(default_weight) {
    if (default_ < 0.0) throw std::invalid_argument("WeightMap: weights must be >= 0");
  }

  void set(const CoverageCell& cell, double w) {
    if (w < 0.0) throw std::invalid_argument("WeightMap: weights must be >= 0");
    weights_[cell] = w;
  }

  double at(const CoverageCell& cell) const {
    const auto it = weights_.find(cell);
    return it == weights_.end() ? default_ : it->second;
  }

  double default_weight() const { return default_; }
  const std::unordered_map<CoverageCell, double, CoverageCellHash>& explicit_weights() const {
    return weights_;
  }

 private:
  double default_ = 1.0;
  std::unordered_map<CoverageCell, double, CoverageCellHash> weights_;
};

/// Per-vehicle coverage-cell sets plus the universe (their union) and raw
/// record counts. Vehicles with no in-extent records keep an empty set.
class CoverageMatrix {
 public:
  CoverageMatrix() = default;

  /// `cells` may contain duplicates; they collapse here.
  void add_vehicle(std::int64_t vehicle_id, std::vector<CoverageCell> cells,
                   std::int64_t record_count) {
    if (sets_.count(vehicle_id))
      throw std::invalid_argument("CoverageMatrix: duplicate vehicle " +
                                  std::to_string(vehicle_id));
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    universe_stale_ = true;
    record_counts_[vehicle_id] = record_count;
    sets_[vehicle_id] = std::move(cells);
  }

  bool has_vehicle(std::int64_t vehicle_id) const { return sets_.count(vehicle_id) != 0; }

  const std::vector<CoverageCell>& cells(std::int64_t vehicle_id) const {
    const auto it = sets_.find(vehicle_id);
    if (it == sets_.end())
      throw std::invalid_argument("CoverageMatrix: unknown vehicle " + std::to_string(vehicle_id));
    return it->second;
  }

  std::int64_t record_count(std::int64_t vehicle_id) const {
    const auto it = record_counts_.find(vehicle_id);
    if (it == record_counts_.end())
      throw std::invalid_argument("CoverageMatrix: unknown vehicle " + std::to_string(vehicle_id));
    return it->second;
  }

  std::vector<std::int64_t> vehicle_ids() const {
    std::vector<std::int64_t> ids;
    ids.reserve(sets_.size());
    for (const auto& [v, _] : sets_) ids.push_back(v);
    return ids;
  }

  size_t vehicle_count() const { return sets_.size(); }

  const std::vector<CoverageCell>& universe() const {
    if (universe_stale_) {
      universe_.clear();
      for (const auto& [_, cells] : sets_)
        universe_.insert(universe_.end(), cells.begin(), cells.end());
      std::sort(universe_.begin(), universe_.end());
      universe_.erase(std::unique(universe_.begin(), universe_.end()), universe_.end());
      universe_stale_ = false;
    }
    return universe_;
  }

 private:
  std::map<std::int64_t, std::vector<CoverageCell>> sets_;  // ordered: deterministic iteration
  std::map<std::int64_t, std::int64_t> record_counts_;
  mutable std::vector<CoverageCell> universe_;
  mutable bool universe_stale_ = false;
};

/// Materialize per-vehicle coverage sets from an ingested store. Records
/// without a stratum contribute nothing; repeat visits to a cell collapse.
inline CoverageMatrix build_coverage(const MobilityStore& store) {
  std::map<std::int64_t, std::vector<CoverageCell>> cells;
  std::map<std::int64_t, std::int64_t> counts;
  for (const auto& r : store.records()) {
    ++counts[r.vehicle_id];
    if (r.stratum_id) cells[r.vehicle_id].push_back({*r.stratum_id, r.interval_id});
  }
  CoverageMatrix m;
  for (auto& [vehicle, _] : counts) {
    auto it = cells.find(vehicle);
    m.add_vehicle(vehicle, it == cells.end() ? std::vector<CoverageCell>{} : std::move(it->second),
                  counts[vehicle]);
  }
  return m;
}

/// Union of the chosen vehicles' cell sets (the support of the occupancy
/// variable). Throws on unknown ids.
inline std::vector<CoverageCell> union_coverage(const CoverageMatrix& m,
                                                const std::vector<std::int64_t>& vehicles) {
  std::vector<CoverageCell> out;
  for (const std::int64_t v : vehicles) {
    const auto& cells = m.cells(v);
    out.insert(out.end(), cells.begin(), cells.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Sum of cell weights; with unit weights this is the cardinality.
inline double weighted_value(const std::vector<CoverageCell>& cells, const WeightMap& w) {
  double total = 0.0;
  for (const auto& c : cells) total += w.at(c);
  return total;
}

enum class CoverageCounting {
  kUniqueCells,       // union semantics: each cell counts once
  kCellMultiplicity,  // literal per-vehicle sum: shared cells count per vehicle
};

/// Percentage Coverage: 100 * covered(selected) / covered(whole fleet),
/// 0 when the fleet covers nothing. The default counts each cell once
/// (union semantics); kCellMultiplicity sums per-vehicle cell counts
/// instead, double-counting cells visited by several selected vehicles.
inline double percentage_coverage(const CoverageMatrix& m,
                                  const std::vector<std::int64_t>& selected,
                                  CoverageCounting counting = CoverageCounting::kUniqueCells) {
  for (const std::int64_t v : selected) m.cells(v);  // validate ids
  if (counting == CoverageCounting::kCellMultiplicity) {
    std::int64_t num = 0, den = 0;
    for (const std::int64_t v : selected) num += static_cast<std::int64_t>(m.cells(v).size());
    for (const std::int64_t v : m.vehicle_ids()) den += static_cast<std::int64_t>(m.cells(v).size());
    return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
  }
  const size_t den = m.universe().size();
  if (den == 0) return 0.0;
  const size_t num = union_coverage(m, selected).size();
  return 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

/// Time-based split: records strictly before `boundary` train, the rest
/// test. Order within each half follows the input.
inline std::pair<std::vector<MobilityRecord>, std::vector<MobilityRecord>> holdout_split(
    const std::vector<MobilityRecord>& records, std::int64_t boundary) {
  std::vector<MobilityRecord> train, test;
  for (const auto& r : records) (r.timestamp < boundary ? train : test).push_back(r);
  return {std::move(train), std::move(test)};
}

/// Percentage Coverage of a selection on the held-out period. Vehicles
/// absent from the test period contribute nothing.
inline double evaluate_selection(const MobilityStore& train_store, const MobilityStore& test_store,
                                 const std::vector<std::int64_t>& selected) {
  if (train_store.config().temporal_granularity_s != test_store.config().temporal_granularity_s ||
      train_store.stratification().size() != test_store.stratification().size())
    throw std::invalid_argument("evaluate_selection: stores must share stratification and granularity");
  const CoverageMatrix test_m = build_coverage(test_store);
  std::vector<std::int64_t> present;
  for (const std::int64_t v : selected)
    if (test_m.has_vehicle(v)) present.push_back(v);
  return percentage_coverage(test_m, present);
}

// ---------------------------------------------------------------------------
// Coverage export: vehicle_id -> [[stratum_id, interval_id], ...]
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json coverage_to_json(const CoverageMatrix& m) {
  nlohmann::ordered_json doc;
  doc["universe_size"] = m.universe().size();
  nlohmann::ordered_json vehicles = nlohmann::ordered_json::object();
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (const std::int64_t v : m.vehicle_ids()) {
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const auto& c : m.cells(v)) cells.push_back({c.stratum_id, c.interval_id});
    vehicles[std::to_string(v)] = std::move(cells);
    counts[std::to_string(v)] = m.record_count(v);
  }
  doc["vehicles"] = std::move(vehicles);
  doc["record_counts"] = std::move(counts);
  return doc;
}

inline CoverageMatrix coverage_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("vehicles") || !doc["vehicles"].is_object())
    throw std::runtime_error("coverage file: expected object with 'vehicles'");
  CoverageMatrix m;
  for (const auto& [key, cells] : doc["vehicles"].items()) {
    std::int64_t vehicle = 0;
    if (!detail::parse_i64(key, vehicle))
      throw std::runtime_error("coverage file: non-integer vehicle id '" + key + "'");
    std::vector<CoverageCell> parsed;
    if (!cells.is_array()) throw std::runtime_error("coverage file: cells must be an array");
    for (const auto& c : cells) {
      if (!c.is_array() || c.size() != 2)
        throw std::runtime_error("coverage file: each cell must be [stratum_id, interval_id]");
      parsed.push_back({c[0].get<std::int64_t>(), c[1].get<std::int64_t>()});
    }
    std::int64_t count = static_cast<std::int64_t>(parsed.size());
    if (doc.contains("record_counts") && doc["record_counts"].contains(key))
      count = doc["record_counts"][key].get<std::int64_t>();
    m.add_vehicle(vehicle, std::move(parsed), count);
  }
  if (doc.contains("universe_size") &&
      doc["universe_size"].get<size_t>() != m.universe().size())
    throw std::runtime_error("coverage file: universe_size does not match the union of cells");
  return m;
}

inline CoverageMatrix load_coverage_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open coverage file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("coverage file " + path + ": " + e.what());
  }
  return coverage_from_json(doc);
}

inline void save_coverage_file(const CoverageMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write coverage file: " + path);
  out << coverage_to_json(m).dump(2) << '\n';
}

}  // namespace driveby
