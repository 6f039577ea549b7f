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
#include <bit>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "driveby/coverage.hpp"
#include "driveby/rng.hpp"

namespace driveby {

/// Whether a candidate's sensor-colocation count is taken against the
/// whole fleet (precomputable) or only the vehicles already selected
/// (recomputed every round; vacuous while the selection is empty).
enum class SensorColocationMode { kAllFleet, kSelectedOnly };

enum class StopReason { kBudgetExhausted, kNoGain, kCoverageReached, kInfeasible };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::kBudgetExhausted: return "budget_exhausted";
    case StopReason::kNoGain: return "no_gain";
    case StopReason::kCoverageReached: return "coverage_reached";
    case StopReason::kInfeasible: return "infeasible";
  }
  return "unknown";
}

struct SelectionConfig {
  std::int64_t budget = 0;                 // m: maximum vehicles to pick
  std::int64_t min_ref_colocations = 0;    // b
  std::int64_t min_sensor_colocations = 0; // s
  WeightMap weights;
  SensorColocationMode sensor_colocation_mode = SensorColocationMode::kAllFleet;

  void validate() const {
    if (budget < 0) throw std::invalid_argument("SelectionConfig: budget must be >= 0");
    if (min_ref_colocations < 0 || min_sensor_colocations < 0)
      throw std::invalid_argument("SelectionConfig: colocation minimums must be >= 0");
  }
};

/// Per-vehicle reference-monitor colocation counts and symmetric
/// per-pair sensor colocation counts.
class ColocationProfile {
 public:
  void set_ref(std::int64_t vehicle, std::int64_t count) {
    if (count < 0) throw std::invalid_argument("ColocationProfile: counts must be >= 0");
    ref_[vehicle] = count;
  }

  void set_pair(std::int64_t a, std::int64_t b, std::int64_t count) {
    if (a == b) throw std::invalid_argument("ColocationProfile: pair needs distinct vehicles");
    if (count < 0) throw std::invalid_argument("ColocationProfile: counts must be >= 0");
    pairs_[ordered(a, b)] = count;
  }

  std::int64_t ref_colocations(std::int64_t vehicle) const {
    const auto it = ref_.find(vehicle);
    return it == ref_.end() ? 0 : it->second;
  }

  std::int64_t pair_colocations(std::int64_t a, std::int64_t b) const {
    const auto it = pairs_.find(ordered(a, b));
    return it == pairs_.end() ? 0 : it->second;
  }

  const std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t>& pairs() const {
    return pairs_;
  }
  const std::map<std::int64_t, std::int64_t>& refs() const { return ref_; }

 private:
  static std::pair<std::int64_t, std::int64_t> ordered(std::int64_t a, std::int64_t b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  }
  std::map<std::int64_t, std::int64_t> ref_;
  std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> pairs_;
};

/// Build a profile by querying a store: Lb from reference monitors, Ls
/// pairs over every vehicle pair. Pair counting is quadratic in fleet
/// size; meant for the calibration-constrained path only.
inline ColocationProfile build_colocation_profile(const MobilityStore& store,
                                                  const std::vector<ReferenceMonitor>& monitors) {
  ColocationProfile profile;
  const auto vehicles = store.vehicle_ids();
  for (const std::int64_t v : vehicles)
    profile.set_ref(v, store.count_reference_colocations(v, monitors));
  for (size_t i = 0; i < vehicles.size(); ++i)
    for (size_t j = i + 1; j < vehicles.size(); ++j) {
      const std::int64_t c = store.count_pairwise_colocations(vehicles[i], vehicles[j]);
      if (c > 0) profile.set_pair(vehicles[i], vehicles[j], c);
    }
  return profile;
}

struct SelectionResult {
  std::vector<std::int64_t> chosen;     // pick order
  std::vector<double> marginal_gains;   // weighted gain of each pick
  double total_weighted_coverage = 0.0;
  bool feasible = true;
  StopReason stop_reason = StopReason::kBudgetExhausted;
};

namespace detail {

// Vehicles in ascending id order with cell sets remapped onto a dense
// universe; the id order doubles as the tie-break order.
struct DenseInstance {
  std::vector<std::int64_t> vehicles;
  std::vector<std::vector<std::uint32_t>> sets;
  std::vector<double> cell_weights;

  DenseInstance(const CoverageMatrix& m, const WeightMap& w) {
    vehicles = m.vehicle_ids();
    std::sort(vehicles.begin(), vehicles.end());
    const auto& universe = m.universe();
    std::unordered_map<CoverageCell, std::uint32_t, CoverageCellHash> index;
    index.reserve(universe.size());
    cell_weights.reserve(universe.size());
    for (std::uint32_t i = 0; i < universe.size(); ++i) {
      index[universe[i]] = i;
      cell_weights.push_back(w.at(universe[i]));
    }
    sets.reserve(vehicles.size());
    for (const std::int64_t v : vehicles) {
      std::vector<std::uint32_t> s;
      s.reserve(m.cells(v).size());
      for (const auto& c : m.cells(v)) s.push_back(index.at(c));
      sets.push_back(std::move(s));
    }
  }

  double gain(size_t vehicle_idx, const std::vector<char>& covered) const {
    double g = 0.0;
    for (const std::uint32_t c : sets[vehicle_idx])
      if (!covered[c]) g += cell_weights[c];
    return g;
  }

  void mark(size_t vehicle_idx, std::vector<char>& covered) const {
    for (const std::uint32_t c : sets[vehicle_idx]) covered[c] = 1;
  }
};

// Greedy loop shared by the max-coverage, budget-minimization and
// incremental variants. Picks the feasible vehicle with the largest
// weighted marginal gain each round, smallest id on ties, and stops on
// the first of: limit reached, coverage target met, zero best gain,
// feasible pool exhausted.
struct GreedyDriver {
  const DenseInstance& inst;
  const ColocationProfile& profile;
  std::int64_t min_ref;
  std::int64_t min_sensor;
  SensorColocationMode mode;

  std::vector<char> covered;
  std::vector<char> taken;               // selected or seeded as existing
  std::vector<std::int64_t> selected_ids;  // existing + picks, for selected_only counting
  double achieved = 0.0;

  GreedyDriver(const DenseInstance& inst_, const ColocationProfile& profile_,
               const SelectionConfig& cfg)
      : inst(inst_),
        profile(profile_),
        min_ref(cfg.min_ref_colocations),
        min_sensor(cfg.min_sensor_colocations),
        mode(cfg.sensor_colocation_mode),
        covered(inst_.cell_weights.size(), 0),
        taken(inst_.vehicles.size(), 0) {}

  bool feasible_candidate(size_t i) const {
    const std::int64_t v = inst.vehicles[i];
    if (min_ref > 0 && profile.ref_colocations(v) < min_ref) return false;
    if (min_sensor > 0) {
      if (mode == SensorColocationMode::kAllFleet) {
        std::int64_t total = 0;
        for (const std::int64_t other : inst.vehicles)
          if (other != v) total += profile.pair_colocations(v, other);
        return total >= min_sensor;
      }
      // selected_only: vacuous until something is selected
      if (!selected_ids.empty()) {
        std::int64_t total = 0;
        for (const std::int64_t other : selected_ids) total += profile.pair_colocations(v, other);
        return total >= min_sensor;
      }
    }
    return true;
  }

  void seed(size_t i) {
    taken[i] = 1;
    selected_ids.push_back(inst.vehicles[i]);
    achieved += inst.gain(i, covered);
    inst.mark(i, covered);
  }

  // One greedy round. Returns the picked index, or -1 with `why` set.
  std::ptrdiff_t pick(StopReason& why, double& gain_out) {
    std::ptrdiff_t best = -1;
    double best_gain = -1.0;
    bool any_feasible = false;
    for (size_t i = 0; i < inst.vehicles.size(); ++i) {
      if (taken[i]) continue;
      if (!feasible_candidate(i)) continue;
      any_feasible = true;
      const double g = inst.gain(i, covered);
      if (g > best_gain) {
        best_gain = g;
        best = static_cast<std::ptrdiff_t>(i);
      }
    }
    if (!any_feasible) {
      why = StopReason::kInfeasible;
      return -1;
    }
    if (best_gain <= 0.0) {
      why = StopReason::kNoGain;
      return -1;
    }
    taken[static_cast<size_t>(best)] = 1;
    selected_ids.push_back(inst.vehicles[static_cast<size_t>(best)]);
    achieved += best_gain;
    inst.mark(static_cast<size_t>(best), covered);
    gain_out = best_gain;
    return best;
  }
};

inline size_t vehicle_index(const DenseInstance& inst, std::int64_t vehicle) {
  const auto it = std::lower_bound(inst.vehicles.begin(), inst.vehicles.end(), vehicle);
  if (it == inst.vehicles.end() || *it != vehicle)
    throw std::invalid_argument("selection: unknown vehicle " + std::to_string(vehicle));
  return static_cast<size_t>(it - inst.vehicles.begin());
}

// Marginal gains of a fixed pick order (used by the baselines' reports).
inline SelectionResult result_for_order(const DenseInstance& inst,
                                        const std::vector<std::int64_t>& order) {
  SelectionResult result;
  std::vector<char> covered(inst.cell_weights.size(), 0);
  for (const std::int64_t v : order) {
    const size_t i = vehicle_index(inst, v);
    const double g = inst.gain(i, covered);
    inst.mark(i, covered);
    result.chosen.push_back(v);
    result.marginal_gains.push_back(g);
    result.total_weighted_coverage += g;
  }
  result.stop_reason = StopReason::kBudgetExhausted;
  return result;
}

}  // namespace detail

/// Greedy weighted max-coverage with optional calibration filters: each
/// round picks the feasible unselected vehicle with the largest weighted
/// marginal gain (smallest id on ties), up to cfg.budget picks. Stops
/// early when the best gain is zero; runs out of feasible candidates
/// before the budget -> a shorter list with feasible = false.
inline SelectionResult greedy_max_coverage(const CoverageMatrix& m,
                                           const ColocationProfile& profile,
                                           const SelectionConfig& cfg) {
  cfg.validate();
  const detail::DenseInstance inst(m, cfg.weights);
  detail::GreedyDriver driver(inst, profile, cfg);
  SelectionResult result;
  result.stop_reason = StopReason::kBudgetExhausted;
  while (static_cast<std::int64_t>(result.chosen.size()) < cfg.budget) {
    StopReason why = StopReason::kBudgetExhausted;
    double gain = 0.0;
    const std::ptrdiff_t i = driver.pick(why, gain);
    if (i < 0) {
      result.stop_reason = why;
      result.feasible = why != StopReason::kInfeasible;
      break;
    }
    result.chosen.push_back(inst.vehicles[static_cast<size_t>(i)]);
    result.marginal_gains.push_back(gain);
  }
  result.total_weighted_coverage = driver.achieved;
  return result;
}

/// Budget minimization: keep picking greedily until the achieved weighted
/// coverage reaches `min_coverage_k`. Infeasible when the feasible pool
/// or the remaining gain runs out first; cfg.budget is ignored.
inline SelectionResult greedy_min_budget(const CoverageMatrix& m,
                                         const ColocationProfile& profile, double min_coverage_k,
                                         const SelectionConfig& cfg) {
  if (min_coverage_k < 0.0)
    throw std::invalid_argument("greedy_min_budget: coverage target must be >= 0");
  const detail::DenseInstance inst(m, cfg.weights);
  detail::GreedyDriver driver(inst, profile, cfg);
  SelectionResult result;
  result.stop_reason = StopReason::kCoverageReached;
  while (driver.achieved < min_coverage_k) {
    StopReason why = StopReason::kBudgetExhausted;
    double gain = 0.0;
    const std::ptrdiff_t i = driver.pick(why, gain);
    if (i < 0) {
      result.stop_reason = StopReason::kInfeasible;
      result.feasible = false;
      break;
    }
    result.chosen.push_back(inst.vehicles[static_cast<size_t>(i)]);
    result.marginal_gains.push_back(gain);
  }
  result.total_weighted_coverage = driver.achieved;
  return result;
}

/// Incremental deployment: occupancy starts from `existing`, then up to
/// `extra_budget` additional vehicles are picked greedily from the rest.
/// The result lists only the new picks; total_weighted_coverage covers
/// existing plus new. In selected_only mode sensor colocations count
/// against existing and new picks alike.
inline SelectionResult greedy_incremental(const CoverageMatrix& m,
                                          const ColocationProfile& profile,
                                          const std::vector<std::int64_t>& existing,
                                          std::int64_t extra_budget, const SelectionConfig& cfg) {
  if (extra_budget < 0) throw std::invalid_argument("greedy_incremental: budget must be >= 0");
  const detail::DenseInstance inst(m, cfg.weights);
  detail::GreedyDriver driver(inst, profile, cfg);
  for (const std::int64_t v : existing) driver.seed(detail::vehicle_index(inst, v));
  SelectionResult result;
  result.stop_reason = StopReason::kBudgetExhausted;
  while (static_cast<std::int64_t>(result.chosen.size()) < extra_budget) {
    StopReason why = StopReason::kBudgetExhausted;
    double gain = 0.0;
    const std::ptrdiff_t i = driver.pick(why, gain);
    if (i < 0) {
      result.stop_reason = why;
      result.feasible = why != StopReason::kInfeasible;
      break;
    }
    result.chosen.push_back(inst.vehicles[static_cast<size_t>(i)]);
    result.marginal_gains.push_back(gain);
  }
  result.total_weighted_coverage = driver.achieved;
  return result;
}

/// Exact maximum by bounded exhaustive search, the test oracle for the
/// greedy. Evaluates every feasible subset within the budget; ties go to
/// the lexicographically smallest id set. Capped at 20 vehicles.
inline std::pair<double, std::vector<std::int64_t>> brute_force_optimum(
    const CoverageMatrix& m, const ColocationProfile& profile, const SelectionConfig& cfg) {
  cfg.validate();
  const detail::DenseInstance inst(m, cfg.weights);
  const size_t n = inst.vehicles.size();
  if (n > 20) throw std::invalid_argument("brute_force_optimum: capped at 20 vehicles");

  // Colocation filters remove vehicles up front (all-fleet semantics).
  std::vector<size_t> eligible;
  for (size_t i = 0; i < n; ++i) {
    const std::int64_t v = inst.vehicles[i];
    if (cfg.min_ref_colocations > 0 &&
        profile.ref_colocations(v) < cfg.min_ref_colocations)
      continue;
    if (cfg.min_sensor_colocations > 0) {
      std::int64_t total = 0;
      for (const std::int64_t other : inst.vehicles)
        if (other != v) total += profile.pair_colocations(v, other);
      if (total < cfg.min_sensor_colocations) continue;
    }
    eligible.push_back(i);
  }

  const size_t ne = eligible.size();
  double best_value = -1.0;
  std::vector<std::int64_t> best_set;
  std::vector<char> covered(inst.cell_weights.size(), 0);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << ne); ++mask) {
    if (static_cast<std::int64_t>(std::popcount(mask)) > cfg.budget) continue;
    std::fill(covered.begin(), covered.end(), 0);
    double value = 0.0;
    std::vector<std::int64_t> ids;
    for (size_t j = 0; j < ne; ++j) {
      if (!(mask >> j & 1)) continue;
      const size_t i = eligible[j];
      value += inst.gain(i, covered);
      inst.mark(i, covered);
      ids.push_back(inst.vehicles[i]);
    }
    if (value > best_value || (value == best_value && ids < best_set)) {
      best_value = value;
      best_set = std::move(ids);
    }
  }
  return {best_value, best_set};
}

/// Random-MP baseline: a uniform sample (without replacement) of up to
/// `budget` vehicles among those with at least `k_min_records` records.
/// splitmix64-driven Fisher-Yates; identical output for identical seeds.
inline SelectionResult baseline_random_mp(const CoverageMatrix& m, std::int64_t k_min_records,
                                          std::int64_t budget, std::uint64_t seed,
                                          const WeightMap& weights = WeightMap()) {
  if (budget < 0) throw std::invalid_argument("baseline_random_mp: budget must be >= 0");
  const detail::DenseInstance inst(m, weights);
  std::vector<std::int64_t> eligible;
  for (const std::int64_t v : inst.vehicles)
    if (m.record_count(v) >= k_min_records) eligible.push_back(v);

  SplitMix64 rng(seed);
  const size_t take = std::min<size_t>(static_cast<size_t>(budget), eligible.size());
  for (size_t i = 0; i < take; ++i) {
    const size_t j = i + static_cast<size_t>(rng.next_below(eligible.size() - i));
    std::swap(eligible[i], eligible[j]);
  }
  eligible.resize(take);
  return detail::result_for_order(inst, eligible);
}

/// Max Points baseline: the top-`budget` vehicles by raw record count,
/// smallest id on ties.
inline SelectionResult baseline_max_points(const CoverageMatrix& m, std::int64_t budget,
                                           const WeightMap& weights = WeightMap()) {
  if (budget < 0) throw std::invalid_argument("baseline_max_points: budget must be >= 0");
  const detail::DenseInstance inst(m, weights);
  std::vector<std::int64_t> order = inst.vehicles;
  std::stable_sort(order.begin(), order.end(), [&m](std::int64_t a, std::int64_t b) {
    const std::int64_t ca = m.record_count(a), cb = m.record_count(b);
    if (ca != cb) return ca > cb;
    return a < b;
  });
  if (static_cast<std::int64_t>(order.size()) > budget)
    order.resize(static_cast<size_t>(budget));
  return detail::result_for_order(inst, order);
}

}  // namespace driveby
