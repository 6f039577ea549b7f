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

#include "driveby/selection.hpp"

#include <gtest/gtest.h>

#include "driveby/rng.hpp"

namespace driveby {
namespace {

CoverageCell cell(std::int64_t d, std::int64_t t = 0) { return CoverageCell{d, t}; }

// V1={a,b,c}, V2={c,d}, V3={d,e}; record counts 10/3/8
CoverageMatrix canonical_matrix() {
  CoverageMatrix m;
  m.add_vehicle(1, {cell(0), cell(1), cell(2)}, 10);
  m.add_vehicle(2, {cell(2), cell(3)}, 3);
  m.add_vehicle(3, {cell(3), cell(4)}, 8);
  return m;
}

CoverageMatrix random_instance(SplitMix64& rng, int max_vehicles = 12, int max_cells = 25) {
  CoverageMatrix m;
  const int n = 2 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_vehicles - 1)));
  const int cells = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_cells)));
  for (int v = 0; v < n; ++v) {
    std::vector<CoverageCell> s;
    const int k = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(cells) + 1));
    for (int i = 0; i < k; ++i)
      s.push_back(cell(static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(cells)))));
    m.add_vehicle(v, std::move(s), 1 + static_cast<std::int64_t>(rng.next_below(100)));
  }
  return m;
}

WeightMap random_weights(SplitMix64& rng, const CoverageMatrix& m) {
  WeightMap w;
  for (const auto& c : m.universe())
    w.set(c, 1.0 + static_cast<double>(rng.next_below(5)));
  return w;
}

TEST(SelectionGreedy, CanonicalExample) {
  const CoverageMatrix m = canonical_matrix();
  SelectionConfig cfg;
  cfg.budget = 2;
  const SelectionResult r = greedy_max_coverage(m, ColocationProfile(), cfg);
  ASSERT_EQ(r.chosen, (std::vector<std::int64_t>{1, 3}));
  EXPECT_DOUBLE_EQ(r.total_weighted_coverage, 5.0);
  EXPECT_EQ(r.marginal_gains, (std::vector<double>{3.0, 2.0}));
  EXPECT_TRUE(r.feasible);
  EXPECT_EQ(r.stop_reason, StopReason::kBudgetExhausted);
  // matches the exhaustive 2-subset enumeration
  const auto [opt, set] = brute_force_optimum(m, ColocationProfile(), cfg);
  EXPECT_DOUBLE_EQ(opt, 5.0);
  EXPECT_EQ(set, (std::vector<std::int64_t>{1, 3}));
}

TEST(SelectionGreedy, ZeroBudget) {
  SelectionConfig cfg;
  cfg.budget = 0;
  const SelectionResult r = greedy_max_coverage(canonical_matrix(), ColocationProfile(), cfg);
  EXPECT_TRUE(r.chosen.empty());
  EXPECT_DOUBLE_EQ(r.total_weighted_coverage, 0.0);
  EXPECT_EQ(r.stop_reason, StopReason::kBudgetExhausted);
}

TEST(SelectionGreedy, WeightsFlipTheOrder) {
  SelectionConfig cfg;
  cfg.budget = 2;
  cfg.weights.set(cell(3), 10.0);  // d
  cfg.weights.set(cell(4), 10.0);  // e
  const SelectionResult r = greedy_max_coverage(canonical_matrix(), ColocationProfile(), cfg);
  // V3 gains 20; then V1 gains 3 over V2's 1
  ASSERT_EQ(r.chosen, (std::vector<std::int64_t>{3, 1}));
  EXPECT_EQ(r.marginal_gains, (std::vector<double>{20.0, 3.0}));
  EXPECT_DOUBLE_EQ(r.total_weighted_coverage, 23.0);
}

TEST(SelectionGreedy, ReferenceColocationFilter) {
  ColocationProfile profile;
  profile.set_ref(1, 0);
  profile.set_ref(2, 2);
  profile.set_ref(3, 2);
  SelectionConfig cfg;
  cfg.budget = 2;
  cfg.min_ref_colocations = 1;
  const SelectionResult r = greedy_max_coverage(canonical_matrix(), profile, cfg);
  // V1 filtered out; V2 and V3 tie at gain 2, smaller id first
  ASSERT_EQ(r.chosen, (std::vector<std::int64_t>{2, 3}));
  EXPECT_DOUBLE_EQ(r.total_weighted_coverage, 3.0);
  EXPECT_TRUE(r.feasible);
}

TEST(SelectionGreedy, InfeasibleFleetReportsNotViolates) {
  ColocationProfile profile;  // nobody has any colocations
  SelectionConfig cfg;
  cfg.budget = 2;
  cfg.min_ref_colocations = 5;
  const SelectionResult r = greedy_max_coverage(canonical_matrix(), profile, cfg);
  EXPECT_TRUE(r.chosen.empty());
  EXPECT_FALSE(r.feasible);
  EXPECT_EQ(r.stop_reason, StopReason::kInfeasible);
}

TEST(SelectionGreedy, FewerFeasibleThanBudget) {
  ColocationProfile profile;
  profile.set_ref(2, 9);
  SelectionConfig cfg;
  cfg.budget = 3;
  cfg.min_ref_colocations = 1;
  const SelectionResult r = greedy_max_coverage(canonical_matrix(), profile, cfg);
  ASSERT_EQ(r.chosen, (std::vector<std::int64_t>{2}));
  EXPECT_FALSE(r.feasible);
  EXPECT_EQ(r.stop_reason, StopReason::kInfeasible);
}

TEST(SelectionGreedy, StopsAtZeroGain) {
  CoverageMatrix m;
  m.add_vehicle(1, {cell(0)}, 1);
  m.add_vehicle(2, {cell(0)}, 1);  // nothing new to add
  SelectionConfig cfg;
  cfg.budget = 2;
  const SelectionResult r = greedy_max_coverage(m, ColocationProfile(), cfg);
  ASSERT_EQ(r.chosen, (std::vector<std::int64_t>{1}));
  EXPECT_TRUE(r.feasible);
  EXPECT_EQ(r.stop_reason, StopReason::kNoGain);
}

TEST(SelectionGreedy, SelectedOnlyModeRecomputesEachRound) {
  // pair colocations: (1,2)=5, (1,3)=0, (2,3)=5
  ColocationProfile profile;
  profile.set_pair(1, 2, 5);
  profile.set_pair(2, 3, 5);
  SelectionConfig cfg;
  cfg.budget = 3;
  cfg.min_sensor_colocations = 1;
  cfg.sensor_colocation_mode = SensorColocationMode::kSelectedOnly;
  const SelectionResult r = greedy_max_coverage(canonical_matrix(), profile, cfg);
  // first pick unconstrained (nothing selected yet): V1 by gain; then only
  // V2 colocates with the selection; then V3 colocates with V2
  ASSERT_EQ(r.chosen, (std::vector<std::int64_t>{1, 2, 3}));
  EXPECT_TRUE(r.feasible);
}

TEST(SelectionGreedy, AllFleetModeUsesFleetTotals) {
  ColocationProfile profile;
  profile.set_pair(1, 2, 5);
  profile.set_pair(2, 3, 5);
  SelectionConfig cfg;
  cfg.budget = 3;
  cfg.min_sensor_colocations = 6;
  cfg.sensor_colocation_mode = SensorColocationMode::kAllFleet;
  const SelectionResult r = greedy_max_coverage(canonical_matrix(), profile, cfg);
  // fleet totals: V1:5, V2:10, V3:5 -> only V2 passes
  ASSERT_EQ(r.chosen, (std::vector<std::int64_t>{2}));
  EXPECT_FALSE(r.feasible);
}

TEST(SelectionMinBudget, Examples) {
  const CoverageMatrix m = canonical_matrix();
  SelectionConfig cfg;
  const SelectionResult zero = greedy_min_budget(m, ColocationProfile(), 0.0, cfg);
  EXPECT_TRUE(zero.chosen.empty());
  EXPECT_EQ(zero.stop_reason, StopReason::kCoverageReached);

  const SelectionResult five = greedy_min_budget(m, ColocationProfile(), 5.0, cfg);
  ASSERT_EQ(five.chosen, (std::vector<std::int64_t>{1, 3}));
  EXPECT_EQ(five.stop_reason, StopReason::kCoverageReached);
  EXPECT_DOUBLE_EQ(five.total_weighted_coverage, 5.0);

  const SelectionResult six = greedy_min_budget(m, ColocationProfile(), 6.0, cfg);
  EXPECT_FALSE(six.feasible);
  EXPECT_EQ(six.stop_reason, StopReason::kInfeasible);
  EXPECT_DOUBLE_EQ(six.total_weighted_coverage, 5.0);  // everything useful was taken
}

TEST(SelectionMinBudget, LastPickIsNecessary) {
  SplitMix64 rng(81);
  for (int iter = 0; iter < 200; ++iter) {
    const CoverageMatrix m = random_instance(rng);
    SelectionConfig cfg;
    cfg.weights = random_weights(rng, m);
    const double total = weighted_value(m.universe(), cfg.weights);
    if (total <= 0.0) continue;
    const double k = total * 0.7;
    const SelectionResult r = greedy_min_budget(m, ColocationProfile(), k, cfg);
    if (r.stop_reason != StopReason::kCoverageReached || r.chosen.empty()) continue;
    std::vector<std::int64_t> without(r.chosen.begin(), r.chosen.end() - 1);
    EXPECT_LT(weighted_value(union_coverage(m, without), cfg.weights), k);
    EXPECT_GE(r.total_weighted_coverage, k);
  }
}

TEST(SelectionIncremental, EmptyExistingReducesToGreedy) {
  const CoverageMatrix m = canonical_matrix();
  SelectionConfig cfg;
  cfg.budget = 2;
  const SelectionResult direct = greedy_max_coverage(m, ColocationProfile(), cfg);
  const SelectionResult incr = greedy_incremental(m, ColocationProfile(), {}, 2, cfg);
  EXPECT_EQ(direct.chosen, incr.chosen);
  EXPECT_DOUBLE_EQ(direct.total_weighted_coverage, incr.total_weighted_coverage);
}

TEST(SelectionIncremental, SeedsOccupancyFromExisting) {
  const CoverageMatrix m = canonical_matrix();
  SelectionConfig cfg;
  const SelectionResult r = greedy_incremental(m, ColocationProfile(), {1}, 1, cfg);
  // with V1 deployed, V3 gains 2 against V2's 1
  ASSERT_EQ(r.chosen, (std::vector<std::int64_t>{3}));
  EXPECT_EQ(r.marginal_gains, (std::vector<double>{2.0}));
  EXPECT_DOUBLE_EQ(r.total_weighted_coverage, 5.0);  // existing + new
}

TEST(SelectionIncremental, ZeroExtraBudget) {
  const SelectionResult r =
      greedy_incremental(canonical_matrix(), ColocationProfile(), {1}, 0, SelectionConfig());
  EXPECT_TRUE(r.chosen.empty());
  EXPECT_DOUBLE_EQ(r.total_weighted_coverage, 3.0);
}

TEST(SelectionIncremental, UnknownExistingIdThrows) {
  EXPECT_THROW(
      greedy_incremental(canonical_matrix(), ColocationProfile(), {42}, 1, SelectionConfig()),
      std::invalid_argument);
}

TEST(SelectionBruteForce, Examples) {
  const CoverageMatrix m = canonical_matrix();
  SelectionConfig cfg;
  cfg.budget = 2;
  const auto [v2, s2] = brute_force_optimum(m, ColocationProfile(), cfg);
  EXPECT_DOUBLE_EQ(v2, 5.0);
  EXPECT_EQ(s2, (std::vector<std::int64_t>{1, 3}));

  cfg.budget = 10;
  const auto [vall, sall] = brute_force_optimum(m, ColocationProfile(), cfg);
  EXPECT_DOUBLE_EQ(vall, 5.0);

  cfg.budget = 0;
  const auto [v0, s0] = brute_force_optimum(m, ColocationProfile(), cfg);
  EXPECT_DOUBLE_EQ(v0, 0.0);
  EXPECT_TRUE(s0.empty());
}

TEST(SelectionBruteForce, VehicleCapEnforced) {
  CoverageMatrix m;
  for (int v = 0; v < 21; ++v) m.add_vehicle(v, {cell(v)}, 1);
  SelectionConfig cfg;
  cfg.budget = 2;
  EXPECT_THROW(brute_force_optimum(m, ColocationProfile(), cfg), std::invalid_argument);
}

TEST(SelectionBaselines, RandomMpEligibilityPinsTheAnswer) {
  const CoverageMatrix m = canonical_matrix();  // counts 10 / 3 / 8
  for (std::uint64_t seed : {1ull, 2ull, 99ull, 12345ull}) {
    const SelectionResult r = baseline_random_mp(m, 5, 2, seed);
    std::vector<std::int64_t> sorted = r.chosen;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(sorted, (std::vector<std::int64_t>{1, 3}));  // only eligible pair
  }
}

TEST(SelectionBaselines, RandomMpDeterministicPerSeed) {
  const CoverageMatrix m = canonical_matrix();
  const SelectionResult a = baseline_random_mp(m, 0, 3, 7);
  const SelectionResult b = baseline_random_mp(m, 0, 3, 7);
  EXPECT_EQ(a.chosen, b.chosen);
  EXPECT_EQ(a.chosen.size(), 3u);
  std::vector<std::int64_t> sorted = a.chosen;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (std::vector<std::int64_t>{1, 2, 3}));  // budget >= n takes everyone
}

TEST(SelectionBaselines, MaxPointsSortsByCount) {
  const CoverageMatrix m = canonical_matrix();
  EXPECT_EQ(baseline_max_points(m, 2).chosen, (std::vector<std::int64_t>{1, 3}));
  EXPECT_TRUE(baseline_max_points(m, 0).chosen.empty());

  CoverageMatrix tie;
  tie.add_vehicle(1, {cell(0)}, 5);
  tie.add_vehicle(2, {cell(1)}, 5);
  EXPECT_EQ(baseline_max_points(tie, 1).chosen, (std::vector<std::int64_t>{1}));
}

TEST(SelectionInvariants, ApproximationGuarantee) {
  // integer weights keep both sides exact in doubles; the (1 - 1/e)
  // comparison uses a rational upper bound on 1/e so no floating-point
  // slack sneaks in
  constexpr std::int64_t kScale = 1'000'000'000'000'000;   // 1e15
  constexpr std::int64_t kInvE = 367'879'441'171'443;      // ceil(1e15 / e)
  SplitMix64 rng(2024);
  for (int iter = 0; iter < 200; ++iter) {
    const CoverageMatrix m = random_instance(rng);
    SelectionConfig cfg;
    cfg.weights = random_weights(rng, m);
    cfg.budget = 1 + static_cast<std::int64_t>(rng.next_below(5));
    const SelectionResult greedy = greedy_max_coverage(m, ColocationProfile(), cfg);
    const auto [opt, _] = brute_force_optimum(m, ColocationProfile(), cfg);
    const std::int64_t g = std::llround(greedy.total_weighted_coverage);
    const std::int64_t o = std::llround(opt);
    EXPECT_GE(g * kScale, o * (kScale - kInvE)) << "greedy " << g << " vs opt " << o;
  }
}

TEST(SelectionInvariants, GreedyOptimalOnDisjointSets) {
  SplitMix64 rng(515);
  for (int iter = 0; iter < 100; ++iter) {
    CoverageMatrix m;
    const int n = 2 + static_cast<int>(rng.next_below(8));
    std::int64_t next_cell = 0;
    for (int v = 0; v < n; ++v) {
      std::vector<CoverageCell> cells;
      const int k = 1 + static_cast<int>(rng.next_below(5));
      for (int i = 0; i < k; ++i) cells.push_back(cell(next_cell++));
      m.add_vehicle(v, std::move(cells), 1);
    }
    SelectionConfig cfg;
    cfg.budget = 1 + static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(n)));
    const SelectionResult greedy = greedy_max_coverage(m, ColocationProfile(), cfg);
    const auto [opt, _] = brute_force_optimum(m, ColocationProfile(), cfg);
    EXPECT_DOUBLE_EQ(greedy.total_weighted_coverage, opt);
  }
}

TEST(SelectionInvariants, MarginalGainsNonIncreasing) {
  SplitMix64 rng(626);
  for (int iter = 0; iter < 300; ++iter) {
    const CoverageMatrix m = random_instance(rng);
    SelectionConfig cfg;
    cfg.weights = random_weights(rng, m);
    cfg.budget = static_cast<std::int64_t>(m.vehicle_count());
    const SelectionResult r = greedy_max_coverage(m, ColocationProfile(), cfg);
    for (size_t i = 1; i < r.marginal_gains.size(); ++i)
      ASSERT_LE(r.marginal_gains[i], r.marginal_gains[i - 1]);
  }
}

TEST(SelectionInvariants, ConstraintsAlwaysHonored) {
  SplitMix64 rng(737);
  for (int iter = 0; iter < 300; ++iter) {
    const CoverageMatrix m = random_instance(rng, 8, 15);
    const auto vehicles = m.vehicle_ids();
    ColocationProfile profile;
    for (const std::int64_t v : vehicles)
      profile.set_ref(v, static_cast<std::int64_t>(rng.next_below(4)));
    for (size_t i = 0; i < vehicles.size(); ++i)
      for (size_t j = i + 1; j < vehicles.size(); ++j)
        if (rng.next_below(2))
          profile.set_pair(vehicles[i], vehicles[j],
                           static_cast<std::int64_t>(rng.next_below(4)));
    SelectionConfig cfg;
    cfg.budget = 1 + static_cast<std::int64_t>(rng.next_below(4));
    cfg.min_ref_colocations = 1 + static_cast<std::int64_t>(rng.next_below(3));
    cfg.min_sensor_colocations = 1 + static_cast<std::int64_t>(rng.next_below(3));
    const SelectionResult r = greedy_max_coverage(m, profile, cfg);
    const auto passes = [&](std::int64_t v) {
      std::int64_t sensor = 0;
      for (const std::int64_t other : vehicles)
        if (other != v) sensor += profile.pair_colocations(v, other);
      return profile.ref_colocations(v) >= cfg.min_ref_colocations &&
             sensor >= cfg.min_sensor_colocations;
    };
    for (const std::int64_t v : r.chosen) EXPECT_TRUE(passes(v));
    const bool any_pass = std::any_of(vehicles.begin(), vehicles.end(), passes);
    if (!any_pass) {
      // an infeasible fleet is reported, never worked around
      EXPECT_TRUE(r.chosen.empty());
      EXPECT_FALSE(r.feasible);
      EXPECT_EQ(r.stop_reason, StopReason::kInfeasible);
    }
    if (!r.feasible) {
      EXPECT_EQ(r.stop_reason, StopReason::kInfeasible);
    }
  }
}

}  // namespace
}  // namespace driveby
