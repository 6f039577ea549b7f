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

#include "driveby/synthgen.hpp"

#include <gtest/gtest.h>

#include <set>

#include "driveby/coverage.hpp"

namespace driveby {
namespace {

FleetSpec small_spec() {
  FleetSpec spec;
  spec.extent = BoundingBox(0.0, 0.0, 0.03, 0.01);  // ~3.3 km x 1.1 km
  spec.days = 2;
  spec.sample_interval_s = 60;
  spec.speed_mps = 5.0;
  spec.seed = 42;
  return spec;
}

TEST(SynthgenFixedRoute, SampleCountArithmetic) {
  FleetSpec spec = small_spec();
  // leg time = 3000 m / 5 mps = 600 s = 10 samples per one-way leg
  const std::vector<GeoPoint> route = {GeoPoint(0.005, 0.001),
                                       GeoPoint(0.005, 0.001 + 3000.0 / kMetersPerDegree)};
  const auto records = gen_fixed_route(route, spec, 0);
  EXPECT_EQ(records.size(), static_cast<size_t>(86400 / 60 * spec.days));
  for (const auto& r : records) EXPECT_TRUE(spec.extent.contains(r.location));
}

TEST(SynthgenFixedRoute, DaysRepeatIdentically) {
  FleetSpec spec = small_spec();
  const std::vector<GeoPoint> route = {GeoPoint(0.002, 0.001), GeoPoint(0.008, 0.02)};
  const auto records = gen_fixed_route(route, spec, 3);
  const size_t per_day = records.size() / 2;
  for (size_t i = 0; i < per_day; ++i) {
    EXPECT_EQ(records[i].timestamp + 86400, records[i + per_day].timestamp);
    EXPECT_DOUBLE_EQ(records[i].location.lat, records[i + per_day].location.lat);
    EXPECT_DOUBLE_EQ(records[i].location.lon, records[i + per_day].location.lon);
  }
}

TEST(SynthgenFixedRoute, RejectsDegenerateRoutes) {
  const FleetSpec spec = small_spec();
  EXPECT_THROW(gen_fixed_route({GeoPoint(0.005, 0.005)}, spec, 0), std::invalid_argument);
  EXPECT_THROW(gen_fixed_route({GeoPoint(0.005, 0.005), GeoPoint(0.005, 0.005)}, spec, 0),
               std::invalid_argument);
  EXPECT_THROW(gen_fixed_route({GeoPoint(0.005, 0.005), GeoPoint(0.5, 0.5)}, spec, 0),
               std::invalid_argument);
}

TEST(SynthgenWalk, DeterministicPerSeed) {
  const FleetSpec spec = small_spec();
  const auto a = gen_random_walk(spec, 1, 99);
  const auto b = gen_random_walk(spec, 1, 99);
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].timestamp, b[i].timestamp);
    EXPECT_DOUBLE_EQ(a[i].location.lat, b[i].location.lat);
    EXPECT_DOUBLE_EQ(a[i].location.lon, b[i].location.lon);
  }
  const auto c = gen_random_walk(spec, 1, 100);
  bool differs = false;
  for (size_t i = 0; i < a.size() && !differs; ++i)
    differs = a[i].location.lat != c[i].location.lat || a[i].location.lon != c[i].location.lon;
  EXPECT_TRUE(differs);
}

TEST(SynthgenWalk, StaysInsideExtent) {
  const FleetSpec spec = small_spec();
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const auto records = gen_random_walk(spec, 0, seed);
    EXPECT_EQ(records.size(), static_cast<size_t>(1440 * spec.days));
    for (const auto& r : records) EXPECT_TRUE(spec.extent.contains(r.location));
  }
}

TEST(SynthgenFleet, VehicleIdLayout) {
  FleetSpec spec = small_spec();
  spec.days = 1;
  spec.fixed_route_count = 0;
  spec.random_route_count = 0;
  EXPECT_TRUE(gen_fleet(spec).empty());

  spec.fixed_route_count = 2;
  spec.random_route_count = 3;
  const auto fleet = gen_fleet(spec);
  std::set<std::int64_t> ids;
  for (const auto& r : fleet) ids.insert(r.vehicle_id);
  EXPECT_EQ(ids, (std::set<std::int64_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(fleet.size(), 5u * 1440u);
}

TEST(SynthgenFleet, WholeFleetDeterministicPerSeed) {
  FleetSpec spec = small_spec();
  spec.days = 1;
  spec.fixed_route_count = 1;
  spec.random_route_count = 2;
  const auto a = gen_fleet(spec);
  const auto b = gen_fleet(spec);
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].vehicle_id, b[i].vehicle_id);
    EXPECT_DOUBLE_EQ(a[i].location.lon, b[i].location.lon);
  }
}

// Day-periodic fixed routes visit the same (stratum, interval-of-day)
// cells every day when the granularity divides a day.
TEST(SynthgenFleet, FixedRouteDailyCoverageRepeats) {
  FleetSpec spec = small_spec();
  spec.fixed_route_count = 1;
  spec.random_route_count = 0;
  spec.days = 2;
  const Stratification strat = make_grid(spec.extent, 100.0);
  StoreConfig cfg;
  cfg.temporal_granularity_s = 7200;
  const MobilityStore store = ingest(gen_fleet(spec), strat, cfg);
  const CoverageMatrix m = build_coverage(store);
  const std::int64_t per_day = 86400 / 7200;
  std::set<std::pair<std::int64_t, std::int64_t>> day0, day1;
  for (const auto& c : m.cells(0)) {
    if (c.interval_id < per_day) day0.insert({c.stratum_id, c.interval_id});
    else day1.insert({c.stratum_id, c.interval_id - per_day});
  }
  EXPECT_EQ(day0, day1);
}

// Folded-interval Jaccard across a midnight split: fixed routes carry
// their coverage into the future, walkers mostly do not.
TEST(SynthgenFleet, FixedRoutesPredictRandomWalksDont) {
  FleetSpec spec = small_spec();
  spec.days = 4;
  spec.fixed_route_count = 1;
  spec.random_route_count = 10;
  const Stratification strat = make_grid(spec.extent, 100.0);
  StoreConfig cfg;
  cfg.temporal_granularity_s = 7200;
  const std::int64_t per_day = 86400 / cfg.temporal_granularity_s;

  const auto fleet = gen_fleet(spec);
  const auto [train, test] = holdout_split(fleet, 2 * 86400);
  const CoverageMatrix train_m = build_coverage(ingest(train, strat, cfg));
  const CoverageMatrix test_m = build_coverage(ingest(test, strat, cfg));

  const auto folded = [&](const CoverageMatrix& m, std::int64_t v) {
    std::set<std::pair<std::int64_t, std::int64_t>> cells;
    for (const auto& c : m.cells(v)) cells.insert({c.stratum_id, c.interval_id % per_day});
    return cells;
  };
  const auto jaccard = [&](std::int64_t v) {
    const auto a = folded(train_m, v);
    const auto b = folded(test_m, v);
    std::vector<std::pair<std::int64_t, std::int64_t>> isect;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(isect));
    const size_t uni = a.size() + b.size() - isect.size();
    return uni == 0 ? 0.0 : static_cast<double>(isect.size()) / static_cast<double>(uni);
  };

  EXPECT_GE(jaccard(0), 0.9);  // the fixed-route vehicle
  double walker_sum = 0.0;
  for (std::int64_t v = 1; v <= 10; ++v) walker_sum += jaccard(v);
  EXPECT_LT(walker_sum / 10.0, jaccard(0));
}

}  // namespace
}  // namespace driveby
