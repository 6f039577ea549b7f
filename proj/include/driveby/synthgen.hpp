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

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "driveby/geo.hpp"
#include "driveby/mobility.hpp"
#include "driveby/rng.hpp"

namespace driveby {

/// Synthetic fleet: day-periodic fixed-route vehicles (bus-like) plus
/// seeded random-waypoint walkers (taxi-like). All motion is constant
/// speed on straight lines in a planar frame anchored at the extent's
/// center latitude.
struct FleetSpec {
  std::int64_t fixed_route_count = 0;
  std::int64_t random_route_count = 0;
  BoundingBox extent;
  std::int64_t days = 1;
  std::int64_t sample_interval_s = 60;
  double speed_mps = 8.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (fixed_route_count < 0 || random_route_count < 0)
      throw std::invalid_argument("FleetSpec: vehicle counts must be >= 0");
    if (days < 1) throw std::invalid_argument("FleetSpec: days must be >= 1");
    if (sample_interval_s <= 0)
      throw std::invalid_argument("FleetSpec: sample interval must be > 0");
    if (!(speed_mps > 0.0)) throw std::invalid_argument("FleetSpec: speed must be > 0");
    if (extent.min_lon >= extent.max_lon || extent.min_lat >= extent.max_lat)
      throw std::invalid_argument("FleetSpec: degenerate extent");
  }
};

namespace detail {

// Planar frame: meters east/north of the extent's south-west corner.
struct LocalFrame {
  double origin_lat, origin_lon;
  double m_per_deg_lat, m_per_deg_lon;

  explicit LocalFrame(const BoundingBox& extent)
      : origin_lat(extent.min_lat),
        origin_lon(extent.min_lon),
        m_per_deg_lat(kMetersPerDegree),
        m_per_deg_lon(kMetersPerDegree * std::cos(deg2rad(extent.center_lat()))) {}

  GeoPoint to_geo(double x_m, double y_m) const {
    return GeoPoint(origin_lat + y_m / m_per_deg_lat, origin_lon + x_m / m_per_deg_lon);
  }
  double x_of(const GeoPoint& p) const { return (p.lon - origin_lon) * m_per_deg_lon; }
  double y_of(const GeoPoint& p) const { return (p.lat - origin_lat) * m_per_deg_lat; }
};

}  // namespace detail

/// Back-and-forth traversal of a polyline at constant speed, one record
/// per sample instant, restarting from the route head at every midnight
/// so each day's trace is identical up to the timestamp shift.
inline std::vector<MobilityRecord> gen_fixed_route(const std::vector<GeoPoint>& route,
                                                   const FleetSpec& spec,
                                                   std::int64_t vehicle_id) {
  spec.validate();
  if (route.size() < 2) throw std::invalid_argument("gen_fixed_route: route needs >= 2 points");
  for (const auto& p : route)
    if (!spec.extent.contains(p))
      throw std::invalid_argument("gen_fixed_route: route leaves the extent");

  const detail::LocalFrame frame(spec.extent);
  std::vector<double> xs, ys, cum;
  xs.reserve(route.size());
  ys.reserve(route.size());
  cum.push_back(0.0);
  for (const auto& p : route) {
    xs.push_back(frame.x_of(p));
    ys.push_back(frame.y_of(p));
  }
  for (size_t i = 1; i < route.size(); ++i)
    cum.push_back(cum[i - 1] + std::hypot(xs[i] - xs[i - 1], ys[i] - ys[i - 1]));
  const double length = cum.back();
  if (!(length > 0.0))
    throw std::invalid_argument("gen_fixed_route: route has zero length");

  const auto position_at = [&](double arc) -> GeoPoint {
    // fold onto the round trip, then walk the legs
    double u = std::fmod(arc, 2.0 * length);
    if (u > length) u = 2.0 * length - u;
    size_t leg = 1;
    while (leg < cum.size() - 1 && cum[leg] < u) ++leg;
    const double seg = cum[leg] - cum[leg - 1];
    const double f = seg > 0.0 ? (u - cum[leg - 1]) / seg : 0.0;
    return frame.to_geo(xs[leg - 1] + f * (xs[leg] - xs[leg - 1]),
                        ys[leg - 1] + f * (ys[leg] - ys[leg - 1]));
  };

  const std::int64_t samples_per_day = 86400 / spec.sample_interval_s;
  std::vector<MobilityRecord> records;
  records.reserve(static_cast<size_t>(samples_per_day * spec.days));
  for (std::int64_t day = 0; day < spec.days; ++day) {
    for (std::int64_t k = 0; k < samples_per_day; ++k) {
      const std::int64_t t_in_day = k * spec.sample_interval_s;
      records.emplace_back(vehicle_id, day * 86400 + t_in_day,
                           position_at(spec.speed_mps * static_cast<double>(t_in_day)));
    }
  }
  return records;
}

/// Random-waypoint walk: head to a uniform random point of the extent at
/// constant speed, pick the next waypoint on arrival. Positions never
/// leave the extent. Deterministic per seed.
inline std::vector<MobilityRecord> gen_random_walk(const FleetSpec& spec,
                                                   std::int64_t vehicle_id, std::uint64_t seed) {
  spec.validate();
  const detail::LocalFrame frame(spec.extent);
  const double width = frame.x_of(GeoPoint(spec.extent.min_lat, spec.extent.max_lon));
  const double height = frame.y_of(GeoPoint(spec.extent.max_lat, spec.extent.min_lon));

  SplitMix64 rng(seed);
  const auto draw = [&](double span) { return rng.next_unit() * span; };

  double x = draw(width), y = draw(height);
  double wx = draw(width), wy = draw(height);
  const auto clamp = [](double v, double hi) { return v < 0.0 ? 0.0 : (v > hi ? hi : v); };

  const std::int64_t samples_per_day = 86400 / spec.sample_interval_s;
  const std::int64_t total = samples_per_day * spec.days;
  std::vector<MobilityRecord> records;
  records.reserve(static_cast<size_t>(total));
  for (std::int64_t k = 0; k < total; ++k) {
    const std::int64_t ts =
        (k / samples_per_day) * 86400 + (k % samples_per_day) * spec.sample_interval_s;
    records.emplace_back(vehicle_id, ts, frame.to_geo(clamp(x, width), clamp(y, height)));

    double remaining = spec.speed_mps * static_cast<double>(spec.sample_interval_s);
    while (remaining > 0.0) {
      const double d = std::hypot(wx - x, wy - y);
      if (d <= remaining) {
        x = wx;
        y = wy;
        remaining -= d;
        wx = draw(width);
        wy = draw(height);
      } else {
        x += (wx - x) / d * remaining;
        y += (wy - y) / d * remaining;
        remaining = 0.0;
      }
    }
  }
  return records;
}

/// Whole fleet: fixed-route vehicles first (ids 0..fixed-1) on evenly
/// spaced parallel lines spanning the extent's longer axis, then walkers
/// with per-vehicle derived seeds.
inline std::vector<MobilityRecord> gen_fleet(const FleetSpec& spec) {
  spec.validate();
  const detail::LocalFrame frame(spec.extent);
  const double lon_span = spec.extent.max_lon - spec.extent.min_lon;
  const double lat_span = spec.extent.max_lat - spec.extent.min_lat;
  const double width = lon_span * frame.m_per_deg_lon;
  const double height = lat_span * frame.m_per_deg_lat;
  const bool horizontal = width >= height;

  std::vector<MobilityRecord> fleet;
  for (std::int64_t i = 0; i < spec.fixed_route_count; ++i) {
    std::vector<GeoPoint> route;
    const double frac = (static_cast<double>(i) + 0.5) / static_cast<double>(spec.fixed_route_count);
    if (horizontal) {
      const double lat = spec.extent.min_lat + frac * lat_span;
      const double inset = 0.001 * lon_span;
      route.emplace_back(lat, spec.extent.min_lon + inset);
      route.emplace_back(lat, spec.extent.max_lon - inset);
    } else {
      const double lon = spec.extent.min_lon + frac * lon_span;
      const double inset = 0.001 * lat_span;
      route.emplace_back(spec.extent.min_lat + inset, lon);
      route.emplace_back(spec.extent.max_lat - inset, lon);
    }
    const auto records = gen_fixed_route(route, spec, i);
    fleet.insert(fleet.end(), records.begin(), records.end());
  }
  for (std::int64_t i = 0; i < spec.random_route_count; ++i) {
    const std::int64_t vehicle = spec.fixed_route_count + i;
    const auto records =
        gen_random_walk(spec, vehicle, derive_seed(spec.seed, static_cast<std::uint64_t>(vehicle)));
    fleet.insert(fleet.end(), records.begin(), records.end());
  }
  return fleet;
}

}  // namespace driveby
