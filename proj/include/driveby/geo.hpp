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
#include <stdexcept>
#include <string>

namespace driveby {

// Spherical earth model. All distances in this library are great-circle
// distances on a sphere of this radius.
inline constexpr double kEarthRadiusM = 6'371'000.0;

// Meters per degree of latitude (and of longitude at the equator),
// R * pi / 180. Roughly 111,194.93 m.
inline constexpr double kMetersPerDegree = kEarthRadiusM * 3.14159265358979323846 / 180.0;

inline double deg2rad(double deg) { return deg * 3.14159265358979323846 / 180.0; }

/// A WGS-coordinate pair in degrees. Construction rejects out-of-range
/// values; the default point is (0, 0).
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  GeoPoint() = default;
  GeoPoint(double lat_deg, double lon_deg) : lat(lat_deg), lon(lon_deg) {
    if (!(lat >= -90.0 && lat <= 90.0))
      throw std::invalid_argument("GeoPoint: latitude out of [-90, 90]: " + std::to_string(lat_deg));
    if (!(lon >= -180.0 && lon <= 180.0))
      throw std::invalid_argument("GeoPoint: longitude out of [-180, 180]: " + std::to_string(lon_deg));
  }
};

inline bool operator==(const GeoPoint& a, const GeoPoint& b) {
  return a.lat == b.lat && a.lon == b.lon;
}

/// Axis-aligned lon/lat rectangle, degrees.
struct BoundingBox {
  double min_lon = 0.0;
  double min_lat = 0.0;
  double max_lon = 0.0;
  double max_lat = 0.0;

  BoundingBox() = default;
  BoundingBox(double min_lon_, double min_lat_, double max_lon_, double max_lat_)
      : min_lon(min_lon_), min_lat(min_lat_), max_lon(max_lon_), max_lat(max_lat_) {
    if (min_lon > max_lon || min_lat > max_lat)
      throw std::invalid_argument("BoundingBox: min must not exceed max");
  }

  bool contains(const GeoPoint& p) const {
    return p.lon >= min_lon && p.lon <= max_lon && p.lat >= min_lat && p.lat <= max_lat;
  }

  double center_lat() const { return (min_lat + max_lat) / 2.0; }
  double center_lon() const { return (min_lon + max_lon) / 2.0; }
};

/// Great-circle distance in meters between two points.
inline double haversine_distance(const GeoPoint& a, const GeoPoint& b) {
  const double lat1 = deg2rad(a.lat);
  const double lat2 = deg2rad(b.lat);
  const double dlat = deg2rad(b.lat - a.lat);
  const double dlon = deg2rad(b.lon - a.lon);

  const double sin_lat = std::sin(dlat / 2.0);
  const double sin_lon = std::sin(dlon / 2.0);
  double h = sin_lat * sin_lat + std::cos(lat1) * std::cos(lat2) * sin_lon * sin_lon;
  // Clamp against rounding before the sqrt.
  if (h > 1.0) h = 1.0;
  if (h < 0.0) h = 0.0;
  return 2.0 * kEarthRadiusM * std::atan2(std::sqrt(h), std::sqrt(1.0 - h));
}

}  // namespace driveby
