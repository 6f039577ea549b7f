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
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "driveby/geo.hpp"

namespace driveby {

/// One spatial partition cell: either a rectangle or a simple polygon ring.
struct Stratum {
  std::int64_t id = 0;
  bool is_box = true;
  BoundingBox box;              // valid when is_box
  std::vector<GeoPoint> ring;   // valid when !is_box; open ring (no repeated closing vertex)

  static Stratum rect(std::int64_t id, const BoundingBox& b) {
    Stratum s;
    s.id = id;
    s.is_box = true;
    s.box = b;
    return s;
  }
  static Stratum polygon(std::int64_t id, std::vector<GeoPoint> ring) {
    Stratum s;
    s.id = id;
    s.is_box = false;
    s.ring = std::move(ring);
    return s;
  }

  BoundingBox bounds() const {
    if (is_box) return box;
    double lo_lon = ring[0].lon, hi_lon = ring[0].lon;
    double lo_lat = ring[0].lat, hi_lat = ring[0].lat;
    for (const auto& p : ring) {
      lo_lon = std::min(lo_lon, p.lon);
      hi_lon = std::max(hi_lon, p.lon);
      lo_lat = std::min(lo_lat, p.lat);
      hi_lat = std::max(hi_lat, p.lat);
    }
    return BoundingBox(lo_lon, lo_lat, hi_lon, hi_lat);
  }
};

namespace detail {

inline bool point_on_segment(const GeoPoint& p, const GeoPoint& a, const GeoPoint& b) {
  const double cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
  if (cross != 0.0) return false;
  return p.lon >= std::min(a.lon, b.lon) && p.lon <= std::max(a.lon, b.lon) &&
         p.lat >= std::min(a.lat, b.lat) && p.lat <= std::max(a.lat, b.lat);
}

/// Even-odd ray casting; points exactly on the boundary count as inside.
inline bool point_in_ring(const std::vector<GeoPoint>& ring, const GeoPoint& p) {
  const size_t n = ring.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++)
    if (point_on_segment(p, ring[j], ring[i])) return true;
  bool inside = false;
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const bool cross_lat = (ring[i].lat > p.lat) != (ring[j].lat > p.lat);
    if (cross_lat) {
      const double x = ring[i].lon + (ring[j].lon - ring[i].lon) * (p.lat - ring[i].lat) /
                                         (ring[j].lat - ring[i].lat);
      if (p.lon < x) inside = !inside;
    }
  }
  return inside;
}

inline int orientation(const GeoPoint& a, const GeoPoint& b, const GeoPoint& c) {
  const double v = (b.lon - a.lon) * (c.lat - a.lat) - (b.lat - a.lat) * (c.lon - a.lon);
  return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
}

inline bool segments_intersect(const GeoPoint& a, const GeoPoint& b, const GeoPoint& c,
                               const GeoPoint& d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && point_on_segment(c, a, b)) return true;
  if (o2 == 0 && point_on_segment(d, a, b)) return true;
  if (o3 == 0 && point_on_segment(a, c, d)) return true;
  if (o4 == 0 && point_on_segment(b, c, d)) return true;
  return false;
}

inline void validate_ring(const std::vector<GeoPoint>& ring) {
  std::vector<GeoPoint> distinct;
  for (const auto& p : ring)
    if (std::find(distinct.begin(), distinct.end(), p) == distinct.end()) distinct.push_back(p);
  if (distinct.size() < 3)
    throw std::invalid_argument("stratum polygon needs >= 3 distinct vertices");
  const size_t n = ring.size();
  if (n < 3) throw std::invalid_argument("stratum polygon needs >= 3 vertices");
  // Non-adjacent edge pairs must not touch.
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      const size_t i2 = (i + 1) % n, j2 = (j + 1) % n;
      if (i == j || i2 == j || j2 == i) continue;  // adjacent edges share a vertex
      if (segments_intersect(ring[i], ring[i2], ring[j], ring[j2]))
        throw std::invalid_argument("stratum polygon is self-intersecting");
    }
  }
}

}  // namespace detail

/// The city partition: a list of uniquely-numbered strata with a
/// point -> stratum lookup. Immutable once built. Grid stratifications
/// keep their construction parameters so lookups stay arithmetic;
/// polygon sets get a bucket index over the extent.
class Stratification {
 public:
  /// Uniform grid over `extent` with square-ish cells of side `cell_size_m`.
  /// The degree steps are fixed at the extent's center latitude; the last
  /// row/column absorbs the remainder so the cells tile the extent exactly.
  /// Ids run row-major from (min_lat, min_lon), starting at 0.
  static Stratification make_grid(const BoundingBox& extent, double cell_size_m) {
    if (!(cell_size_m > 0.0)) throw std::invalid_argument("make_grid: cell_size_m must be > 0");
    if (extent.min_lon >= extent.max_lon || extent.min_lat >= extent.max_lat)
      throw std::invalid_argument("make_grid: degenerate extent");
    const double cos_lat = std::cos(deg2rad(extent.center_lat()));
    if (cos_lat <= 0.01) throw std::invalid_argument("make_grid: polar extent unsupported");

    Stratification s;
    s.extent_ = extent;
    s.granularity_m_ = cell_size_m;
    s.is_grid_ = true;
    s.lat_step_ = cell_size_m / kMetersPerDegree;
    s.lon_step_ = cell_size_m / (kMetersPerDegree * cos_lat);
    const double lat_span = extent.max_lat - extent.min_lat;
    const double lon_span = extent.max_lon - extent.min_lon;
    s.rows_ = std::max<std::int64_t>(1, std::llround(lat_span / s.lat_step_));
    s.cols_ = std::max<std::int64_t>(1, std::llround(lon_span / s.lon_step_));

    s.strata_.reserve(static_cast<size_t>(s.rows_ * s.cols_));
    for (std::int64_t r = 0; r < s.rows_; ++r) {
      const double lat0 = extent.min_lat + static_cast<double>(r) * s.lat_step_;
      const double lat1 = r == s.rows_ - 1 ? extent.max_lat : lat0 + s.lat_step_;
      for (std::int64_t c = 0; c < s.cols_; ++c) {
        const double lon0 = extent.min_lon + static_cast<double>(c) * s.lon_step_;
        const double lon1 = c == s.cols_ - 1 ? extent.max_lon : lon0 + s.lon_step_;
        s.strata_.push_back(Stratum::rect(r * s.cols_ + c, BoundingBox(lon0, lat0, lon1, lat1)));
      }
    }
    return s;
  }

  /// Custom strata from validated polygons. Ids must be unique; the extent
  /// is the union bounding box.
  static Stratification from_polygons(std::vector<Stratum> strata) {
    if (strata.empty()) throw std::invalid_argument("stratification needs >= 1 stratum");
    Stratification s;
    for (auto& st : strata) {
      if (!st.is_box) detail::validate_ring(st.ring);
    }
    std::sort(strata.begin(), strata.end(),
              [](const Stratum& a, const Stratum& b) { return a.id < b.id; });
    for (size_t i = 1; i < strata.size(); ++i)
      if (strata[i].id == strata[i - 1].id)
        throw std::invalid_argument("duplicate stratum_id " + std::to_string(strata[i].id));
    BoundingBox ext = strata[0].bounds();
    for (const auto& st : strata) {
      const BoundingBox b = st.bounds();
      ext = BoundingBox(std::min(ext.min_lon, b.min_lon), std::min(ext.min_lat, b.min_lat),
                        std::max(ext.max_lon, b.max_lon), std::max(ext.max_lat, b.max_lat));
    }
    s.extent_ = ext;
    s.strata_ = std::move(strata);
    s.build_bucket_index();
    return s;
  }

  const std::vector<Stratum>& strata() const { return strata_; }
  const BoundingBox& extent() const { return extent_; }
  std::optional<double> spatial_granularity_m() const { return granularity_m_; }
  bool is_grid() const { return is_grid_; }
  size_t size() const { return strata_.size(); }

  /// Id of the stratum containing p, or nullopt when none does. Points
  /// exactly on a shared boundary go to the smallest id.
  std::optional<std::int64_t> assign(const GeoPoint& p) const {
    if (is_grid_) return assign_grid(p);
    if (!extent_.contains(p)) return std::nullopt;
    const auto& bucket = bucket_for(p);
    for (const std::uint32_t idx : bucket) {
      const Stratum& st = strata_[idx];
      if (st.is_box) {
        if (st.box.contains(p)) return st.id;
      } else {
        if (st.bounds().contains(p) && detail::point_in_ring(st.ring, p)) return st.id;
      }
    }
    return std::nullopt;
  }

 private:
  std::optional<std::int64_t> assign_grid(const GeoPoint& p) const {
    if (!extent_.contains(p)) return std::nullopt;
    const double x = (p.lon - extent_.min_lon) / lon_step_;
    const double y = (p.lat - extent_.min_lat) / lat_step_;
    std::int64_t c = static_cast<std::int64_t>(std::floor(x));
    std::int64_t r = static_cast<std::int64_t>(std::floor(y));
    if (c >= cols_) c = cols_ - 1;  // clipped/stretched last column
    if (r >= rows_) r = rows_ - 1;
    // Interior shared boundaries tie-break to the smaller id.
    if (c > 0 && c < cols_ && x == static_cast<double>(c)) --c;
    if (r > 0 && r < rows_ && y == static_cast<double>(r)) --r;
    return r * cols_ + c;
  }

  void build_bucket_index() {
    const size_t n = strata_.size();
    bucket_dim_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::sqrt(static_cast<double>(n))));
    buckets_.assign(static_cast<size_t>(bucket_dim_ * bucket_dim_), {});
    const double w = (extent_.max_lon - extent_.min_lon) / static_cast<double>(bucket_dim_);
    const double h = (extent_.max_lat - extent_.min_lat) / static_cast<double>(bucket_dim_);
    bucket_w_ = w > 0.0 ? w : 1.0;
    bucket_h_ = h > 0.0 ? h : 1.0;
    for (std::uint32_t i = 0; i < n; ++i) {
      const BoundingBox b = strata_[i].bounds();
      const auto [c0, r0] = bucket_coords(GeoPoint(b.min_lat, b.min_lon));
      const auto [c1, r1] = bucket_coords(GeoPoint(b.max_lat, b.max_lon));
      for (std::int64_t r = r0; r <= r1; ++r)
        for (std::int64_t c = c0; c <= c1; ++c)
          buckets_[static_cast<size_t>(r * bucket_dim_ + c)].push_back(i);
    }
    // strata_ is sorted by id, so bucket candidate order preserves the
    // smallest-id tie rule.
  }

  std::pair<std::int64_t, std::int64_t> bucket_coords(const GeoPoint& p) const {
    auto clamp = [](std::int64_t v, std::int64_t hi) { return std::min(std::max<std::int64_t>(v, 0), hi); };
    const std::int64_t c = static_cast<std::int64_t>(std::floor((p.lon - extent_.min_lon) / bucket_w_));
    const std::int64_t r = static_cast<std::int64_t>(std::floor((p.lat - extent_.min_lat) / bucket_h_));
    return {clamp(c, bucket_dim_ - 1), clamp(r, bucket_dim_ - 1)};
  }

  const std::vector<std::uint32_t>& bucket_for(const GeoPoint& p) const {
    const auto [c, r] = bucket_coords(p);
    return buckets_[static_cast<size_t>(r * bucket_dim_ + c)];
  }

  std::vector<Stratum> strata_;
  BoundingBox extent_;
  std::optional<double> granularity_m_;

  bool is_grid_ = false;
  std::int64_t rows_ = 0, cols_ = 0;
  double lat_step_ = 0.0, lon_step_ = 0.0;

  std::int64_t bucket_dim_ = 0;
  double bucket_w_ = 1.0, bucket_h_ = 1.0;
  std::vector<std::vector<std::uint32_t>> buckets_;
};

inline Stratification make_grid(const BoundingBox& extent, double cell_size_m) {
  return Stratification::make_grid(extent, cell_size_m);
}

inline std::optional<std::int64_t> assign_stratum(const Stratification& s, const GeoPoint& p) {
  return s.assign(p);
}

// ---------------------------------------------------------------------------
// GeoJSON strata files
// ---------------------------------------------------------------------------

/// FeatureCollection of Polygon features with a "stratum_id" property.
inline nlohmann::ordered_json strata_to_geojson(const Stratification& s) {
  nlohmann::ordered_json doc;
  doc["type"] = "FeatureCollection";
  doc["bbox"] = {s.extent().min_lon, s.extent().min_lat, s.extent().max_lon, s.extent().max_lat};
  if (s.spatial_granularity_m()) doc["spatial_granularity_m"] = *s.spatial_granularity_m();
  nlohmann::ordered_json features = nlohmann::ordered_json::array();
  for (const auto& st : s.strata()) {
    nlohmann::ordered_json f;
    f["type"] = "Feature";
    f["properties"] = {{"stratum_id", st.id}};
    nlohmann::ordered_json ring = nlohmann::ordered_json::array();
    if (st.is_box) {
      const auto& b = st.box;
      ring.push_back({b.min_lon, b.min_lat});
      ring.push_back({b.max_lon, b.min_lat});
      ring.push_back({b.max_lon, b.max_lat});
      ring.push_back({b.min_lon, b.max_lat});
      ring.push_back({b.min_lon, b.min_lat});
    } else {
      for (const auto& p : st.ring) ring.push_back({p.lon, p.lat});
      ring.push_back({st.ring.front().lon, st.ring.front().lat});
    }
    f["geometry"] = {{"type", "Polygon"}, {"coordinates", nlohmann::ordered_json::array({ring})}};
    features.push_back(std::move(f));
  }
  doc["features"] = std::move(features);
  return doc;
}

/// Parse a strata FeatureCollection. Every feature must be a Polygon.
/// Ids come from the "stratum_id" property when all features carry one;
/// otherwise they are assigned in feature order.
inline Stratification load_strata_json(const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array())
    throw std::runtime_error("strata file: expected a GeoJSON FeatureCollection");
  const auto& features = doc["features"];
  if (features.empty()) throw std::runtime_error("strata file: no features");

  size_t with_id = 0;
  for (const auto& f : features) {
    if (f.contains("properties") && f["properties"].is_object() &&
        f["properties"].contains("stratum_id") && f["properties"]["stratum_id"].is_number_integer())
      ++with_id;
  }
  if (with_id != 0 && with_id != features.size())
    throw std::runtime_error("strata file: stratum_id present on some features but not all");

  std::vector<Stratum> strata;
  std::int64_t next_id = 0;
  for (const auto& f : features) {
    if (!f.contains("geometry") || f["geometry"].value("type", "") != "Polygon")
      throw std::runtime_error("strata file: every feature must be a Polygon");
    const auto& coords = f["geometry"]["coordinates"];
    if (!coords.is_array() || coords.empty() || !coords[0].is_array())
      throw std::runtime_error("strata file: malformed Polygon coordinates");
    std::vector<GeoPoint> ring;
    for (const auto& pt : coords[0]) {
      if (!pt.is_array() || pt.size() < 2)
        throw std::runtime_error("strata file: malformed coordinate pair");
      ring.emplace_back(pt[1].get<double>(), pt[0].get<double>());
    }
    if (ring.size() >= 2 && ring.front() == ring.back()) ring.pop_back();  // drop closing vertex
    const std::int64_t id = with_id ? f["properties"]["stratum_id"].get<std::int64_t>() : next_id;
    ++next_id;
    strata.push_back(Stratum::polygon(id, std::move(ring)));
  }
  return Stratification::from_polygons(std::move(strata));
}

inline Stratification load_strata_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open strata file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("strata file " + path + ": " + e.what());
  }
  return load_strata_json(doc);
}

inline void save_strata_file(const Stratification& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write strata file: " + path);
  out << strata_to_geojson(s).dump(2) << '\n';
}

}  // namespace driveby
