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
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "driveby/geo.hpp"
#include "driveby/geohash.hpp"
#include "driveby/stratification.hpp"

namespace driveby {

/// One GPS ping.
struct MobilityRecord {
  std::int64_t vehicle_id = 0;
  std::int64_t timestamp = 0;  // unix seconds
  GeoPoint location;

  MobilityRecord() = default;
  MobilityRecord(std::int64_t vehicle, std::int64_t ts, GeoPoint loc)
      : vehicle_id(vehicle), timestamp(ts), location(loc) {
    if (vehicle_id < 0) throw std::invalid_argument("MobilityRecord: vehicle_id must be >= 0");
    if (timestamp < 0) throw std::invalid_argument("MobilityRecord: timestamp must be >= 0");
  }
};

/// A record after ingestion: stratum (when inside the stratification) and
/// time interval attached.
struct IndexedRecord {
  std::int64_t vehicle_id = 0;
  std::int64_t timestamp = 0;
  GeoPoint location;
  std::optional<std::int64_t> stratum_id;
  std::int64_t interval_id = 0;
};

/// A fixed reference-grade station reporting on a regular period.
struct ReferenceMonitor {
  std::int64_t monitor_id = 0;
  GeoPoint location;
  std::int64_t reporting_period_s = 900;

  ReferenceMonitor() = default;
  ReferenceMonitor(std::int64_t id, GeoPoint loc, std::int64_t period_s)
      : monitor_id(id), location(loc), reporting_period_s(period_s) {
    if (reporting_period_s <= 0)
      throw std::invalid_argument("ReferenceMonitor: reporting period must be > 0");
  }
};

struct StoreConfig {
  std::int64_t temporal_granularity_s = 7200;
  std::int64_t epoch = 0;
  int index_geohash_precision = 6;
  double colocation_spatial_radius_m = 50.0;
  std::int64_t colocation_temporal_radius_s = 300;

  void validate() const {
    if (temporal_granularity_s <= 0)
      throw std::invalid_argument("StoreConfig: temporal granularity must be > 0");
    if (index_geohash_precision < 1 || index_geohash_precision > kGeohashMaxPrecision)
      throw std::invalid_argument("StoreConfig: geohash precision must be in 1..12");
    if (colocation_spatial_radius_m <= 0.0 || colocation_temporal_radius_s <= 0)
      throw std::invalid_argument("StoreConfig: colocation radii must be > 0");
  }
};

namespace detail {

struct BucketKey {
  std::uint64_t cell;      // geohash bits at index precision
  std::int64_t interval;
  bool operator==(const BucketKey& o) const { return cell == o.cell && interval == o.interval; }
};

struct BucketKeyHash {
  size_t operator()(const BucketKey& k) const {
    std::uint64_t h = k.cell * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(k.interval) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    return static_cast<size_t>(h);
  }
};

}  // namespace detail

/// In-process spatio-temporal record store. Ingestion assigns stratum and
/// interval ids and buckets records by (geohash cell, interval); queries
/// expand to enough neighboring cells and intervals that exact filtering
/// never misses a match. Immutable after ingest; queries are const.
/// Holds a reference to the stratification, which must outlive the store.
class MobilityStore {
 public:
  MobilityStore(std::vector<MobilityRecord> records, const Stratification& strat, StoreConfig cfg)
      : cfg_(cfg), strat_(&strat) {
    cfg_.validate();
    records_.reserve(records.size());
    for (const auto& r : records) {
      IndexedRecord ir;
      ir.vehicle_id = r.vehicle_id;
      ir.timestamp = r.timestamp;
      ir.location = r.location;
      ir.stratum_id = strat.assign(r.location);
      ir.interval_id = interval_of(r.timestamp);
      records_.push_back(ir);
    }
    // Bucket + per-vehicle indexes. Sort order makes results and iteration
    // independent of input order.
    std::vector<std::uint32_t> order(records_.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [this](std::uint32_t a, std::uint32_t b) {
      const auto& ra = records_[a];
      const auto& rb = records_[b];
      if (ra.timestamp != rb.timestamp) return ra.timestamp < rb.timestamp;
      if (ra.vehicle_id != rb.vehicle_id) return ra.vehicle_id < rb.vehicle_id;
      if (ra.location.lat != rb.location.lat) return ra.location.lat < rb.location.lat;
      return ra.location.lon < rb.location.lon;
    });
    std::vector<IndexedRecord> sorted;
    sorted.reserve(records_.size());
    for (const std::uint32_t i : order) sorted.push_back(records_[i]);
    records_ = std::move(sorted);

    for (std::uint32_t i = 0; i < records_.size(); ++i) {
      const auto& r = records_[i];
      buckets_[detail::BucketKey{geohash_encode_bits(r.location, cfg_.index_geohash_precision),
                                 r.interval_id}]
          .push_back(i);
      by_vehicle_[r.vehicle_id].push_back(i);  // timestamp-sorted since records_ is
    }
  }

  std::int64_t interval_of(std::int64_t timestamp) const {
    // floor division for timestamps before the epoch
    const std::int64_t d = timestamp - cfg_.epoch;
    const std::int64_t g = cfg_.temporal_granularity_s;
    return d >= 0 ? d / g : -((-d + g - 1) / g);
  }

  const std::vector<IndexedRecord>& records() const { return records_; }
  const StoreConfig& config() const { return cfg_; }
  const Stratification& stratification() const { return *strat_; }

  std::vector<std::int64_t> vehicle_ids() const {
    std::vector<std::int64_t> ids;
    ids.reserve(by_vehicle_.size());
    for (const auto& [v, _] : by_vehicle_) ids.push_back(v);
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  std::int64_t record_count(std::int64_t vehicle_id) const {
    const auto it = by_vehicle_.find(vehicle_id);
    return it == by_vehicle_.end() ? 0 : static_cast<std::int64_t>(it->second.size());
  }

  /// All records within the configured spatial radius of `center` and
  /// temporal radius of `time`, ordered by (timestamp, vehicle_id).
  /// Identical to a full linear scan.
  std::vector<IndexedRecord> find_colocations(const GeoPoint& center, std::int64_t time) const {
    std::vector<IndexedRecord> out;
    for_candidates(center, time, [&](const IndexedRecord& r) {
      if (matches(r, center, time)) out.push_back(r);
    });
    std::sort(out.begin(), out.end(), [](const IndexedRecord& a, const IndexedRecord& b) {
      if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
      return a.vehicle_id < b.vehicle_id;
    });
    return out;
  }

  /// Colocation count of one vehicle with reference-grade monitors: a
  /// record matches a monitor when it lies within the spatial radius and
  /// within the temporal radius of the monitor's nearest report instant
  /// (epoch + k * period, k >= 0). One count per (record, monitor).
  std::int64_t count_reference_colocations(std::int64_t vehicle_id,
                                           const std::vector<ReferenceMonitor>& monitors) const {
    const auto it = by_vehicle_.find(vehicle_id);
    if (it == by_vehicle_.end()) return 0;
    std::int64_t count = 0;
    for (const std::uint32_t idx : it->second) {
      const auto& r = records_[idx];
      for (const auto& mon : monitors) {
        if (haversine_distance(r.location, mon.location) > cfg_.colocation_spatial_radius_m)
          continue;
        const double pos = static_cast<double>(r.timestamp - cfg_.epoch) /
                           static_cast<double>(mon.reporting_period_s);
        std::int64_t k = std::llround(pos);
        if (k < 0) k = 0;
        const std::int64_t instant = cfg_.epoch + k * mon.reporting_period_s;
        if (std::llabs(r.timestamp - instant) <= cfg_.colocation_temporal_radius_s) ++count;
      }
    }
    return count;
  }

  /// Number of record pairs of two distinct vehicles within the spatial
  /// and temporal radii. Symmetric.
  std::int64_t count_pairwise_colocations(std::int64_t vehicle_a, std::int64_t vehicle_b) const {
    if (vehicle_a == vehicle_b)
      throw std::invalid_argument("count_pairwise_colocations: vehicles must differ");
    const auto ia = by_vehicle_.find(vehicle_a);
    const auto ib = by_vehicle_.find(vehicle_b);
    if (ia == by_vehicle_.end() || ib == by_vehicle_.end()) return 0;
    // Iterate the smaller trajectory, window-scan the other by time.
    const auto* small = &ia->second;
    const auto* large = &ib->second;
    if (small->size() > large->size()) std::swap(small, large);
    std::int64_t count = 0;
    for (const std::uint32_t idx : *small) {
      const auto& r = records_[idx];
      const std::int64_t lo_ts = r.timestamp - cfg_.colocation_temporal_radius_s;
      const std::int64_t hi_ts = r.timestamp + cfg_.colocation_temporal_radius_s;
      auto lo = std::lower_bound(large->begin(), large->end(), lo_ts,
                                 [this](std::uint32_t i, std::int64_t ts) {
                                   return records_[i].timestamp < ts;
                                 });
      for (auto itr = lo; itr != large->end() && records_[*itr].timestamp <= hi_ts; ++itr) {
        if (haversine_distance(r.location, records_[*itr].location) <=
            cfg_.colocation_spatial_radius_m)
          ++count;
      }
    }
    return count;
  }

 private:
  bool matches(const IndexedRecord& r, const GeoPoint& center, std::int64_t time) const {
    return std::llabs(r.timestamp - time) <= cfg_.colocation_temporal_radius_s &&
           haversine_distance(r.location, center) <= cfg_.colocation_spatial_radius_m;
  }

  // Visit every record in the buckets that could contain a match: the
  // center's geohash cell padded by enough ring cells to cover the spatial
  // radius, across enough intervals to cover the temporal radius. Falls
  // back to a scan when the radius spans too many cells (tiny cells or
  // near-polar latitudes).
  template <typename Fn>
  void for_candidates(const GeoPoint& center, std::int64_t time, Fn&& fn) const {
    const int prec = cfg_.index_geohash_precision;
    const BoundingBox cell = geohash_decode(geohash_encode(center, prec));
    const double cell_w_deg = cell.max_lon - cell.min_lon;
    const double cell_h_deg = cell.max_lat - cell.min_lat;
    const double cos_lat = std::max(std::cos(deg2rad(center.lat)), 0.01);
    const double cell_w_m = cell_w_deg * kMetersPerDegree * cos_lat;
    const double cell_h_m = cell_h_deg * kMetersPerDegree;
    const std::int64_t nx =
        static_cast<std::int64_t>(std::ceil(cfg_.colocation_spatial_radius_m / cell_w_m));
    const std::int64_t ny =
        static_cast<std::int64_t>(std::ceil(cfg_.colocation_spatial_radius_m / cell_h_m));
    if (nx > 16 || ny > 16) {
      for (const auto& r : records_) fn(r);
      return;
    }
    const std::int64_t kt =
        (cfg_.colocation_temporal_radius_s + cfg_.temporal_granularity_s - 1) /
        cfg_.temporal_granularity_s;
    const std::int64_t t0 = interval_of(time);

    std::unordered_set<std::uint64_t> seen;
    const double clat = cell.center_lat();
    const double clon = cell.center_lon();
    for (std::int64_t dy = -ny; dy <= ny; ++dy) {
      const double lat = clat + static_cast<double>(dy) * cell_h_deg;
      if (lat < -90.0 || lat > 90.0) continue;
      for (std::int64_t dx = -nx; dx <= nx; ++dx) {
        double lon = clon + static_cast<double>(dx) * cell_w_deg;
        while (lon < -180.0) lon += 360.0;
        while (lon >= 180.0) lon -= 360.0;
        const std::uint64_t bits = geohash_encode_bits(GeoPoint(lat, lon), prec);
        if (!seen.insert(bits).second) continue;
        for (std::int64_t t = t0 - kt; t <= t0 + kt; ++t) {
          const auto it = buckets_.find(detail::BucketKey{bits, t});
          if (it == buckets_.end()) continue;
          for (const std::uint32_t idx : it->second) fn(records_[idx]);
        }
      }
    }
  }

  StoreConfig cfg_;
  const Stratification* strat_;
  std::vector<IndexedRecord> records_;
  std::unordered_map<detail::BucketKey, std::vector<std::uint32_t>, detail::BucketKeyHash> buckets_;
  std::unordered_map<std::int64_t, std::vector<std::uint32_t>> by_vehicle_;
};

inline MobilityStore ingest(std::vector<MobilityRecord> records, const Stratification& strat,
                            const StoreConfig& cfg) {
  return MobilityStore(std::move(records), strat, cfg);
}

// ---------------------------------------------------------------------------
// CSV files
// ---------------------------------------------------------------------------

struct RecordsLoadResult {
  std::vector<MobilityRecord> records;
  std::int64_t malformed = 0;  // counted, never silently dropped
};

namespace detail {

inline bool parse_i64(const std::string& s, std::int64_t& out) {
  try {
    size_t pos = 0;
    out = std::stoll(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

inline bool parse_f64(const std::string& s, double& out) {
  try {
    size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) fields.push_back(cur);
  return fields;
}

}  // namespace detail

inline constexpr const char* kRecordsCsvHeader = "vehicle_id,timestamp,lat,lon";
inline constexpr const char* kMonitorsCsvHeader = "monitor_id,lat,lon,period_s";

/// Read a records CSV (`vehicle_id,timestamp,lat,lon`). Lines that fail to
/// parse or violate field ranges are counted as malformed.
inline RecordsLoadResult read_records_csv(std::istream& in) {
  RecordsLoadResult result;
  std::string line;
  if (!std::getline(in, line)) return result;  // empty file: zero records
  if (line.size() && line.back() == '\r') line.pop_back();
  if (line != kRecordsCsvHeader)
    throw std::runtime_error(std::string("records CSV: expected header '") + kRecordsCsvHeader +
                             "'");
  while (std::getline(in, line)) {
    if (line.size() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    std::int64_t vehicle = 0, ts = 0;
    double lat = 0.0, lon = 0.0;
    if (fields.size() != 4 || !detail::parse_i64(fields[0], vehicle) ||
        !detail::parse_i64(fields[1], ts) || !detail::parse_f64(fields[2], lat) ||
        !detail::parse_f64(fields[3], lon)) {
      ++result.malformed;
      continue;
    }
    try {
      result.records.emplace_back(vehicle, ts, GeoPoint(lat, lon));
    } catch (const std::invalid_argument&) {
      ++result.malformed;
    }
  }
  return result;
}

inline RecordsLoadResult read_records_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open records file: " + path);
  return read_records_csv(in);
}

inline void write_records_csv(const std::vector<MobilityRecord>& records, std::ostream& out) {
  out << kRecordsCsvHeader << '\n';
  char buf[128];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%lld,%lld,%.7f,%.7f", static_cast<long long>(r.vehicle_id),
                  static_cast<long long>(r.timestamp), r.location.lat, r.location.lon);
    out << buf << '\n';
  }
}

inline void write_records_file(const std::vector<MobilityRecord>& records,
                               const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write records file: " + path);
  write_records_csv(records, out);
}

/// Read a monitors CSV (`monitor_id,lat,lon,period_s`). Malformed lines
/// are an error here: monitor lists are small, hand-maintained files.
inline std::vector<ReferenceMonitor> read_monitors_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open monitors file: " + path);
  std::vector<ReferenceMonitor> monitors;
  std::string line;
  if (!std::getline(in, line)) return monitors;
  if (line.size() && line.back() == '\r') line.pop_back();
  if (line != kMonitorsCsvHeader)
    throw std::runtime_error(std::string("monitors CSV: expected header '") + kMonitorsCsvHeader +
                             "'");
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.size() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    std::int64_t id = 0, period = 0;
    double lat = 0.0, lon = 0.0;
    if (fields.size() != 4 || !detail::parse_i64(fields[0], id) ||
        !detail::parse_f64(fields[1], lat) || !detail::parse_f64(fields[2], lon) ||
        !detail::parse_i64(fields[3], period))
      throw std::runtime_error("monitors CSV: malformed line " + std::to_string(lineno));
    monitors.emplace_back(id, GeoPoint(lat, lon), period);
  }
  return monitors;
}

}  // namespace driveby
