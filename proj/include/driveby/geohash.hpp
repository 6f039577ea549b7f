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

#include <cstdint>
#include <stdexcept>
#include <string>

#include "driveby/geo.hpp"

namespace driveby {

inline constexpr int kGeohashMaxPrecision = 12;

// Standard geohash base32 alphabet (no a, i, l, o).
inline constexpr char kGeohashAlphabet[33] = "0123456789bcdefghjkmnpqrstuvwxyz";

namespace detail {

inline int geohash_char_value(char c) {
  switch (c) {
    case '0': return 0;  case '1': return 1;  case '2': return 2;  case '3': return 3;
    case '4': return 4;  case '5': return 5;  case '6': return 6;  case '7': return 7;
    case '8': return 8;  case '9': return 9;  case 'b': return 10; case 'c': return 11;
    case 'd': return 12; case 'e': return 13; case 'f': return 14; case 'g': return 15;
    case 'h': return 16; case 'j': return 17; case 'k': return 18; case 'm': return 19;
    case 'n': return 20; case 'p': return 21; case 'q': return 22; case 'r': return 23;
    case 's': return 24; case 't': return 25; case 'u': return 26; case 'v': return 27;
    case 'w': return 28; case 'x': return 29; case 'y': return 30; case 'z': return 31;
    default:  return -1;
  }
}

}  // namespace detail

/// Base32 geohash code. Every character must come from the geohash
/// alphabet; precision() is the character count.
struct Geohash {
  std::string code;

  Geohash() = default;
  explicit Geohash(std::string code_) : code(std::move(code_)) {
    if (code.empty()) throw std::invalid_argument("Geohash: empty code");
    for (char c : code)
      if (detail::geohash_char_value(c) < 0)
        throw std::invalid_argument(std::string("Geohash: invalid character '") + c + "'");
  }

  int precision() const { return static_cast<int>(code.size()); }
};

inline bool operator==(const Geohash& a, const Geohash& b) { return a.code == b.code; }

/// Interleaved geohash bits (longitude bit first), 5 * precision bits,
/// most significant first. Cheap hash-bucket key for the record index.
inline std::uint64_t geohash_encode_bits(const GeoPoint& p, int precision) {
  if (precision < 1 || precision > kGeohashMaxPrecision)
    throw std::invalid_argument("geohash: precision must be in 1..12");
  double lon = p.lon == 180.0 ? -180.0 : p.lon;  // +180 normalizes to -180
  double lat = p.lat;

  double lon_lo = -180.0, lon_hi = 180.0;
  double lat_lo = -90.0, lat_hi = 90.0;
  std::uint64_t bits = 0;
  const int nbits = precision * 5;
  for (int i = 0; i < nbits; ++i) {
    bits <<= 1;
    if (i % 2 == 0) {  // even bit: longitude
      const double mid = (lon_lo + lon_hi) / 2.0;
      if (lon >= mid) {
        bits |= 1;
        lon_lo = mid;
      } else {
        lon_hi = mid;
      }
    } else {  // odd bit: latitude
      const double mid = (lat_lo + lat_hi) / 2.0;
      if (lat >= mid) {
        bits |= 1;
        lat_lo = mid;
      } else {
        lat_hi = mid;
      }
    }
  }
  return bits;
}

/// Geohash of the cell containing p at the given precision (1..12).
inline Geohash geohash_encode(const GeoPoint& p, int precision) {
  const std::uint64_t bits = geohash_encode_bits(p, precision);
  std::string code(static_cast<size_t>(precision), '0');
  for (int i = 0; i < precision; ++i) {
    const unsigned v = static_cast<unsigned>(bits >> (5 * (precision - 1 - i))) & 0x1F;
    code[static_cast<size_t>(i)] = kGeohashAlphabet[v];
  }
  Geohash g;
  g.code = std::move(code);  // characters come from the alphabet by construction
  return g;
}

/// The lon/lat cell a geohash denotes. Any point inside encodes back to
/// the same code at the same precision.
inline BoundingBox geohash_decode(const Geohash& g) {
  if (g.code.empty()) throw std::invalid_argument("geohash: empty code");
  double lon_lo = -180.0, lon_hi = 180.0;
  double lat_lo = -90.0, lat_hi = 90.0;
  int bit = 0;
  for (char c : g.code) {
    const int v = detail::geohash_char_value(c);
    if (v < 0) throw std::invalid_argument("geohash: invalid character");
    for (int j = 4; j >= 0; --j, ++bit) {
      const bool one = (v >> j) & 1;
      if (bit % 2 == 0) {
        const double mid = (lon_lo + lon_hi) / 2.0;
        (one ? lon_lo : lon_hi) = mid;
      } else {
        const double mid = (lat_lo + lat_hi) / 2.0;
        (one ? lat_lo : lat_hi) = mid;
      }
    }
  }
  return BoundingBox(lon_lo, lat_lo, lon_hi, lat_hi);
}

}  // namespace driveby
