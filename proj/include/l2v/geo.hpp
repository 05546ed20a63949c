#pragma once

#include <cstdint>
#include <functional>
#include <string>

namespace l2v {

// Mean earth radius in meters, fixed for reproducibility.
inline constexpr double kEarthRadiusM = 6'371'000.0;

// A WGS84-style coordinate. lat in [-90, 90], lng normalized to [-180, 180).
struct GeoPoint {
    double lat = 0.0;
    double lng = 0.0;
};

// Validates ranges and normalizes lng into [-180, 180). Throws
// std::invalid_argument on non-finite or out-of-range coordinates.
GeoPoint make_geo_point(double lat, double lng);

bool geo_point_valid(const GeoPoint& p);

// A discretized location: Hilbert index of a grid cell on a
// 2^level x 2^level plate-carree lat/lng grid.
struct CellId {
    int level = 0;            // in [1, 30]
    std::uint64_t index = 0;  // in [0, 4^level)

    bool operator==(const CellId&) const = default;
    auto operator<=>(const CellId&) const = default;
};

struct CellIdHash {
    std::size_t operator()(const CellId& c) const noexcept {
        std::uint64_t h = c.index * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(c.level);
        h ^= h >> 32;
        return static_cast<std::size_t>(h);
    }
};

// Hilbert linearization of grid coordinates at the given order.
// (0,0) maps to 0 and the order-1 curve visits (0,0),(0,1),(1,1),(1,0),
// i.e. it starts along the +y axis.
std::uint64_t hilbert_encode(std::uint32_t x, std::uint32_t y, int order);
void hilbert_decode(std::uint64_t index, int order, std::uint32_t& x, std::uint32_t& y);

// Grid binning: row = floor((lat+90)/180 * 2^level), col = floor((lng+180)/360 * 2^level),
// both clamped to the grid. x = col, y = row.
CellId cell_from_point(const GeoPoint& p, int level);

// Midpoint of the cell's lat/lng rectangle.
GeoPoint cell_center(const CellId& c);

// Great-circle distance in meters on a sphere of radius kEarthRadiusM.
double haversine_distance(const GeoPoint& a, const GeoPoint& b);

// Text form "level:index", used by every file format.
std::string cell_to_string(const CellId& c);
CellId cell_from_string(const std::string& s);

}  // namespace l2v
