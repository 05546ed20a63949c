#include "l2v/geo.hpp"

#include <cmath>
#include <stdexcept>

namespace l2v {

GeoPoint make_geo_point(double lat, double lng) {
    if (!std::isfinite(lat) || !std::isfinite(lng))
        throw std::invalid_argument("non-finite coordinate");
    if (lat < -90.0 || lat > 90.0)
        throw std::invalid_argument("latitude out of range: " + std::to_string(lat));
    // Wrap lng into [-180, 180). +180 maps to -180.
    lng = std::fmod(lng + 180.0, 360.0);
    if (lng < 0.0) lng += 360.0;
    lng -= 180.0;
    return GeoPoint{lat, lng};
}

bool geo_point_valid(const GeoPoint& p) {
    return std::isfinite(p.lat) && std::isfinite(p.lng) &&
           p.lat >= -90.0 && p.lat <= 90.0 && p.lng >= -180.0 && p.lng < 180.0;
}

std::uint64_t hilbert_encode(std::uint32_t x, std::uint32_t y, int order) {
    if (order < 1 || order > 30) throw std::invalid_argument("hilbert order out of [1,30]");
    const std::uint32_t n = 1u << order;
    if (x >= n || y >= n) throw std::invalid_argument("grid coordinate out of range");
    std::uint64_t d = 0;
    for (std::uint32_t s = n / 2; s > 0; s /= 2) {
        const std::uint32_t rx = (x & s) ? 1 : 0;
        const std::uint32_t ry = (y & s) ? 1 : 0;
        d += static_cast<std::uint64_t>(s) * s * ((3 * rx) ^ ry);
        // rotate quadrant
        if (ry == 0) {
            if (rx == 1) {
                x = s - 1 - x;
                y = s - 1 - y;
            }
            std::swap(x, y);
        }
    }
    return d;
}

void hilbert_decode(std::uint64_t index, int order, std::uint32_t& x, std::uint32_t& y) {
    if (order < 1 || order > 30) throw std::invalid_argument("hilbert order out of [1,30]");
    const std::uint64_t n = 1ull << order;
    if (index >= n * n) throw std::invalid_argument("hilbert index out of range");
    std::uint64_t t = index;
    std::uint64_t rx, ry, cx = 0, cy = 0;
    for (std::uint64_t s = 1; s < n; s *= 2) {
        rx = 1 & (t / 2);
        ry = 1 & (t ^ rx);
        if (ry == 0) {
            if (rx == 1) {
                cx = s - 1 - cx;
                cy = s - 1 - cy;
            }
            std::swap(cx, cy);
        }
        cx += s * rx;
        cy += s * ry;
        t /= 4;
    }
    x = static_cast<std::uint32_t>(cx);
    y = static_cast<std::uint32_t>(cy);
}

CellId cell_from_point(const GeoPoint& p, int level) {
    if (!geo_point_valid(p)) throw std::invalid_argument("invalid GeoPoint");
    if (level < 1 || level > 30) throw std::invalid_argument("level out of [1,30]");
    const double n = static_cast<double>(1u << level);
    auto bin = [&](double v, double lo, double span) {
        double f = std::floor((v - lo) / span * n);
        if (f < 0.0) f = 0.0;
        if (f > n - 1.0) f = n - 1.0;  // lat = +90 clamps to the top row
        return static_cast<std::uint32_t>(f);
    };
    const std::uint32_t row = bin(p.lat, -90.0, 180.0);
    const std::uint32_t col = bin(p.lng, -180.0, 360.0);
    return CellId{level, hilbert_encode(col, row, level)};
}

GeoPoint cell_center(const CellId& c) {
    if (c.level < 1 || c.level > 30) throw std::invalid_argument("invalid CellId level");
    const std::uint64_t n = 1ull << c.level;
    if (c.index >= n * n) throw std::invalid_argument("invalid CellId index");
    std::uint32_t col, row;
    hilbert_decode(c.index, c.level, col, row);
    const double dn = static_cast<double>(n);
    return GeoPoint{-90.0 + (row + 0.5) * 180.0 / dn, -180.0 + (col + 0.5) * 360.0 / dn};
}

double haversine_distance(const GeoPoint& a, const GeoPoint& b) {
    if (!geo_point_valid(a) || !geo_point_valid(b))
        throw std::invalid_argument("invalid GeoPoint");
    constexpr double deg = M_PI / 180.0;
    const double dlat = (b.lat - a.lat) * deg;
    const double dlng = (b.lng - a.lng) * deg;
    const double sl = std::sin(dlat / 2), sg = std::sin(dlng / 2);
    const double h = sl * sl + std::cos(a.lat * deg) * std::cos(b.lat * deg) * sg * sg;
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

std::string cell_to_string(const CellId& c) {
    return std::to_string(c.level) + ":" + std::to_string(c.index);
}

CellId cell_from_string(const std::string& s) {
    const auto pos = s.find(':');
    if (pos == std::string::npos) throw std::invalid_argument("bad cell id: " + s);
    std::size_t used = 0;
    const int level = std::stoi(s.substr(0, pos), &used);
    if (used != pos) throw std::invalid_argument("bad cell id: " + s);
    const std::uint64_t index = std::stoull(s.substr(pos + 1), &used);
    if (used != s.size() - pos - 1) throw std::invalid_argument("bad cell id: " + s);
    if (level < 1 || level > 30) throw std::invalid_argument("bad cell level: " + s);
    if (index >= (1ull << (2 * level))) throw std::invalid_argument("cell index out of range: " + s);
    return CellId{level, index};
}

}  // namespace l2v
