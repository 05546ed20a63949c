#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <set>

#include "l2v/geo.hpp"

using namespace l2v;

TEST_CASE("geo point validation and normalization") {
    CHECK_THROWS_AS(make_geo_point(std::nan(""), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_geo_point(0.0, INFINITY), std::invalid_argument);
    CHECK_THROWS_AS(make_geo_point(91.0, 0.0), std::invalid_argument);
    // +180 wraps to -180
    CHECK(make_geo_point(0.0, 180.0).lng == doctest::Approx(-180.0));
    CHECK(make_geo_point(0.0, 540.0).lng == doctest::Approx(-180.0));
    CHECK(make_geo_point(0.0, -190.0).lng == doctest::Approx(170.0));
}

TEST_CASE("order-1 hilbert curve starts along +y") {
    CHECK(hilbert_encode(0, 0, 1) == 0);
    CHECK(hilbert_encode(0, 1, 1) == 1);
    CHECK(hilbert_encode(1, 1, 1) == 2);
    CHECK(hilbert_encode(1, 0, 1) == 3);
}

TEST_CASE("hilbert encode/decode bijection, exhaustive to order 5") {
    for (int order = 1; order <= 5; ++order) {
        const std::uint32_t n = 1u << order;
        std::set<std::uint64_t> seen;
        for (std::uint32_t x = 0; x < n; ++x) {
            for (std::uint32_t y = 0; y < n; ++y) {
                const auto d = hilbert_encode(x, y, order);
                REQUIRE(d < static_cast<std::uint64_t>(n) * n);
                REQUIRE(seen.insert(d).second);
                std::uint32_t rx, ry;
                hilbert_decode(d, order, rx, ry);
                REQUIRE(rx == x);
                REQUIRE(ry == y);
            }
        }
    }
}

TEST_CASE("hilbert bijection, randomized at high orders") {
    std::mt19937_64 rng(42);
    for (int order : {10, 18, 30}) {
        std::uniform_int_distribution<std::uint32_t> coord(0, (1u << order) - 1);
        for (int i = 0; i < 500; ++i) {
            const std::uint32_t x = coord(rng), y = coord(rng);
            std::uint32_t rx, ry;
            hilbert_decode(hilbert_encode(x, y, order), order, rx, ry);
            REQUIRE(rx == x);
            REQUIRE(ry == y);
        }
    }
}

TEST_CASE("curve continuity: consecutive indices are grid-adjacent") {
    for (int order = 1; order <= 5; ++order) {
        const std::uint64_t n2 = 1ull << (2 * order);
        std::uint32_t px, py;
        hilbert_decode(0, order, px, py);
        for (std::uint64_t d = 1; d < n2; ++d) {
            std::uint32_t x, y;
            hilbert_decode(d, order, x, y);
            const auto dist = std::abs(static_cast<int>(x) - static_cast<int>(px)) +
                              std::abs(static_cast<int>(y) - static_cast<int>(py));
            REQUIRE(dist == 1);
            px = x;
            py = y;
        }
    }
}

TEST_CASE("cell_from_point corner and quadrant examples") {
    CHECK(cell_from_point({-90.0, -180.0}, 4) == CellId{4, 0});
    // (0,0) at level 1 falls in grid cell (1,1), hilbert index 2
    CHECK(cell_from_point({0.0, 0.0}, 1) == CellId{1, hilbert_encode(1, 1, 1)});
    CHECK(cell_from_point({0.0, 0.0}, 1).index == 2);
    CHECK_THROWS_AS(cell_from_point({std::nan(""), 0.0}, 4), std::invalid_argument);
    CHECK_THROWS_AS(cell_from_point({0.0, 0.0}, 0), std::invalid_argument);
    CHECK_THROWS_AS(cell_from_point({0.0, 0.0}, 31), std::invalid_argument);
    // lat = +90 clamps to the top row
    CHECK(cell_from_point({90.0, 0.0}, 3) ==
          cell_from_point({89.99, 0.0}, 3));
}

TEST_CASE("cell_center quadrant midpoints at level 1") {
    const auto c00 = cell_center(CellId{1, hilbert_encode(0, 0, 1)});
    CHECK(c00.lat == doctest::Approx(-45.0));
    CHECK(c00.lng == doctest::Approx(-90.0));
    const auto c11 = cell_center(CellId{1, hilbert_encode(1, 1, 1)});
    CHECK(c11.lat == doctest::Approx(45.0));
    CHECK(c11.lng == doctest::Approx(90.0));
}

TEST_CASE("cell_center lies inside the cell") {
    const auto cell = cell_from_point({10.0, 20.0}, 18);
    const auto center = cell_center(cell);
    CHECK(cell_from_point(center, 18) == cell);
}

TEST_CASE("round-trip: center within one cell diagonal of the input point") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> lat(-85.0, 85.0), lng(-180.0, 180.0);
    const int level = 18;
    const double n = static_cast<double>(1u << level);
    for (int i = 0; i < 1000; ++i) {
        const GeoPoint p = make_geo_point(lat(rng), lng(rng));
        const auto center = cell_center(cell_from_point(p, level));
        // diagonal bound in degrees, scaled to meters conservatively
        const double dlat_deg = 180.0 / n, dlng_deg = 360.0 / n;
        const double diag_m = kEarthRadiusM * M_PI / 180.0 *
                              std::sqrt(dlat_deg * dlat_deg + dlng_deg * dlng_deg);
        CHECK(haversine_distance(p, center) <= diag_m);
    }
}

TEST_CASE("points strictly inside one cell map to the same id") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> lat(-85.0, 85.0), lng(-180.0, 179.0);
    const int level = 12;
    const double n = static_cast<double>(1u << level);
    for (int i = 0; i < 200; ++i) {
        const GeoPoint p = make_geo_point(lat(rng), lng(rng));
        // snap to the cell's interior and jitter within it
        const double row = std::floor((p.lat + 90.0) / 180.0 * n);
        const double col = std::floor((p.lng + 180.0) / 360.0 * n);
        std::uniform_real_distribution<double> frac(0.05, 0.95);
        const auto jitter = [&] {
            return make_geo_point(-90.0 + (row + frac(rng)) * 180.0 / n,
                                  -180.0 + (col + frac(rng)) * 360.0 / n);
        };
        CHECK(cell_from_point(jitter(), level) == cell_from_point(jitter(), level));
    }
}

TEST_CASE("haversine examples") {
    CHECK(haversine_distance({0, 0}, {0, 0}) == 0.0);
    CHECK(haversine_distance({0, 0}, {0, 1}) ==
          doctest::Approx(kEarthRadiusM * M_PI / 180.0).epsilon(1e-9));  // ~111195 m
    CHECK(haversine_distance({0, 0}, {0, 1}) == doctest::Approx(111195.0).epsilon(1e-4));
    CHECK(haversine_distance({0, 0}, {0, -180}) ==
          doctest::Approx(M_PI * kEarthRadiusM).epsilon(1e-12));  // antipodal
}

TEST_CASE("haversine symmetry and triangle inequality on random triples") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> lat(-90.0, 90.0), lng(-180.0, 180.0);
    for (int i = 0; i < 500; ++i) {
        const GeoPoint a = make_geo_point(lat(rng), lng(rng));
        const GeoPoint b = make_geo_point(lat(rng), lng(rng));
        const GeoPoint c = make_geo_point(lat(rng), lng(rng));
        const double ab = haversine_distance(a, b);
        const double ba = haversine_distance(b, a);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-6));
        CHECK(ab >= 0.0);
        const double ac = haversine_distance(a, c), cb = haversine_distance(c, b);
        CHECK(ab <= (ac + cb) * (1.0 + 1e-6) + 1e-6);
    }
}

TEST_CASE("cell id text form") {
    const CellId c{18, 123456789};
    CHECK(cell_to_string(c) == "18:123456789");
    CHECK(cell_from_string("18:123456789") == c);
    CHECK_THROWS(cell_from_string("18-123"));
    CHECK_THROWS(cell_from_string("0:5"));
    CHECK_THROWS(cell_from_string("1:4"));  // index >= 4^1
}
