#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "l2v/eval.hpp"
#include "l2v/graph.hpp"
#include "l2v/synth.hpp"

using namespace l2v;

TEST_CASE("cosine similarity basics") {
    const std::vector<double> e1{1, 0}, e2{0, 1}, d11{1, 1};
    CHECK(cosine_similarity(e1, e1) == doctest::Approx(1.0));
    CHECK(cosine_similarity(e1, e2) == doctest::Approx(0.0));
    CHECK(cosine_similarity(d11, e1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    const std::vector<double> zero{0, 0};
    CHECK_THROWS_AS(cosine_similarity(e1, zero), std::invalid_argument);
    CHECK_THROWS_AS(cosine_similarity(zero, e1), std::invalid_argument);
}

TEST_CASE("cosine rejects dimension mismatch") {
    const std::vector<double> a{1, 0, 0}, b{1, 0};
    CHECK_THROWS_AS(cosine_similarity(a, b), std::invalid_argument);
}

TEST_CASE("top-k on identity basis: deterministic tie-break by id") {
    Matrix emb(4, 4);
    for (std::size_t i = 0; i < 4; ++i) emb.at(i, i) = 1.0;
    const auto top = top_k_neighbors(emb, 1, 2);
    REQUIRE(top.size() == 2);
    CHECK(top[0].first == 0);
    CHECK(top[1].first == 2);
    CHECK(top[0].second == doctest::Approx(0.0));
}

TEST_CASE("duplicate row ranks first with similarity 1") {
    std::mt19937_64 rng(1);
    Matrix emb(6, 3);
    std::uniform_real_distribution<double> v(-1.0, 1.0);
    for (double& x : emb.data) x = v(rng);
    for (std::size_t j = 0; j < 3; ++j) emb.at(4, j) = emb.at(2, j);
    const auto top = top_k_neighbors(emb, 2, 3);
    CHECK(top[0].first == 4);
    CHECK(top[0].second == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("top-k matches the brute-force definition and is scale invariant") {
    std::mt19937_64 rng(2);
    Matrix emb(100, 8);
    std::uniform_real_distribution<double> v(-1.0, 1.0);
    for (double& x : emb.data) x = v(rng);
    const std::uint32_t q = 17;
    const std::size_t k = 10;
    const auto top = top_k_neighbors(emb, q, k);

    // full-scan oracle
    std::vector<std::pair<double, std::uint32_t>> scored;
    for (std::uint32_t i = 0; i < 100; ++i)
        if (i != q) scored.emplace_back(cosine_similarity(emb.row_span(q), emb.row_span(i)), i);
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t r = 0; r < k; ++r) {
        CHECK(top[r].first == scored[r].second);
        CHECK(top[r].second == doctest::Approx(scored[r].first).epsilon(1e-12));
    }

    // positive rescaling leaves rankings unchanged
    Matrix scaled = emb;
    for (double& x : scaled.data) x *= 3.7;
    const auto top2 = top_k_neighbors(scaled, q, k);
    for (std::size_t r = 0; r < k; ++r) CHECK(top[r].first == top2[r].first);

    CHECK_THROWS_AS(top_k_neighbors(emb, 200, 3), std::out_of_range);
    CHECK_THROWS_AS(top_k_neighbors(emb, 0, 100), std::invalid_argument);
}

TEST_CASE("region accuracy is 1.0 under perfect separation") {
    const std::size_t per = 6, regions = 3;
    Matrix emb(per * regions, 4);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> jitter(-0.01, 0.01);
    RegionLabeling labeling;
    for (std::size_t r = 0; r < regions; ++r)
        for (std::size_t i = 0; i < per; ++i) {
            const auto id = static_cast<std::uint32_t>(r * per + i);
            emb.at(id, r) = 1.0;
            emb.at(id, 3) = jitter(rng);
            labeling.add(id, static_cast<std::uint32_t>(r));
        }
    CHECK(region_accuracy_at_k(emb, labeling, 3, 7) == doctest::Approx(1.0));
    // deterministic given a seed
    CHECK(region_accuracy_at_k(emb, labeling, 3, 7) ==
          region_accuracy_at_k(emb, labeling, 3, 7));
}

TEST_CASE("random embeddings give chance-level accuracy (Monte Carlo)") {
    const std::size_t regions = 10, per = 10, n = regions * per, k = 5;
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 1.0);
    double sum = 0.0;
    const int trials = 60;
    for (int trial = 0; trial < trials; ++trial) {
        Matrix emb(n, 8);
        for (double& x : emb.data) x = g(rng);
        RegionLabeling labeling;
        for (std::uint32_t id = 0; id < n; ++id)
            labeling.add(id, id / per);
        sum += region_accuracy_at_k(emb, labeling, k, trial);
    }
    const double mean = sum / trials;
    const double expected = static_cast<double>(per - 1) / (n - 1);
    // binomial-ish std error over regions*trials*k draws, generously bounded
    const double se = std::sqrt(expected * (1 - expected) /
                                static_cast<double>(trials * regions * k));
    CHECK(std::abs(mean - expected) < 3.0 * se + 0.01);
}

TEST_CASE("k larger than every region is an error; skipped regions reported") {
    Matrix emb(6, 2);
    for (std::size_t i = 0; i < 6; ++i) emb.at(i, 0) = 1.0 + i;
    RegionLabeling labeling;
    for (std::uint32_t id = 0; id < 6; ++id) labeling.add(id, id / 3);  // two regions of 3
    CHECK_THROWS(region_accuracy_at_k(emb, labeling, 4, 0));
    std::vector<std::uint32_t> skipped;
    RegionLabeling mixed;
    for (std::uint32_t id = 0; id < 5; ++id) mixed.add(id, 0);
    mixed.add(5, 1);  // singleton region is skipped for k=2
    region_accuracy_at_k(emb, mixed, 2, 0, &skipped);
    REQUIRE(skipped.size() == 1);
    CHECK(skipped[0] == 1);
}

TEST_CASE("synthetic city respects inter-region probability extremes") {
    SyntheticCityConfig cfg;
    cfg.regions = 3;
    cfg.cells_per_region = 9;
    cfg.trajectories = 50;
    cfg.trajectory_length = 8;
    cfg.seed = 11;

    std::unordered_map<CellId, std::uint32_t, CellIdHash> region_of;
    cfg.inter_region_prob = 0.0;
    const auto stay = generate_synthetic_city(cfg);
    for (const auto& [cell, r] : stay.labels) region_of[cell] = r;
    std::unordered_map<std::string, std::uint32_t> seen;
    for (const auto& rec : stay.records) {
        const auto r = region_of.at(cell_from_point(rec.point, cfg.level));
        auto [it, inserted] = seen.emplace(rec.user_id, r);
        CHECK(it->second == r);  // p=0: a walker never leaves its region
    }

    cfg.inter_region_prob = 1.0;
    const auto jump = generate_synthetic_city(cfg);
    region_of.clear();
    for (const auto& [cell, r] : jump.labels) region_of[cell] = r;
    std::size_t inter = 0, pairs = 0;
    std::unordered_map<std::string, std::uint32_t> prev;
    for (const auto& rec : jump.records) {
        const auto r = region_of.at(cell_from_point(rec.point, cfg.level));
        const auto it = prev.find(rec.user_id);
        if (it != prev.end()) {
            ++pairs;
            inter += (it->second != r);
            it->second = r;
        } else {
            prev.emplace(rec.user_id, r);
        }
    }
    CHECK(pairs > 0);
    CHECK(static_cast<double>(inter) / pairs == doctest::Approx(1.0));
}

TEST_CASE("default synthetic city keeps >90% of flow weight inside regions") {
    SyntheticCityConfig cfg;  // defaults: R=4, 25 cells, p=0.05, 2000 x 10
    const auto city = generate_synthetic_city(cfg);
    std::unordered_map<CellId, std::uint32_t, CellIdHash> region_of;
    for (const auto& [cell, r] : city.labels) region_of[cell] = r;
    const auto trajs = sessionize(city.records, 3600, cfg.level);
    std::size_t intra = 0, total = 0;
    for (const auto& t : trajs)
        for (std::size_t i = 1; i < t.size(); ++i) {
            ++total;
            intra += (region_of.at(t.cells[i - 1]) == region_of.at(t.cells[i]));
        }
    CHECK(total > 0);
    CHECK(static_cast<double>(intra) / total > 0.9);
}

TEST_CASE("synthetic city is bit-reproducible under a fixed seed") {
    SyntheticCityConfig cfg;
    cfg.trajectories = 100;
    cfg.seed = 77;
    const auto a = generate_synthetic_city(cfg);
    const auto b = generate_synthetic_city(cfg);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].user_id == b.records[i].user_id);
        CHECK(a.records[i].timestamp == b.records[i].timestamp);
        CHECK(a.records[i].point.lat == b.records[i].point.lat);
        CHECK(a.records[i].point.lng == b.records[i].point.lng);
    }
    CHECK(a.labels == b.labels);
    CHECK_THROWS_AS([] {
        SyntheticCityConfig bad;
        bad.regions = 1;
        return generate_synthetic_city(bad);
    }(), std::invalid_argument);
}
