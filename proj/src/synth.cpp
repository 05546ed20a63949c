#include "l2v/synth.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace l2v {

void SyntheticCityConfig::validate() const {
    if (regions < 2) throw std::invalid_argument("need at least 2 regions");
    if (cells_per_region < 2) throw std::invalid_argument("need at least 2 cells per region");
    if (inter_region_prob < 0.0 || inter_region_prob > 1.0)
        throw std::invalid_argument("inter_region_prob must be in [0,1]");
    if (trajectories < 1 || trajectory_length < 1)
        throw std::invalid_argument("need at least one trajectory of length >= 1");
    if (level < 1 || level > 30) throw std::invalid_argument("level out of [1,30]");
}

SyntheticCity generate_synthetic_city(const SyntheticCityConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);

    // Region anchors on a coarse grid, 64 cells apart per axis so clusters
    // stay kilometers from each other at level 18.
    const GeoPoint base = make_geo_point(23.10, 113.30);
    const auto base_cell = cell_from_point(base, cfg.level);
    std::uint32_t x0, y0;
    hilbert_decode(base_cell.index, cfg.level, x0, y0);

    const auto side = static_cast<std::uint32_t>(
        std::ceil(std::sqrt(static_cast<double>(cfg.cells_per_region))));
    const std::uint32_t stride = 64 + side;
    const auto anchor_cols = static_cast<std::uint32_t>(
        std::ceil(std::sqrt(static_cast<double>(cfg.regions))));

    SyntheticCity city;
    std::vector<std::vector<CellId>> region_cells(cfg.regions);
    for (std::uint32_t r = 0; r < cfg.regions; ++r) {
        const std::uint32_t rx = x0 + (r % anchor_cols) * stride;
        const std::uint32_t ry = y0 + (r / anchor_cols) * stride;
        for (std::uint32_t c = 0; c < cfg.cells_per_region; ++c) {
            const CellId cell{cfg.level,
                              hilbert_encode(rx + c % side, ry + c / side, cfg.level)};
            region_cells[r].push_back(cell);
            city.labels.emplace_back(cell, r);
        }
    }

    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick_region(0, cfg.regions - 1);
    std::uniform_int_distribution<std::size_t> pick_cell(0, cfg.cells_per_region - 1);

    for (std::size_t t = 0; t < cfg.trajectories; ++t) {
        std::size_t region = pick_region(rng);
        std::size_t cell = pick_cell(rng);
        std::int64_t ts = 1'600'000'000 + static_cast<std::int64_t>(t) * 100'000;
        const std::string user = "u" + std::to_string(t);
        for (std::size_t step = 0; step < cfg.trajectory_length; ++step) {
            city.records.push_back(
                LbsRecord{user, ts, cell_center(region_cells[region][cell])});
            ts += 60;
            if (coin(rng) < cfg.inter_region_prob) {
                std::size_t next = pick_region(rng);
                while (cfg.regions > 1 && next == region) next = pick_region(rng);
                region = next;
                cell = pick_cell(rng);
            } else {
                std::size_t next = pick_cell(rng);
                while (cfg.cells_per_region > 1 && next == cell) next = pick_cell(rng);
                cell = next;
            }
        }
    }
    return city;
}

}  // namespace l2v
