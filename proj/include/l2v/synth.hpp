#pragma once

#include <cstdint>
#include <vector>

#include "l2v/geo.hpp"
#include "l2v/trajectory.hpp"

namespace l2v {

// Desk-scale mobility simulator: R spatially separated clusters of grid
// cells; walkers mostly move within their current region and jump to a
// different one with probability inter_region_prob per step.
struct SyntheticCityConfig {
    std::size_t regions = 4;
    std::size_t cells_per_region = 25;
    double inter_region_prob = 0.05;
    std::size_t trajectories = 2000;
    std::size_t trajectory_length = 10;  // records per trajectory
    int level = 18;
    std::uint64_t seed = 7;

    void validate() const;
};

struct SyntheticCity {
    std::vector<LbsRecord> records;
    std::vector<std::pair<CellId, std::uint32_t>> labels;  // cell -> region id
};

SyntheticCity generate_synthetic_city(const SyntheticCityConfig& cfg);

}  // namespace l2v
