#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "l2v/kernels.hpp"

namespace l2v {

double cosine_similarity(std::span<const double> u, std::span<const double> v);

// Exact top-k by cosine, query row excluded, ties broken by ascending id.
std::vector<std::pair<std::uint32_t, double>> top_k_neighbors(
    const Matrix& embeddings, std::uint32_t query, std::size_t k);

struct RegionLabeling {
    std::unordered_map<std::uint32_t, std::uint32_t> region_of;        // location id -> region
    std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> members;  // region -> ids

    void add(std::uint32_t location, std::uint32_t region) {
        region_of[location] = region;
        members[region].push_back(location);
    }
};

// One seeded sample location per region; the fraction of its top-k cosine
// neighbors sharing its region, averaged over eligible regions (those with
// more than k members). Skipped regions are appended to `skipped`.
double region_accuracy_at_k(const Matrix& embeddings, const RegionLabeling& regions,
                            std::size_t k, std::uint64_t seed,
                            std::vector<std::uint32_t>* skipped = nullptr);

}  // namespace l2v
