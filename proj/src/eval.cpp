#include "l2v/eval.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace l2v {

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size())
        throw std::invalid_argument("cosine: dimension mismatch");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0)
        throw std::invalid_argument("cosine similarity undefined for a zero vector");
    return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

std::vector<std::pair<std::uint32_t, double>> top_k_neighbors(
    const Matrix& embeddings, std::uint32_t query, std::size_t k) {
    const std::size_t n = embeddings.rows;
    if (query >= n) throw std::out_of_range("top_k_neighbors: query out of range");
    if (k >= n) throw std::invalid_argument("top_k_neighbors: k must be < N");
    const auto q = embeddings.row_span(query);

    std::vector<std::pair<std::uint32_t, double>> scored;
    scored.reserve(n - 1);
    for (std::uint32_t i = 0; i < n; ++i) {
        if (i == query) continue;
        scored.emplace_back(i, cosine_similarity(q, embeddings.row_span(i)));
    }
    auto better = [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;  // deterministic tie-break
    };
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k),
                      scored.end(), better);
    scored.resize(k);
    return scored;
}

double region_accuracy_at_k(const Matrix& embeddings, const RegionLabeling& regions,
                            std::size_t k, std::uint64_t seed,
                            std::vector<std::uint32_t>* skipped) {
    std::vector<std::uint32_t> region_ids;
    region_ids.reserve(regions.members.size());
    for (const auto& [rid, members] : regions.members) {
        if (members.empty()) throw std::invalid_argument("empty region " + std::to_string(rid));
        region_ids.push_back(rid);
    }
    std::sort(region_ids.begin(), region_ids.end());

    std::mt19937_64 rng(seed);
    double acc_sum = 0.0;
    std::size_t eligible = 0;
    for (std::uint32_t rid : region_ids) {
        const auto& members = regions.members.at(rid);
        if (members.size() <= k) {
            if (skipped) skipped->push_back(rid);
            continue;
        }
        std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
        const std::uint32_t center = members[pick(rng)];
        const auto neighbors = top_k_neighbors(embeddings, center, k);
        std::size_t same = 0;
        for (const auto& [id, sim] : neighbors) {
            const auto it = regions.region_of.find(id);
            if (it != regions.region_of.end() && it->second == rid) ++same;
        }
        acc_sum += static_cast<double>(same) / static_cast<double>(k);
        ++eligible;
    }
    if (eligible == 0)
        throw std::runtime_error("region_accuracy_at_k: no region has more than k members");
    return acc_sum / static_cast<double>(eligible);
}

}  // namespace l2v
