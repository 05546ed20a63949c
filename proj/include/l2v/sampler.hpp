#pragma once

#include <cstdint>
#include <random>
#include <unordered_set>
#include <vector>

namespace l2v {

// Alias-method sampler over the unigram distribution visit_count^power.
// Zero-count ids carry no mass and are never drawn.
class NegativeSampler {
public:
    explicit NegativeSampler(const std::vector<std::uint64_t>& visit_counts,
                             double power = 0.75);

    std::uint32_t sample(std::mt19937_64& rng) const;

    // K draws with replacement, rejecting ids in `exclude`. Falls back to a
    // weighted scan over the allowed ids if rejection keeps missing.
    std::vector<std::uint32_t> sample_excluding(
        std::size_t k, const std::unordered_set<std::uint32_t>& exclude,
        std::mt19937_64& rng) const;

    std::size_t size() const { return prob_.size(); }
    double probability(std::uint32_t id) const { return mass_[id] / total_mass_; }

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
    std::vector<double> mass_;
    double total_mass_ = 0.0;
};

}  // namespace l2v
