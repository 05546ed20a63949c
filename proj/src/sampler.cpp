#include "l2v/sampler.hpp"

#include <cmath>
#include <stdexcept>

namespace l2v {

NegativeSampler::NegativeSampler(const std::vector<std::uint64_t>& visit_counts,
                                 double power) {
    const std::size_t n = visit_counts.size();
    if (n == 0) throw std::invalid_argument("sampler over empty vocabulary");
    mass_.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        mass_[i] = visit_counts[i] > 0 ? std::pow(static_cast<double>(visit_counts[i]), power)
                                       : 0.0;
    for (double m : mass_) total_mass_ += m;
    if (total_mass_ <= 0.0) throw std::invalid_argument("sampler with zero total mass");

    // Vose alias table construction.
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i) scaled[i] = mass_[i] * n / total_mass_;
    std::vector<std::uint32_t> small, large;
    for (std::uint32_t i = 0; i < n; ++i)
        (scaled[i] < 1.0 ? small : large).push_back(i);
    while (!small.empty() && !large.empty()) {
        const std::uint32_t s = small.back();
        small.pop_back();
        const std::uint32_t l = large.back();
        prob_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] -= (1.0 - scaled[s]);
        if (scaled[l] < 1.0) {
            large.pop_back();
            small.push_back(l);
        }
    }
    for (std::uint32_t i : large) prob_[i] = 1.0;
    for (std::uint32_t i : small) prob_[i] = 1.0;
}

std::uint32_t NegativeSampler::sample(std::mt19937_64& rng) const {
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(prob_.size() - 1));
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    const std::uint32_t i = pick(rng);
    return coin(rng) < prob_[i] ? i : alias_[i];
}

std::vector<std::uint32_t> NegativeSampler::sample_excluding(
    std::size_t k, const std::unordered_set<std::uint32_t>& exclude,
    std::mt19937_64& rng) const {
    if (k == 0) throw std::invalid_argument("k must be >= 1");
    double allowed_mass = total_mass_;
    std::size_t allowed = prob_.size() - exclude.size();
    for (std::uint32_t e : exclude)
        if (e < mass_.size()) allowed_mass -= mass_[e];
    if (allowed == 0 || allowed_mass <= 0.0)
        throw std::runtime_error("negative sampling: exclusion leaves no candidate");

    std::vector<std::uint32_t> out;
    out.reserve(k);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    while (out.size() < k) {
        bool found = false;
        for (int attempt = 0; attempt < 64; ++attempt) {
            const std::uint32_t id = sample(rng);
            if (!exclude.count(id)) {
                out.push_back(id);
                found = true;
                break;
            }
        }
        if (!found) {
            // weighted scan over the allowed mass
            double target = coin(rng) * allowed_mass;
            std::uint32_t chosen = 0;
            bool got = false;
            for (std::uint32_t i = 0; i < mass_.size(); ++i) {
                if (exclude.count(i) || mass_[i] <= 0.0) continue;
                chosen = i;
                got = true;
                target -= mass_[i];
                if (target <= 0.0) break;
            }
            if (!got) throw std::runtime_error("negative sampling: no candidate with mass");
            out.push_back(chosen);
        }
    }
    return out;
}

}  // namespace l2v
