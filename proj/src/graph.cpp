#include "l2v/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace l2v {

namespace {

struct Edge {
    std::uint32_t a, b;  // a < b
    double w;
};

WeightedGraph csr_from_undirected(std::size_t n, std::vector<Edge> edges,
                                  WeightedGraph::Kind kind) {
    WeightedGraph g;
    g.n = n;
    g.kind = kind;
    std::vector<std::size_t> deg(n, 0);
    for (const auto& e : edges) {
        ++deg[e.a];
        ++deg[e.b];
    }
    g.row_ptr.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) g.row_ptr[i + 1] = g.row_ptr[i] + deg[i];
    g.col.resize(g.row_ptr[n]);
    g.weight.resize(g.row_ptr[n]);
    std::vector<std::size_t> cursor(g.row_ptr.begin(), g.row_ptr.end() - 1);
    for (const auto& e : edges) {
        g.col[cursor[e.a]] = e.b;
        g.weight[cursor[e.a]++] = e.w;
        g.col[cursor[e.b]] = e.a;
        g.weight[cursor[e.b]++] = e.w;
    }
    // sort each row by column id
    for (std::size_t i = 0; i < n; ++i) {
        const auto lo = g.row_ptr[i], hi = g.row_ptr[i + 1];
        std::vector<std::pair<std::uint32_t, double>> row;
        row.reserve(hi - lo);
        for (std::size_t k = lo; k < hi; ++k) row.emplace_back(g.col[k], g.weight[k]);
        std::sort(row.begin(), row.end());
        for (std::size_t k = lo; k < hi; ++k) {
            g.col[k] = row[k - lo].first;
            g.weight[k] = row[k - lo].second;
        }
    }
    return g;
}

}  // namespace

WeightedGraph graph_from_edges(std::size_t n,
                               const std::vector<std::uint32_t>& src,
                               const std::vector<std::uint32_t>& dst,
                               const std::vector<double>& w,
                               WeightedGraph::Kind kind) {
    if (src.size() != dst.size() || src.size() != w.size())
        throw std::invalid_argument("edge array length mismatch");
    std::unordered_map<std::uint64_t, double> acc;
    acc.reserve(src.size());
    for (std::size_t k = 0; k < src.size(); ++k) {
        std::uint32_t a = src[k], b = dst[k];
        if (a == b) throw std::invalid_argument("self-loop edge rejected");
        if (a >= n || b >= n) throw std::invalid_argument("edge endpoint out of range");
        if (a > b) std::swap(a, b);
        acc[(static_cast<std::uint64_t>(a) << 32) | b] += w[k];
    }
    std::vector<Edge> edges;
    edges.reserve(acc.size());
    for (const auto& [key, weight] : acc)
        edges.push_back({static_cast<std::uint32_t>(key >> 32),
                         static_cast<std::uint32_t>(key & 0xFFFFFFFFu), weight});
    return csr_from_undirected(n, std::move(edges), kind);
}

WeightedGraph build_flow_graph(const std::vector<std::vector<std::uint32_t>>& trajectories,
                               const LocationIndex& index, double min_count) {
    const std::size_t n = index.size();
    std::unordered_map<std::uint64_t, double> acc;
    for (const auto& traj : trajectories) {
        for (std::size_t t = 0; t + 1 < traj.size(); ++t) {
            std::uint32_t a = traj[t], b = traj[t + 1];
            if (a >= n || b >= n)
                throw std::out_of_range("trajectory id " + std::to_string(std::max(a, b)) +
                                        " not in index");
            if (a == b) continue;  // collapsed upstream; tolerate anyway
            if (a > b) std::swap(a, b);
            acc[(static_cast<std::uint64_t>(a) << 32) | b] += 1.0;
        }
    }
    std::vector<Edge> edges;
    edges.reserve(acc.size());
    for (const auto& [key, weight] : acc)
        if (weight >= min_count)
            edges.push_back({static_cast<std::uint32_t>(key >> 32),
                             static_cast<std::uint32_t>(key & 0xFFFFFFFFu), weight});
    return csr_from_undirected(n, std::move(edges), WeightedGraph::Kind::flow);
}

WeightedGraph build_spatial_graph_bruteforce(const LocationIndex& index, double delta) {
    if (delta <= 0.0) throw std::invalid_argument("delta must be positive");
    const std::size_t n = index.size();
    std::vector<GeoPoint> centers(n);
    for (std::size_t i = 0; i < n; ++i) centers[i] = cell_center(index.cells[i]);
    std::vector<Edge> edges;
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = i + 1; j < n; ++j) {
            const double d = haversine_distance(centers[i], centers[j]);
            if (d <= delta) edges.push_back({i, j, std::exp(-d / delta)});
        }
    }
    return csr_from_undirected(n, std::move(edges), WeightedGraph::Kind::spatial);
}

WeightedGraph build_spatial_graph(const LocationIndex& index, double delta, bool parallel) {
    if (delta <= 0.0) throw std::invalid_argument("delta must be positive");
    const std::size_t n = index.size();
    std::vector<GeoPoint> centers(n);
    for (std::size_t i = 0; i < n; ++i) centers[i] = cell_center(index.cells[i]);

    // Latitude bands at least delta tall (1 deg lat >= 110,574 m).
    const double band_deg = delta / 110'000.0;
    auto band_of = [&](double lat) {
        return static_cast<std::int64_t>(std::floor((lat + 90.0) / band_deg));
    };
    // Longitude bucket width for a band, conservative over the band and its
    // two neighbors so no within-delta pair can be more than one bucket
    // apart. Near the poles one bucket covers the whole band.
    auto lng_bucket_deg = [&](std::int64_t band) {
        const double abs_lat = std::max(std::abs((band - 1) * band_deg - 90.0),
                                        std::abs((band + 2) * band_deg - 90.0));
        if (abs_lat >= 88.0) return 360.0;
        return std::min(360.0, delta / (110'000.0 * std::cos(abs_lat * M_PI / 180.0)));
    };
    auto lng_bucket_of = [&](double lng, double width) {
        const std::int64_t count = std::max<std::int64_t>(
            1, static_cast<std::int64_t>(std::floor(360.0 / width)));
        auto b = static_cast<std::int64_t>(std::floor((lng + 180.0) / (360.0 / count)));
        return std::make_pair(std::clamp<std::int64_t>(b, 0, count - 1), count);
    };

    struct Key {
        std::int64_t band, bucket;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const noexcept {
            return std::hash<std::int64_t>{}(k.band * 1'000'003 + k.bucket);
        }
    };
    std::unordered_map<Key, std::vector<std::uint32_t>, KeyHash> buckets;
    for (std::uint32_t i = 0; i < n; ++i) {
        const auto band = band_of(centers[i].lat);
        const auto [bucket, count] = lng_bucket_of(centers[i].lng, lng_bucket_deg(band));
        (void)count;
        buckets[Key{band, bucket}].push_back(i);
    }

    auto candidates_of = [&](std::uint32_t i, std::vector<std::uint32_t>& out) {
        out.clear();
        const auto band_i = band_of(centers[i].lat);
        for (std::int64_t band = band_i - 1; band <= band_i + 1; ++band) {
            const double width = lng_bucket_deg(band);
            const auto [bi, count] = lng_bucket_of(centers[i].lng, width);
            std::int64_t seen[3];
            int n_seen = 0;
            for (std::int64_t db = -1; db <= 1; ++db) {
                const std::int64_t bucket = ((bi + db) % count + count) % count;
                bool dup = false;  // buckets alias when few per band
                for (int s = 0; s < n_seen; ++s) dup |= (seen[s] == bucket);
                if (dup) continue;
                seen[n_seen++] = bucket;
                const auto it = buckets.find(Key{band, bucket});
                if (it == buckets.end()) continue;
                for (std::uint32_t j : it->second)
                    if (j > i) out.push_back(j);
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
    };

    std::vector<Edge> edges;
#ifdef _OPENMP
    if (parallel) {
        #pragma omp parallel
        {
            std::vector<Edge> local;
            std::vector<std::uint32_t> cand;
            #pragma omp for schedule(dynamic, 64) nowait
            for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
                candidates_of(static_cast<std::uint32_t>(i), cand);
                for (std::uint32_t j : cand) {
                    const double d = haversine_distance(centers[i], centers[j]);
                    if (d <= delta)
                        local.push_back({static_cast<std::uint32_t>(i), j, std::exp(-d / delta)});
                }
            }
            #pragma omp critical
            edges.insert(edges.end(), local.begin(), local.end());
        }
    } else
#else
    (void)parallel;
#endif
    {
        std::vector<std::uint32_t> cand;
        for (std::uint32_t i = 0; i < n; ++i) {
            candidates_of(i, cand);
            for (std::uint32_t j : cand) {
                const double d = haversine_distance(centers[i], centers[j]);
                if (d <= delta) edges.push_back({i, j, std::exp(-d / delta)});
            }
        }
    }
    return csr_from_undirected(n, std::move(edges), WeightedGraph::Kind::spatial);
}

NormalizedGraph normalize_adjacency(const WeightedGraph& g) {
    NormalizedGraph out;
    out.n = g.n;
    std::vector<double> degree(g.n, 1.0);  // self-loop weight 1
    for (std::size_t i = 0; i < g.n; ++i)
        for (std::size_t k = g.row_ptr[i]; k < g.row_ptr[i + 1]; ++k)
            degree[i] += g.weight[k];

    out.row_ptr.assign(g.n + 1, 0);
    for (std::size_t i = 0; i < g.n; ++i)
        out.row_ptr[i + 1] = out.row_ptr[i] + (g.row_ptr[i + 1] - g.row_ptr[i]) + 1;
    out.col.resize(out.row_ptr[g.n]);
    out.weight.resize(out.row_ptr[g.n]);

    for (std::size_t i = 0; i < g.n; ++i) {
        std::size_t cursor = out.row_ptr[i];
        bool self_done = false;
        auto emit = [&](std::uint32_t j, double a) {
            out.col[cursor] = j;
            out.weight[cursor] = a / std::sqrt(degree[i] * degree[j]);
            ++cursor;
        };
        for (std::size_t k = g.row_ptr[i]; k < g.row_ptr[i + 1]; ++k) {
            const std::uint32_t j = g.col[k];
            if (!self_done && j > i) {
                emit(static_cast<std::uint32_t>(i), 1.0);
                self_done = true;
            }
            emit(j, g.weight[k]);
        }
        if (!self_done) emit(static_cast<std::uint32_t>(i), 1.0);
    }
    return out;
}

}  // namespace l2v
