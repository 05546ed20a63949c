// Serial-vs-OpenMP benchmark for the hot kernels: sparse propagation,
// dense matmul, spatial graph construction, and a training epoch.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "l2v/graph.hpp"
#include "l2v/kernels.hpp"
#include "l2v/model.hpp"
#include "l2v/synth.hpp"

using namespace l2v;

namespace {

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <typename F>
double time_best_of(int reps, F&& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const double t0 = now_s();
        f();
        best = std::min(best, now_s() - t0);
    }
    return best;
}

void row(const char* name, double serial, double parallel) {
    std::printf("%-28s %10.4f ms %10.4f ms %8.2fx\n", name, serial * 1e3,
                parallel * 1e3, serial / parallel);
}

NormalizedGraph random_normalized(std::mt19937_64& rng, std::size_t n, std::size_t avg_deg) {
    std::vector<std::uint32_t> src, dst;
    std::vector<double> w;
    std::uniform_int_distribution<std::uint32_t> node(0, static_cast<std::uint32_t>(n - 1));
    std::uniform_real_distribution<double> wgt(0.1, 1.0);
    for (std::size_t e = 0; e < n * avg_deg / 2; ++e) {
        std::uint32_t i = node(rng), j = node(rng);
        if (i == j) continue;
        if (i > j) std::swap(i, j);
        src.push_back(i);
        dst.push_back(j);
        w.push_back(wgt(rng));
    }
    return normalize_adjacency(graph_from_edges(n, src, dst, w, WeightedGraph::Kind::flow));
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; 'parallel' columns run the serial path\n");
#endif
    std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

    std::mt19937_64 rng(1);

    {  // sparse propagation, 20k nodes x 64 dims, ~16 neighbors each
        const auto a = random_normalized(rng, 20000, 16);
        Matrix x(a.n, 64), y(a.n, 64);
        std::uniform_real_distribution<double> v(-1.0, 1.0);
        for (double& e : x.data) e = v(rng);
        const double ts = time_best_of(5, [&] { spmm_serial(a, x, y); });
        const double tp = time_best_of(5, [&] { spmm_parallel(a, x, y); });
        row("spmm 20000x64 deg16", ts, tp);
    }

    {  // dense projection, 50k x 64 by 64 x 64
        Matrix x(50000, 64), w(64, 64), y(50000, 64);
        std::uniform_real_distribution<double> v(-1.0, 1.0);
        for (double& e : x.data) e = v(rng);
        for (double& e : w.data) e = v(rng);
        const double ts = time_best_of(5, [&] { matmul_serial(x, w, y); });
        const double tp = time_best_of(5, [&] { matmul_parallel(x, w, y); });
        row("matmul 50000x64 * 64x64", ts, tp);
    }

    {  // spatial graph over a dense synthetic city
        SyntheticCityConfig cfg;
        cfg.regions = 8;
        cfg.cells_per_region = 400;
        cfg.trajectories = 1;
        const auto city = generate_synthetic_city(cfg);
        LocationIndex index;
        for (const auto& [cell, r] : city.labels) index.add_cell(cell);
        const double ts =
            time_best_of(3, [&] { build_spatial_graph(index, 500.0, false); });
        const double tp =
            time_best_of(3, [&] { build_spatial_graph(index, 500.0, true); });
        row("spatial graph 3200 cells", ts, tp);
    }

    {  // one training epoch, deterministic vs lock-free threads
        SyntheticCityConfig cfg;
        cfg.trajectories = 800;
        const auto city = generate_synthetic_city(cfg);
        const auto trajs = sessionize(city.records, 3600, cfg.level);
        const auto index = build_location_index(trajs);
        const auto ids = trajectories_to_ids(trajs, index);
        const auto flow = normalize_adjacency(build_flow_graph(ids, index));
        const auto spatial = normalize_adjacency(build_spatial_graph(index, 500.0));
        TrainConfig tc;
        tc.max_epochs = 1;
        tc.tolerance = 0.0;
        const double ts = time_best_of(2, [&] {
            TrainConfig c = tc;
            c.threads = 1;
            train(ids, flow, spatial, index, c);
        });
        const double tp = time_best_of(2, [&] {
            TrainConfig c = tc;
#ifdef _OPENMP
            c.threads = omp_get_max_threads();
#endif
            train(ids, flow, spatial, index, c);
        });
        row("train epoch 800 trajs", ts, tp);
    }
    return 0;
}
