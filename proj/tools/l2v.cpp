// Pipeline driver: ingest -> build-graphs -> train -> query / eval, plus a
// synthetic-city generator. Every stage writes a JSON manifest next to its
// output and verifies the manifests of the files it reads.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "l2v/eval.hpp"
#include "l2v/graph.hpp"
#include "l2v/io.hpp"
#include "l2v/model.hpp"
#include "l2v/synth.hpp"
#include "l2v/trajectory.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Missing inputs and manifest digest mismatches are validation errors.
void check_input(const std::string& path) {
    if (!std::filesystem::exists(path))
        throw CLI::ValidationError("input file does not exist: " + path);
    try {
        l2v::verify_against_manifest(path);
    } catch (const std::exception& e) {
        throw CLI::ValidationError(e.what());
    }
}

l2v::LocationIndex index_for(const std::vector<l2v::Trajectory>& trajectories,
                             bool densify, int level) {
    auto index = l2v::build_location_index(trajectories);
    if (densify) l2v::densify_bounding_box(index, level);
    return index;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GCN-aided location embedding pipeline"};
    app.require_subcommand(1);

    // shared knobs
    int level = 18;
    std::int64_t max_gap = 3600;
    double delta = 500.0;
    std::uint64_t seed = 1;
    bool deterministic = false;
    bool densify = false;
    int threads = 4;

    l2v::TrainConfig tc;
    std::string agg = "mean";
    std::string graphs_mode = "both";

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--level", level, "grid level (cell resolution)");
        cmd->add_option("--seed", seed, "RNG seed");
        cmd->add_flag("--deterministic", deterministic, "single-worker, bit-reproducible mode");
        cmd->add_option("--threads", threads, "worker count outside deterministic mode");
    };

    // synth
    l2v::SyntheticCityConfig sc;
    std::string synth_out = "records.csv", synth_regions_out = "regions.csv";
    auto* synth = app.add_subcommand("synth", "generate a synthetic city dataset");
    synth->add_option("--out", synth_out, "output LBS record CSV");
    synth->add_option("--regions-out", synth_regions_out, "output region labeling CSV");
    synth->add_option("--regions", sc.regions, "region count");
    synth->add_option("--cells-per-region", sc.cells_per_region, "cells per region");
    synth->add_option("--inter-prob", sc.inter_region_prob, "inter-region jump probability");
    synth->add_option("--trajectories", sc.trajectories, "trajectory count");
    synth->add_option("--traj-len", sc.trajectory_length, "records per trajectory");
    add_common(synth);

    // ingest
    std::string in_records = "records.csv", out_traj = "trajectories.tsv";
    auto* ingest = app.add_subcommand("ingest", "parse records and sessionize into trajectories");
    ingest->add_option("--input", in_records, "LBS record CSV (optionally gzipped)");
    ingest->add_option("--output", out_traj, "trajectory file");
    ingest->add_option("--max-gap", max_gap, "session cut gap, seconds");
    add_common(ingest);

    // build-graphs
    std::string traj_path = "trajectories.tsv";
    std::string flow_out = "flow.graph", spatial_out = "spatial.graph";
    double min_count = 1.0;
    auto* build = app.add_subcommand("build-graphs", "build flow and spatial graphs");
    build->add_option("--trajectories", traj_path, "trajectory file");
    build->add_option("--flow-out", flow_out, "flow graph output");
    build->add_option("--spatial-out", spatial_out, "spatial graph output");
    build->add_option("--delta", delta, "spatial distance threshold, meters");
    build->add_option("--min-count", min_count, "drop flow edges below this weight");
    build->add_flag("--densify", densify, "index every cell in the observed bounding box");
    add_common(build);

    // train
    std::string flow_in = "flow.graph", spatial_in = "spatial.graph";
    std::string emb_out = "embeddings.txt", features_out;
    auto* train_cmd = app.add_subcommand("train", "train embeddings and export them");
    train_cmd->add_option("--trajectories", traj_path, "trajectory file");
    train_cmd->add_option("--flow", flow_in, "flow graph file");
    train_cmd->add_option("--spatial", spatial_in, "spatial graph file");
    train_cmd->add_option("--output", emb_out, "embedding output file");
    train_cmd->add_option("--features-out", features_out, "optional CSV feature export");
    train_cmd->add_option("--dim", tc.dim, "embedding dimension");
    train_cmd->add_option("--window", tc.window, "skip-gram window size");
    train_cmd->add_option("--negatives", tc.negatives, "negative samples per center");
    train_cmd->add_option("--epochs", tc.max_epochs, "maximum epochs");
    train_cmd->add_option("--lr", tc.learning_rate, "initial learning rate");
    train_cmd->add_option("--tolerance", tc.tolerance, "epoch-loss convergence tolerance");
    train_cmd->add_option("--agg", agg, "aggregation: mean or max")
        ->check(CLI::IsMember({"mean", "max"}));
    train_cmd->add_option("--graphs", graphs_mode, "graphs to use: both, flow, spatial")
        ->check(CLI::IsMember({"both", "flow", "spatial"}));
    train_cmd->add_flag("--densify", densify, "index every cell in the observed bounding box");
    add_common(train_cmd);

    // query
    std::string emb_in = "embeddings.txt", query_cell, query_out;
    std::size_t k = 5;
    auto* query = app.add_subcommand("query", "top-k cosine neighbors of a cell");
    query->add_option("--embeddings", emb_in, "embedding file");
    query->add_option("--cell", query_cell, "query cell id, level:index")->required();
    query->add_option("--k", k, "neighbor count");
    query->add_option("--output", query_out, "output CSV (default: stdout)");
    add_common(query);

    // eval
    std::string regions_in = "regions.csv";
    auto* eval_cmd = app.add_subcommand("eval", "region Accuracy@K over an embedding");
    eval_cmd->add_option("--embeddings", emb_in, "embedding file");
    eval_cmd->add_option("--regions", regions_in, "region labeling CSV");
    eval_cmd->add_option("--k", k, "neighbor count");
    add_common(eval_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the message and usage to the diagnostic stream
        return 1;
    }

    const auto start = Clock::now();
    l2v::PipelineManifest manifest;
    manifest.tool_version = kVersion;
    manifest.seed = seed;

    try {
        if (synth->parsed()) {
            sc.level = level;
            sc.seed = seed;
            const auto city = l2v::generate_synthetic_city(sc);
            l2v::write_records_csv(synth_out, city.records);
            l2v::write_regions(synth_regions_out, city.labels);
            manifest.stage = "synth";
            manifest.config = {{"regions", std::to_string(sc.regions)},
                               {"cells_per_region", std::to_string(sc.cells_per_region)},
                               {"inter_prob", l2v::format_double_17g(sc.inter_region_prob)},
                               {"trajectories", std::to_string(sc.trajectories)},
                               {"traj_len", std::to_string(sc.trajectory_length)},
                               {"level", std::to_string(level)}};
            manifest.output_digests[synth_out] = l2v::file_digest(synth_out);
            manifest.output_digests[synth_regions_out] = l2v::file_digest(synth_regions_out);
            manifest.wall_time_s = seconds_since(start);
            l2v::write_manifest(synth_out, manifest);
            std::cerr << "synth: " << city.records.size() << " records, "
                      << city.labels.size() << " labeled cells\n";
        } else if (ingest->parsed()) {
            check_input(in_records);
            std::istringstream stream(l2v::read_file_maybe_gzip(in_records));
            const auto parsed = l2v::parse_records(stream);
            if (parsed.rejected > 0) {
                std::cerr << "ingest: rejected " << parsed.rejected << " malformed lines\n";
                for (const auto& s : parsed.rejection_samples) std::cerr << "  " << s << "\n";
            }
            const auto trajectories = l2v::sessionize(parsed.records, max_gap, level);
            l2v::write_trajectories(out_traj, trajectories);
            manifest.stage = "ingest";
            manifest.config = {{"level", std::to_string(level)},
                               {"max_gap", std::to_string(max_gap)},
                               {"rejected", std::to_string(parsed.rejected)}};
            manifest.input_digests[in_records] = l2v::file_digest(in_records);
            manifest.output_digests[out_traj] = l2v::file_digest(out_traj);
            manifest.wall_time_s = seconds_since(start);
            l2v::write_manifest(out_traj, manifest);
            std::cerr << "ingest: " << parsed.records.size() << " records -> "
                      << trajectories.size() << " trajectories\n";
        } else if (build->parsed()) {
            check_input(traj_path);
            const auto trajectories = l2v::read_trajectories(traj_path);
            const auto index = index_for(trajectories, densify, level);
            const auto ids = l2v::trajectories_to_ids(trajectories, index);
            const auto flow = l2v::build_flow_graph(ids, index, min_count);
            const auto spatial = l2v::build_spatial_graph(index, delta, !deterministic);
            l2v::write_graph(flow_out, flow);
            l2v::write_graph(spatial_out, spatial);
            manifest.stage = "build-graphs";
            manifest.config = {{"level", std::to_string(level)},
                               {"delta", l2v::format_double_17g(delta)},
                               {"min_count", l2v::format_double_17g(min_count)},
                               {"densify", densify ? "true" : "false"}};
            manifest.input_digests[traj_path] = l2v::file_digest(traj_path);
            manifest.output_digests[flow_out] = l2v::file_digest(flow_out);
            manifest.output_digests[spatial_out] = l2v::file_digest(spatial_out);
            manifest.wall_time_s = seconds_since(start);
            l2v::write_manifest(flow_out, manifest);
            l2v::write_manifest(spatial_out, manifest);
            std::cerr << "build-graphs: N=" << index.size() << " flow edges="
                      << flow.edge_count() << " spatial edges=" << spatial.edge_count() << "\n";
        } else if (train_cmd->parsed()) {
            check_input(traj_path);
            check_input(flow_in);
            check_input(spatial_in);
            const auto trajectories = l2v::read_trajectories(traj_path);
            const auto index = index_for(trajectories, densify, level);
            const auto ids = l2v::trajectories_to_ids(trajectories, index);
            const auto flow_raw = l2v::read_graph(flow_in);
            const auto spatial_raw = l2v::read_graph(spatial_in);
            if (flow_raw.n != index.size() || spatial_raw.n != index.size())
                throw CLI::ValidationError(
                    "graph size does not match the trajectory index (check --densify)");
            const auto flow = l2v::normalize_adjacency(flow_raw);
            const auto spatial = l2v::normalize_adjacency(spatial_raw);
            tc.aggregation = agg == "mean" ? l2v::Aggregation::mean : l2v::Aggregation::max;
            tc.use_flow = graphs_mode != "spatial";
            tc.use_spatial = graphs_mode != "flow";
            tc.seed = seed;
            tc.threads = deterministic ? 1 : threads;
            const auto result = l2v::train(ids, flow, spatial, index, tc);
            l2v::write_embeddings(emb_out, result.embeddings, index.cells);
            if (!features_out.empty()) {
                std::vector<std::uint32_t> all(index.size());
                for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
                l2v::export_features(features_out, result.embeddings, index.cells, all);
            }
            manifest.stage = "train";
            manifest.config = {{"dim", std::to_string(tc.dim)},
                               {"window", std::to_string(tc.window)},
                               {"negatives", std::to_string(tc.negatives)},
                               {"epochs", std::to_string(tc.max_epochs)},
                               {"lr", l2v::format_double_17g(tc.learning_rate)},
                               {"tolerance", l2v::format_double_17g(tc.tolerance)},
                               {"agg", agg},
                               {"graphs", graphs_mode},
                               {"level", std::to_string(level)},
                               {"densify", densify ? "true" : "false"},
                               {"threads", std::to_string(tc.threads)},
                               {"epochs_run", std::to_string(result.epochs_run)}};
            manifest.input_digests[traj_path] = l2v::file_digest(traj_path);
            manifest.input_digests[flow_in] = l2v::file_digest(flow_in);
            manifest.input_digests[spatial_in] = l2v::file_digest(spatial_in);
            manifest.output_digests[emb_out] = l2v::file_digest(emb_out);
            if (!features_out.empty())
                manifest.output_digests[features_out] = l2v::file_digest(features_out);
            manifest.wall_time_s = seconds_since(start);
            l2v::write_manifest(emb_out, manifest);
            std::cerr << "train: " << result.epochs_run << " epochs, final mean loss "
                      << (result.epoch_mean_loss.empty() ? 0.0 : result.epoch_mean_loss.back())
                      << "\n";
        } else if (query->parsed()) {
            check_input(emb_in);
            const auto file = l2v::read_embeddings(emb_in);
            const auto cell = l2v::cell_from_string(query_cell);
            std::uint32_t query_id = UINT32_MAX;
            for (std::uint32_t i = 0; i < file.cells.size(); ++i)
                if (file.cells[i] == cell) {
                    query_id = i;
                    break;
                }
            if (query_id == UINT32_MAX)
                throw CLI::ValidationError("cell not present in embedding file: " + query_cell);
            const auto neighbors = l2v::top_k_neighbors(file.embeddings, query_id, k);
            std::ostringstream out;
            out << "rank,cell_id,similarity\n";
            for (std::size_t r = 0; r < neighbors.size(); ++r)
                out << (r + 1) << ',' << l2v::cell_to_string(file.cells[neighbors[r].first])
                    << ',' << l2v::format_double_17g(neighbors[r].second) << '\n';
            if (query_out.empty()) {
                std::cout << out.str();
            } else {
                std::ofstream f(query_out);
                f << out.str();
                manifest.stage = "query";
                manifest.config = {{"cell", query_cell}, {"k", std::to_string(k)}};
                manifest.input_digests[emb_in] = l2v::file_digest(emb_in);
                f.close();
                manifest.output_digests[query_out] = l2v::file_digest(query_out);
                manifest.wall_time_s = seconds_since(start);
                l2v::write_manifest(query_out, manifest);
            }
        } else if (eval_cmd->parsed()) {
            check_input(emb_in);
            check_input(regions_in);
            const auto file = l2v::read_embeddings(emb_in);
            std::unordered_map<l2v::CellId, std::uint32_t, l2v::CellIdHash> id_of;
            for (std::uint32_t i = 0; i < file.cells.size(); ++i) id_of[file.cells[i]] = i;
            l2v::RegionLabeling regions;
            std::size_t unmatched = 0;
            for (const auto& [cell, region] : l2v::read_regions(regions_in)) {
                const auto it = id_of.find(cell);
                if (it == id_of.end())
                    ++unmatched;  // labeled but never embedded
                else
                    regions.add(it->second, region);
            }
            if (unmatched > 0)
                std::cerr << "eval: " << unmatched << " labeled cells not in the embedding\n";
            std::vector<std::uint32_t> skipped;
            const double acc =
                l2v::region_accuracy_at_k(file.embeddings, regions, k, seed, &skipped);
            for (auto rid : skipped)
                std::cerr << "eval: region " << rid << " skipped (<= k members)\n";
            std::cout << "accuracy@" << k << " " << l2v::format_double_17g(acc) << "\n";
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
