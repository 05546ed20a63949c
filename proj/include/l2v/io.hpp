#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "l2v/eval.hpp"
#include "l2v/graph.hpp"
#include "l2v/kernels.hpp"
#include "l2v/trajectory.hpp"

namespace l2v {

// Reads a whole file; transparently inflates gzip (magic 1f 8b).
std::string read_file_maybe_gzip(const std::string& path);

// FNV-1a 64-bit content digest, hex. Used by the run manifests.
std::string content_digest(const std::string& bytes);
std::string file_digest(const std::string& path);

// Trajectory file: one line per trajectory,
// user_id<TAB>cell1,cell2,...<TAB>t1,t2,...
void write_trajectories(const std::string& path, const std::vector<Trajectory>& trajectories);
std::vector<Trajectory> read_trajectories(const std::string& path);

// Graph file: header "N E kind", then one line "i j w" per undirected edge, i < j.
void write_graph(const std::string& path, const WeightedGraph& g);
WeightedGraph read_graph(const std::string& path);

// Embedding file: first line "N d", then "level:index v1 ... vd".
void write_embeddings(const std::string& path, const Matrix& embeddings,
                      const std::vector<CellId>& cells);
struct EmbeddingFile {
    Matrix embeddings;
    std::vector<CellId> cells;
};
EmbeddingFile read_embeddings(const std::string& path);

// Region labeling: CSV "cell_id,region_id".
void write_regions(const std::string& path,
                   const std::vector<std::pair<CellId, std::uint32_t>>& labels);
std::vector<std::pair<CellId, std::uint32_t>> read_regions(const std::string& path);

// LBS records as the ingest CSV (with header).
void write_records_csv(const std::string& path, const std::vector<LbsRecord>& records);

// Feature export: CSV "cell_id,v1,...,vd", 17 significant digits.
void export_features(const std::string& path, const Matrix& embeddings,
                     const std::vector<CellId>& cells,
                     const std::vector<std::uint32_t>& ids);

// One JSON manifest per stage run, written next to the stage output as
// <output>.manifest.json. Downstream stages verify recorded digests.
struct PipelineManifest {
    std::string stage;
    std::string tool_version;
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;
    std::map<std::string, std::string> config;
    std::map<std::string, std::string> input_digests;   // path -> digest
    std::map<std::string, std::string> output_digests;  // path -> digest
};

void write_manifest(const std::string& output_path, const PipelineManifest& m);

// Throws if <path>.manifest.json exists and records a different digest
// for `path` among its outputs.
void verify_against_manifest(const std::string& path);

std::string format_double_17g(double v);

}  // namespace l2v
