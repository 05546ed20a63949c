#pragma once

#include <cstdint>
#include <vector>

#include "l2v/trajectory.hpp"

namespace l2v {

// Sparse undirected weighted graph in CSR form. Both directions of every
// edge are stored; no self-loops; all weights positive.
struct WeightedGraph {
    enum class Kind { flow, spatial };

    std::size_t n = 0;
    std::vector<std::size_t> row_ptr;   // n + 1
    std::vector<std::uint32_t> col;
    std::vector<double> weight;
    Kind kind = Kind::flow;

    std::size_t edge_count() const { return col.size() / 2; }  // undirected
};

// Symmetrically normalized operator D~^{-1/2} (A + I) D~^{-1/2}, CSR with
// the diagonal entries included.
struct NormalizedGraph {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr;
    std::vector<std::uint32_t> col;
    std::vector<double> weight;
};

// Accumulates unordered pairs (i, j), i != j, into a symmetric CSR graph.
// Used by both builders and by the file reader.
WeightedGraph graph_from_edges(std::size_t n,
                               const std::vector<std::uint32_t>& src,
                               const std::vector<std::uint32_t>& dst,
                               const std::vector<double>& w,
                               WeightedGraph::Kind kind);

// Each consecutive pair in each trajectory adds 1 to the undirected weight
// between its ids. Edges with total weight below min_count are dropped.
WeightedGraph build_flow_graph(const std::vector<std::vector<std::uint32_t>>& trajectories,
                               const LocationIndex& index, double min_count = 1.0);

// Connects every pair of indexed cells whose centers lie within delta
// meters, with weight exp(-dist/delta). Bucketed neighbor search; the
// brute-force variant is the O(N^2) reference used in tests.
WeightedGraph build_spatial_graph(const LocationIndex& index, double delta,
                                  bool parallel = true);
WeightedGraph build_spatial_graph_bruteforce(const LocationIndex& index, double delta);

NormalizedGraph normalize_adjacency(const WeightedGraph& g);

}  // namespace l2v
