#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "l2v/graph.hpp"
#include "l2v/kernels.hpp"
#include "l2v/sampler.hpp"

namespace l2v {

enum class Activation { identity, tanh };
enum class Aggregation { mean, max };

struct ModelParams {
    Matrix u0;   // N x d node base embeddings
    Matrix u0c;  // N x d context base embeddings
    Matrix wf;   // d x d flow GCN weights, shared by node and context paths
    Matrix ws;   // d x d spatial GCN weights
    std::size_t dim() const { return u0.cols; }
    std::size_t n() const { return u0.rows; }
};

struct TrainConfig {
    std::size_t dim = 16;
    std::size_t window = 5;
    std::size_t negatives = 5;
    double learning_rate = 0.025;
    double min_learning_rate = 1e-4;
    std::size_t max_epochs = 30;
    double tolerance = 1e-4;  // relative change in epoch-mean loss
    Aggregation aggregation = Aggregation::mean;
    Activation activation = Activation::tanh;
    bool use_flow = true;
    bool use_spatial = true;  // disabling one gives the ablation variants
    std::uint64_t seed = 1;
    int threads = 1;  // 1 = deterministic; >1 = lock-free overlapping updates

    void validate() const;
};

// U0, U0c uniform in [-0.5/d, 0.5/d]; Wf, Ws Glorot-uniform.
ModelParams init_params(std::size_t n, const TrainConfig& cfg);

// act(A_hat * base * W), computed row by row against the sparse operator.
Matrix gcn_forward(const NormalizedGraph& normalized, const Matrix& base,
                   const Matrix& w, Activation act, bool parallel = false);

// The requested rows of gcn_forward, gathering only each row's neighbors.
Matrix gcn_forward_rows(const NormalizedGraph& normalized, const Matrix& base,
                        const Matrix& w, Activation act,
                        std::span<const std::uint32_t> rows);

Matrix aggregate(const Matrix& uf, const Matrix& us, Aggregation mode);

// Final node (or context) vectors for the requested rows: the aggregated
// flow/spatial GCN outputs over U0 (or U0c).
Matrix embed(const ModelParams& params, const NormalizedGraph& flow,
             const NormalizedGraph& spatial, const TrainConfig& cfg,
             std::span<const std::uint32_t> rows, bool context = false);

// All-rows variant.
Matrix embed_all(const ModelParams& params, const NormalizedGraph& flow,
                 const NormalizedGraph& spatial, const TrainConfig& cfg,
                 bool context = false, bool parallel = false);

// Negative-sampling skip-gram loss for one center:
//   sum_contexts -log sigma(u . u') + sum_negatives -log sigma(-u . u'_z)
double skipgram_loss(std::span<const double> center,
                     const std::vector<std::span<const double>>& contexts,
                     const std::vector<std::span<const double>>& negatives);

struct SkipgramBatch {
    std::uint32_t center = 0;
    std::vector<std::uint32_t> contexts;
    std::vector<std::uint32_t> negatives;
};

// Sparse gradients: only rows in the 1-hop neighborhoods (plus self) of the
// batch ids appear in the row maps.
struct SkipgramGradients {
    double loss = 0.0;
    std::unordered_map<std::uint32_t, std::vector<double>> u0;
    std::unordered_map<std::uint32_t, std::vector<double>> u0c;
    Matrix wf;
    Matrix ws;
};

SkipgramGradients skipgram_gradients(const SkipgramBatch& batch,
                                     const ModelParams& params,
                                     const NormalizedGraph& flow,
                                     const NormalizedGraph& spatial,
                                     const TrainConfig& cfg);

struct TrainResult {
    Matrix embeddings;                 // N x d node vectors
    ModelParams params;
    std::vector<double> epoch_mean_loss;
    std::size_t epochs_run = 0;
    std::vector<std::uint8_t> u0_grad_touched;  // rows that ever got nonzero gradient
};

TrainResult train(const std::vector<std::vector<std::uint32_t>>& trajectories,
                  const NormalizedGraph& flow, const NormalizedGraph& spatial,
                  const LocationIndex& index, const TrainConfig& cfg);

// Exact Eq.-4 log-likelihood over the full location softmax; test oracle,
// guarded to N <= 1000.
double full_softmax_log_likelihood(
    const std::vector<std::vector<std::uint32_t>>& trajectories,
    const ModelParams& params, const NormalizedGraph& flow,
    const NormalizedGraph& spatial, const TrainConfig& cfg);

// Numerically stable helpers shared with tests.
double log_sigmoid(double x);
double sigmoid(double x);

}  // namespace l2v
