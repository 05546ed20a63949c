#include "l2v/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace l2v {

double log_sigmoid(double x) {
    // -softplus(-x), stable on both tails
    if (x >= 0.0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

void TrainConfig::validate() const {
    if (dim < 1) throw std::invalid_argument("dim must be >= 1");
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    if (negatives < 1) throw std::invalid_argument("negatives must be >= 1");
    if (learning_rate <= 0.0 || min_learning_rate <= 0.0)
        throw std::invalid_argument("learning rates must be positive");
    if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
    if (!use_flow && !use_spatial)
        throw std::invalid_argument("at least one graph must be enabled");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

ModelParams init_params(std::size_t n, const TrainConfig& cfg) {
    ModelParams p;
    const std::size_t d = cfg.dim;
    p.u0 = Matrix(n, d);
    p.u0c = Matrix(n, d);
    p.wf = Matrix(d, d);
    p.ws = Matrix(d, d);
    std::mt19937_64 rng(cfg.seed);
    const double eb = 0.5 / static_cast<double>(d);
    std::uniform_real_distribution<double> emb(-eb, eb);
    for (double& v : p.u0.data) v = emb(rng);
    for (double& v : p.u0c.data) v = emb(rng);
    const double wb = std::sqrt(6.0 / (2.0 * static_cast<double>(d)));
    std::uniform_real_distribution<double> wei(-wb, wb);
    for (double& v : p.wf.data) v = wei(rng);
    for (double& v : p.ws.data) v = wei(rng);
    return p;
}

namespace {

inline double activate(double x, Activation act) {
    return act == Activation::tanh ? std::tanh(x) : x;
}

inline void apply_activation(Matrix& m, Activation act) {
    if (act == Activation::identity) return;
    for (double& v : m.data) v = std::tanh(v);
}

}  // namespace

Matrix gcn_forward(const NormalizedGraph& normalized, const Matrix& base,
                   const Matrix& w, Activation act, bool parallel) {
    if (base.rows != normalized.n)
        throw std::invalid_argument("gcn_forward: base rows != graph size");
    if (w.rows != base.cols || w.cols != base.cols)
        throw std::invalid_argument("gcn_forward: weight matrix must be d x d");
    Matrix propagated, out;
    if (parallel) {
        spmm_parallel(normalized, base, propagated);
        matmul_parallel(propagated, w, out);
    } else {
        spmm_serial(normalized, base, propagated);
        matmul_serial(propagated, w, out);
    }
    apply_activation(out, act);
    return out;
}

Matrix gcn_forward_rows(const NormalizedGraph& normalized, const Matrix& base,
                        const Matrix& w, Activation act,
                        std::span<const std::uint32_t> rows) {
    if (base.rows != normalized.n)
        throw std::invalid_argument("gcn_forward_rows: base rows != graph size");
    if (w.rows != base.cols || w.cols != base.cols)
        throw std::invalid_argument("gcn_forward_rows: weight matrix must be d x d");
    const std::size_t d = base.cols;
    Matrix out(rows.size(), d);
    std::vector<double> gathered(d);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r] >= normalized.n)
            throw std::out_of_range("gcn_forward_rows: row id out of range");
        spmv_row(normalized, base, rows[r], gathered);
        double* o = out.row(r);
        for (std::size_t j = 0; j < d; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < d; ++k) acc += gathered[k] * w.at(k, j);
            o[j] = activate(acc, act);
        }
    }
    return out;
}

Matrix aggregate(const Matrix& uf, const Matrix& us, Aggregation mode) {
    if (uf.rows != us.rows || uf.cols != us.cols)
        throw std::invalid_argument("aggregate: shape mismatch");
    Matrix out(uf.rows, uf.cols);
    if (mode == Aggregation::mean) {
        for (std::size_t i = 0; i < out.data.size(); ++i)
            out.data[i] = 0.5 * (uf.data[i] + us.data[i]);
    } else {
        for (std::size_t i = 0; i < out.data.size(); ++i)
            out.data[i] = std::max(uf.data[i], us.data[i]);
    }
    return out;
}

Matrix embed(const ModelParams& params, const NormalizedGraph& flow,
             const NormalizedGraph& spatial, const TrainConfig& cfg,
             std::span<const std::uint32_t> rows, bool context) {
    const Matrix& base = context ? params.u0c : params.u0;
    if (cfg.use_flow && cfg.use_spatial) {
        const Matrix uf = gcn_forward_rows(flow, base, params.wf, cfg.activation, rows);
        const Matrix us = gcn_forward_rows(spatial, base, params.ws, cfg.activation, rows);
        return aggregate(uf, us, cfg.aggregation);
    }
    if (cfg.use_flow)
        return gcn_forward_rows(flow, base, params.wf, cfg.activation, rows);
    return gcn_forward_rows(spatial, base, params.ws, cfg.activation, rows);
}

Matrix embed_all(const ModelParams& params, const NormalizedGraph& flow,
                 const NormalizedGraph& spatial, const TrainConfig& cfg,
                 bool context, bool parallel) {
    const Matrix& base = context ? params.u0c : params.u0;
    if (cfg.use_flow && cfg.use_spatial) {
        const Matrix uf = gcn_forward(flow, base, params.wf, cfg.activation, parallel);
        const Matrix us = gcn_forward(spatial, base, params.ws, cfg.activation, parallel);
        return aggregate(uf, us, cfg.aggregation);
    }
    if (cfg.use_flow)
        return gcn_forward(flow, base, params.wf, cfg.activation, parallel);
    return gcn_forward(spatial, base, params.ws, cfg.activation, parallel);
}

double skipgram_loss(std::span<const double> center,
                     const std::vector<std::span<const double>>& contexts,
                     const std::vector<std::span<const double>>& negatives) {
    auto dot = [&](std::span<const double> v) {
        if (v.size() != center.size())
            throw std::invalid_argument("skipgram_loss: dimension mismatch");
        double s = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) s += center[j] * v[j];
        return s;
    };
    double loss = 0.0;
    for (const auto& c : contexts) loss += -log_sigmoid(dot(c));
    for (const auto& z : negatives) loss += -log_sigmoid(-dot(z));
    return loss;
}

namespace {

// Everything the backward pass needs about one row's forward computation.
struct RowForward {
    std::vector<double> af, as;  // gathered neighbor sums
    std::vector<double> hf, hs;  // activated per-graph outputs
    std::vector<double> u;       // aggregated vector
};

RowForward forward_row(std::uint32_t row, const Matrix& base,
                       const NormalizedGraph& flow, const NormalizedGraph& spatial,
                       const ModelParams& params, const TrainConfig& cfg) {
    const std::size_t d = base.cols;
    RowForward f;
    auto run_path = [&](const NormalizedGraph& g, const Matrix& w,
                        std::vector<double>& a, std::vector<double>& h) {
        a.resize(d);
        h.resize(d);
        spmv_row(g, base, row, a);
        for (std::size_t j = 0; j < d; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < d; ++k) acc += a[k] * w.at(k, j);
            h[j] = activate(acc, cfg.activation);
        }
    };
    if (cfg.use_flow) run_path(flow, params.wf, f.af, f.hf);
    if (cfg.use_spatial) run_path(spatial, params.ws, f.as, f.hs);
    if (cfg.use_flow && cfg.use_spatial) {
        f.u.resize(d);
        if (cfg.aggregation == Aggregation::mean) {
            for (std::size_t j = 0; j < d; ++j) f.u[j] = 0.5 * (f.hf[j] + f.hs[j]);
        } else {
            for (std::size_t j = 0; j < d; ++j) f.u[j] = std::max(f.hf[j], f.hs[j]);
        }
    } else {
        f.u = cfg.use_flow ? f.hf : f.hs;
    }
    return f;
}

// Backpropagates g = dL/du of one row into the base-row map and the shared
// W accumulators. `dbase` rows are created lazily, zero-initialized.
void backward_row(std::uint32_t row, const RowForward& f,
                  std::span<const double> g, const Matrix& base,
                  const NormalizedGraph& flow, const NormalizedGraph& spatial,
                  const ModelParams& params, const TrainConfig& cfg,
                  std::unordered_map<std::uint32_t, std::vector<double>>& dbase,
                  Matrix& dwf, Matrix& dws) {
    const std::size_t d = base.cols;
    std::vector<double> gh(d), dp(d), da(d);
    auto run_path = [&](const NormalizedGraph& graph, const Matrix& w, Matrix& dw,
                        const std::vector<double>& a, const std::vector<double>& h) {
        // dp = gh * act'(pre-activation); tanh' = 1 - h^2
        for (std::size_t j = 0; j < d; ++j)
            dp[j] = cfg.activation == Activation::tanh ? gh[j] * (1.0 - h[j] * h[j]) : gh[j];
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < d; ++c) dw.at(r, c) += a[r] * dp[c];
        for (std::size_t r = 0; r < d; ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < d; ++c) acc += w.at(r, c) * dp[c];
            da[r] = acc;
        }
        for (std::size_t k = graph.row_ptr[row]; k < graph.row_ptr[row + 1]; ++k) {
            auto& slot = dbase[graph.col[k]];
            if (slot.empty()) slot.assign(d, 0.0);
            const double wgt = graph.weight[k];
            for (std::size_t j = 0; j < d; ++j) slot[j] += wgt * da[j];
        }
    };
    const bool both = cfg.use_flow && cfg.use_spatial;
    if (cfg.use_flow) {
        if (both && cfg.aggregation == Aggregation::mean) {
            for (std::size_t j = 0; j < d; ++j) gh[j] = 0.5 * g[j];
        } else if (both) {
            for (std::size_t j = 0; j < d; ++j) gh[j] = f.hf[j] >= f.hs[j] ? g[j] : 0.0;
        } else {
            std::copy(g.begin(), g.end(), gh.begin());
        }
        run_path(flow, params.wf, dwf, f.af, f.hf);
    }
    if (cfg.use_spatial) {
        if (both && cfg.aggregation == Aggregation::mean) {
            for (std::size_t j = 0; j < d; ++j) gh[j] = 0.5 * g[j];
        } else if (both) {
            for (std::size_t j = 0; j < d; ++j) gh[j] = f.hf[j] >= f.hs[j] ? 0.0 : g[j];
        } else {
            std::copy(g.begin(), g.end(), gh.begin());
        }
        run_path(spatial, params.ws, dws, f.as, f.hs);
    }
}

}  // namespace

SkipgramGradients skipgram_gradients(const SkipgramBatch& batch,
                                     const ModelParams& params,
                                     const NormalizedGraph& flow,
                                     const NormalizedGraph& spatial,
                                     const TrainConfig& cfg) {
    const std::size_t d = params.dim();
    SkipgramGradients grads;
    grads.wf = Matrix(d, d);
    grads.ws = Matrix(d, d);

    // Unique rows appearing on the context side (contexts and negatives can
    // repeat or coincide; gradient contributions accumulate per row).
    std::vector<std::uint32_t> ctx_rows;
    std::unordered_map<std::uint32_t, std::size_t> ctx_pos;
    auto intern = [&](std::uint32_t id) {
        auto [it, inserted] = ctx_pos.emplace(id, ctx_rows.size());
        if (inserted) ctx_rows.push_back(id);
        return it->second;
    };
    for (auto id : batch.contexts) intern(id);
    for (auto id : batch.negatives) intern(id);

    const RowForward center = forward_row(batch.center, params.u0, flow, spatial, params, cfg);
    std::vector<RowForward> ctx_fwd;
    ctx_fwd.reserve(ctx_rows.size());
    for (auto id : ctx_rows)
        ctx_fwd.push_back(forward_row(id, params.u0c, flow, spatial, params, cfg));

    std::vector<double> g_center(d, 0.0);
    std::vector<std::vector<double>> g_ctx(ctx_rows.size(), std::vector<double>(d, 0.0));
    auto pair_term = [&](std::uint32_t id, bool positive) {
        const std::size_t p = ctx_pos.at(id);
        const auto& uo = ctx_fwd[p].u;
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += center.u[j] * uo[j];
        // d(-log sigma(s))/ds = sigma(s) - 1; d(-log sigma(-s))/ds = sigma(s)
        const double coef = positive ? sigmoid(s) - 1.0 : sigmoid(s);
        grads.loss += positive ? -log_sigmoid(s) : -log_sigmoid(-s);
        for (std::size_t j = 0; j < d; ++j) {
            g_center[j] += coef * uo[j];
            g_ctx[p][j] += coef * center.u[j];
        }
    };
    for (auto id : batch.contexts) pair_term(id, true);
    for (auto id : batch.negatives) pair_term(id, false);

    backward_row(batch.center, center, g_center, params.u0, flow, spatial, params, cfg,
                 grads.u0, grads.wf, grads.ws);
    for (std::size_t p = 0; p < ctx_rows.size(); ++p)
        backward_row(ctx_rows[p], ctx_fwd[p], g_ctx[p], params.u0c, flow, spatial,
                     params, cfg, grads.u0c, grads.wf, grads.ws);

    for (const auto& [id, g] : grads.u0)
        for (double v : g)
            if (!std::isfinite(v))
                throw std::runtime_error("non-finite gradient for U0 row " + std::to_string(id));
    if (!std::isfinite(grads.loss))
        throw std::runtime_error("non-finite loss in batch centered at " +
                                 std::to_string(batch.center));
    return grads;
}

namespace {

void apply_gradients(ModelParams& params, const SkipgramGradients& grads, double lr,
                     std::vector<std::uint8_t>* touched) {
    const std::size_t d = params.dim();
    for (const auto& [id, g] : grads.u0) {
        double* row = params.u0.row(id);
        bool any = false;
        for (std::size_t j = 0; j < d; ++j) {
            row[j] -= lr * g[j];
            any |= (g[j] != 0.0);
        }
        if (any && touched) (*touched)[id] = 1;
    }
    for (const auto& [id, g] : grads.u0c) {
        double* row = params.u0c.row(id);
        for (std::size_t j = 0; j < d; ++j) row[j] -= lr * g[j];
    }
    for (std::size_t i = 0; i < grads.wf.data.size(); ++i)
        params.wf.data[i] -= lr * grads.wf.data[i];
    for (std::size_t i = 0; i < grads.ws.data.size(); ++i)
        params.ws.data[i] -= lr * grads.ws.data[i];
}

struct BatchStats {
    double loss_sum = 0.0;
    std::size_t batches = 0;
};

// Runs all skip-gram batches of one trajectory.
template <typename Apply>
void run_trajectory(const std::vector<std::uint32_t>& traj, const TrainConfig& cfg,
                    const NegativeSampler& sampler, std::mt19937_64& rng,
                    Apply&& apply_batch) {
    const std::size_t len = traj.size();
    if (len < 2) return;
    const auto m = static_cast<std::ptrdiff_t>(cfg.window);
    for (std::size_t t = 0; t < len; ++t) {
        SkipgramBatch batch;
        batch.center = traj[t];
        const auto ti = static_cast<std::ptrdiff_t>(t);
        for (std::ptrdiff_t j = ti - m; j <= ti + m; ++j) {
            if (j == ti || j < 0 || j >= static_cast<std::ptrdiff_t>(len)) continue;
            batch.contexts.push_back(traj[j]);
        }
        if (batch.contexts.empty()) continue;
        std::unordered_set<std::uint32_t> exclude(batch.contexts.begin(),
                                                  batch.contexts.end());
        exclude.insert(batch.center);
        batch.negatives = sampler.sample_excluding(cfg.negatives, exclude, rng);
        apply_batch(batch);
    }
}

}  // namespace

TrainResult train(const std::vector<std::vector<std::uint32_t>>& trajectories,
                  const NormalizedGraph& flow, const NormalizedGraph& spatial,
                  const LocationIndex& index, const TrainConfig& cfg) {
    cfg.validate();
    const std::size_t n = index.size();
    if (cfg.use_flow && flow.n != n)
        throw std::invalid_argument("flow graph size != index size");
    if (cfg.use_spatial && spatial.n != n)
        throw std::invalid_argument("spatial graph size != index size");

    TrainResult result;
    result.params = init_params(n, cfg);
    result.u0_grad_touched.assign(n, 0);
    const NegativeSampler sampler(index.visit_count);

    std::size_t positions = 0;
    for (const auto& t : trajectories)
        if (t.size() >= 2) positions += t.size();
    const double total_planned =
        std::max<double>(1.0, static_cast<double>(positions) * cfg.max_epochs);

    std::mt19937_64 epoch_rng(cfg.seed ^ 0x5DEECE66Dull);
    std::size_t processed = 0;
    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        std::vector<std::size_t> order(trajectories.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), epoch_rng);

        BatchStats stats;
        if (cfg.threads == 1) {
            std::mt19937_64 rng(cfg.seed ^ (0x9E3779B9ull * (epoch + 1)));
            for (std::size_t idx : order) {
                run_trajectory(trajectories[idx], cfg, sampler, rng, [&](const SkipgramBatch& b) {
                    const double lr = std::max(
                        cfg.min_learning_rate,
                        cfg.learning_rate * (1.0 - static_cast<double>(processed) / total_planned));
                    const auto grads =
                        skipgram_gradients(b, result.params, flow, spatial, cfg);
                    apply_gradients(result.params, grads, lr, &result.u0_grad_touched);
                    stats.loss_sum += grads.loss;
                    ++stats.batches;
                    ++processed;
                });
            }
        } else {
            // Lock-free throughput mode: overlapping updates may interleave.
            double loss_sum = 0.0;
            std::int64_t batches = 0, done = 0;
            const std::size_t base_processed = processed;
            #pragma omp parallel for schedule(dynamic, 16) \
                reduction(+ : loss_sum, batches, done) num_threads(cfg.threads)
            for (std::int64_t k = 0; k < static_cast<std::int64_t>(order.size()); ++k) {
                std::mt19937_64 rng(cfg.seed ^ (0x9E3779B9ull * (epoch + 1)) ^
                                    (0xBF58476D1CE4E5B9ull * (order[k] + 1)));
                run_trajectory(trajectories[order[k]], cfg, sampler, rng,
                               [&](const SkipgramBatch& b) {
                    const double lr = std::max(
                        cfg.min_learning_rate,
                        cfg.learning_rate *
                            (1.0 - (base_processed + static_cast<double>(done)) / total_planned));
                    const auto grads =
                        skipgram_gradients(b, result.params, flow, spatial, cfg);
                    apply_gradients(result.params, grads, lr, &result.u0_grad_touched);
                    loss_sum += grads.loss;
                    ++batches;
                    ++done;
                });
            }
            stats.loss_sum = loss_sum;
            stats.batches = static_cast<std::size_t>(batches);
            processed = base_processed + static_cast<std::size_t>(done);
        }

        const double mean_loss =
            stats.batches ? stats.loss_sum / static_cast<double>(stats.batches) : 0.0;
        if (!std::isfinite(mean_loss))
            throw std::runtime_error("non-finite epoch loss at epoch " + std::to_string(epoch));
        result.epoch_mean_loss.push_back(mean_loss);
        result.epochs_run = epoch + 1;
        if (stats.batches == 0) break;  // nothing to learn from
        if (epoch > 0) {
            const double prev = result.epoch_mean_loss[epoch - 1];
            const double rel = std::abs(prev - mean_loss) / std::max(std::abs(prev), 1e-12);
            if (rel < cfg.tolerance) break;
        }
    }

    result.embeddings =
        embed_all(result.params, flow, spatial, cfg, false, cfg.threads > 1);
    for (double v : result.embeddings.data)
        if (!std::isfinite(v)) throw std::runtime_error("non-finite embedding after training");
    return result;
}

double full_softmax_log_likelihood(
    const std::vector<std::vector<std::uint32_t>>& trajectories,
    const ModelParams& params, const NormalizedGraph& flow,
    const NormalizedGraph& spatial, const TrainConfig& cfg) {
    const std::size_t n = params.n();
    if (n > 1000)
        throw std::invalid_argument("full softmax oracle is guarded to N <= 1000");
    const Matrix u = embed_all(params, flow, spatial, cfg, false);
    const Matrix uc = embed_all(params, flow, spatial, cfg, true);
    const std::size_t d = params.dim();

    double ll = 0.0;
    std::vector<double> scores(n);
    const auto m = static_cast<std::ptrdiff_t>(cfg.window);
    for (const auto& traj : trajectories) {
        const auto len = static_cast<std::ptrdiff_t>(traj.size());
        for (std::ptrdiff_t t = 0; t < len; ++t) {
            bool any = false;
            for (std::ptrdiff_t j = t - m; j <= t + m; ++j)
                any |= (j != t && j >= 0 && j < len);
            if (!any) continue;
            const double* ucen = u.row(traj[t]);
            double mx = -1e300;
            for (std::size_t l = 0; l < n; ++l) {
                double s = 0.0;
                const double* ctx = uc.row(l);
                for (std::size_t k = 0; k < d; ++k) s += ucen[k] * ctx[k];
                scores[l] = s;
                mx = std::max(mx, s);
            }
            double z = 0.0;
            for (std::size_t l = 0; l < n; ++l) z += std::exp(scores[l] - mx);
            const double lse = mx + std::log(z);
            for (std::ptrdiff_t j = t - m; j <= t + m; ++j) {
                if (j == t || j < 0 || j >= len) continue;
                ll += scores[traj[j]] - lse;
            }
        }
    }
    return ll;
}

}  // namespace l2v
