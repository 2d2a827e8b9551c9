#include "nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>

#include "kernels/kernels.hpp"
#include "util/rng.hpp"
#include "util/thread_pool.hpp"

namespace phasepos::nn {

namespace {

using util::ThreadPool;

void pgemm_nt(ThreadPool& pool, const double* a, const double* b, double* c,
              std::size_t m, std::size_t n, std::size_t k) {
    pool.run_chunks(m, [&](std::size_t r0, std::size_t r1) {
        kernels::gemm_nt(a + r0 * k, b, c + r0 * n, r1 - r0, n, k);
    });
}

// C (m x n) += A (m x k) * B (k x n), partitioned over rows of C
void pgemm_nn_acc(ThreadPool& pool, const double* a, const double* b, double* c,
                  std::size_t m, std::size_t n, std::size_t k) {
    pool.run_chunks(m, [&](std::size_t r0, std::size_t r1) {
        kernels::gemm_nn_acc(a + r0 * k, b, c + r0 * n, r1 - r0, n, k);
    });
}

// C (m x n) += A (k x m)^T * B (k x n), partitioned over rows of C; each row
// accumulates in ascending k order regardless of the partition.
void pgemm_tn_acc(ThreadPool& pool, const double* a, const double* b, double* c,
                  std::size_t m, std::size_t n, std::size_t k) {
    pool.run_chunks(m, [&](std::size_t r0, std::size_t r1) {
        for (std::size_t i = r0; i < r1; ++i)
            for (std::size_t p = 0; p < k; ++p)
                kernels::axpy(a[p * m + i], b + p * n, c + i * n, n);
    });
}

struct StackActs {
    std::vector<std::vector<double>> outs;  // post-activation, n x layer.out each
};

void forward_stack(ThreadPool& pool, const std::vector<DenseLayer>& layers,
                   const double* input, std::size_t n, StackActs& acts) {
    acts.outs.resize(layers.size());
    const double* cur = input;
    for (std::size_t li = 0; li < layers.size(); ++li) {
        const DenseLayer& l = layers[li];
        auto& out = acts.outs[li];
        out.assign(n * l.out, 0.0);
        pgemm_nt(pool, cur, l.w.data(), out.data(), n, l.out, l.in);
        pool.run_chunks(n, [&](std::size_t r0, std::size_t r1) {
            kernels::add_row(out.data() + r0 * l.out, r1 - r0, l.out, l.b.data());
            switch (l.act) {
                case Activation::linear:
                    break;
                case Activation::relu:
                    kernels::relu(out.data() + r0 * l.out, (r1 - r0) * l.out);
                    break;
                case Activation::softmax:
                    for (std::size_t r = r0; r < r1; ++r) {
                        double* row = out.data() + r * l.out;
                        double mx = row[0];
                        for (std::size_t j = 1; j < l.out; ++j) mx = std::max(mx, row[j]);
                        double sum = 0.0;
                        for (std::size_t j = 0; j < l.out; ++j) {
                            row[j] = std::exp(row[j] - mx);
                            sum += row[j];
                        }
                        for (std::size_t j = 0; j < l.out; ++j) row[j] /= sum;
                    }
                    break;
            }
        });
        cur = out.data();
    }
}

// g: on entry, gradient w.r.t. the stack output (pre-activation if the last
// layer is softmax fed by cross-entropy, post-activation otherwise). On
// return d_input holds the gradient w.r.t. the stack input if requested.
void backward_stack(ThreadPool& pool, const std::vector<DenseLayer>& layers,
                    const double* input, std::size_t n, const StackActs& acts,
                    std::vector<double>& g, std::vector<LayerGrads>& grads,
                    std::vector<double>* d_input) {
    for (std::size_t li = layers.size(); li-- > 0;) {
        const DenseLayer& l = layers[li];
        const bool softmax_head = l.act == Activation::softmax;
        if (!softmax_head && l.act == Activation::relu) {
            const auto& y = acts.outs[li];
            pool.run_chunks(n, [&](std::size_t r0, std::size_t r1) {
                kernels::relu_backward(y.data() + r0 * l.out, g.data() + r0 * l.out,
                                       (r1 - r0) * l.out);
            });
        }
        const double* prev = li == 0 ? input : acts.outs[li - 1].data();
        // dW += g^T * prev
        pgemm_tn_acc(pool, g.data(), prev, grads[li].w.data(), l.out, l.in, n);
        // db += column sums of g
        pool.run_chunks(l.out, [&](std::size_t j0, std::size_t j1) {
            for (std::size_t j = j0; j < j1; ++j) {
                double s = 0.0;
                for (std::size_t r = 0; r < n; ++r) s += g[r * l.out + j];
                grads[li].b[j] += s;
            }
        });
        if (li == 0 && !d_input) break;
        std::vector<double> gprev(n * l.in, 0.0);
        pgemm_nn_acc(pool, g.data(), l.w.data(), gprev.data(), n, l.in, l.out);
        if (li == 0) {
            *d_input = std::move(gprev);
            break;
        }
        g = std::move(gprev);
    }
}

struct Heads {
    // views over model heads: branched -> branches, plain -> the trunk
    static std::size_t count(const MlpModel& m) {
        return m.topology == Topology::plain ? 1 : m.branch_count();
    }
};

void check_conformance(const MlpModel& model, const TrainData& data, Loss loss) {
    if (data.n == 0) throw std::invalid_argument("train: empty dataset");
    if (data.in_width != model.input_width)
        throw std::invalid_argument("train: input width mismatch");
    if (data.inputs.size() != data.n * data.in_width)
        throw std::invalid_argument("train: input buffer size mismatch");
    if (loss == Loss::mse) {
        if (model.topology != Topology::plain)
            throw std::invalid_argument("train: mse loss expects a plain model");
        if (model.trunk.back().act == Activation::softmax)
            throw std::invalid_argument("train: mse loss over a softmax head");
        if (data.target_width != model.output_width() ||
            data.targets.size() != data.n * data.target_width)
            throw std::invalid_argument("train: target buffer mismatch");
    } else {
        std::size_t heads = Heads::count(model);
        if (data.labels.size() != data.n * heads)
            throw std::invalid_argument("train: label buffer mismatch");
        if (model.topology == Topology::plain) {
            if (model.trunk.back().act != Activation::softmax)
                throw std::invalid_argument("train: cross-entropy head must be softmax");
        } else {
            for (const auto& br : model.branches)
                if (br.back().act != Activation::softmax)
                    throw std::invalid_argument("train: cross-entropy head must be softmax");
        }
    }
}

struct Gathered {
    std::size_t n = 0;
    std::vector<double> x;        // standardized inputs
    std::vector<double> targets;  // mse
    std::vector<int> labels;      // ce
};

void gather(const MlpModel& model, const TrainData& data,
            const std::vector<std::size_t>& idx, std::size_t b0, std::size_t b1,
            Loss loss, Gathered& g) {
    const std::size_t n = b1 - b0;
    const std::size_t iw = data.in_width;
    g.n = n;
    g.x.resize(n * iw);
    for (std::size_t r = 0; r < n; ++r)
        standardize_input(model, {data.inputs.data() + idx[b0 + r] * iw, iw},
                          g.x.data() + r * iw);
    if (loss == Loss::mse) {
        const std::size_t tw = data.target_width;
        g.targets.resize(n * tw);
        for (std::size_t r = 0; r < n; ++r)
            std::memcpy(g.targets.data() + r * tw,
                        data.targets.data() + idx[b0 + r] * tw, tw * sizeof(double));
    } else {
        const std::size_t heads = data.labels.size() / data.n;
        g.labels.resize(n * heads);
        for (std::size_t r = 0; r < n; ++r)
            std::memcpy(g.labels.data() + r * heads,
                        data.labels.data() + idx[b0 + r] * heads, heads * sizeof(int));
    }
}

double forward_loss(ThreadPool& pool, const MlpModel& model, const Gathered& g,
                    Loss loss, StackActs& trunk_acts, std::vector<StackActs>& br_acts) {
    forward_stack(pool, model.trunk, g.x.data(), g.n, trunk_acts);
    const double* trunk_out = trunk_acts.outs.back().data();
    double total = 0.0;
    if (loss == Loss::mse) {
        const std::size_t tw = model.output_width();
        total = kernels::sum_sq_diff(trunk_out, g.targets.data(), g.n * tw) /
                static_cast<double>(g.n);
        return total;
    }
    if (model.topology == Topology::plain) {
        const std::size_t q = model.output_width();
        for (std::size_t r = 0; r < g.n; ++r) {
            double p = trunk_out[r * q + g.labels[r]];
            total -= std::log(std::max(p, 1e-300));
        }
        return total / static_cast<double>(g.n);
    }
    br_acts.resize(model.branch_count());
    const std::size_t heads = model.branch_count();
    for (std::size_t b = 0; b < heads; ++b) {
        forward_stack(pool, model.branches[b], trunk_out, g.n, br_acts[b]);
        const auto& probs = br_acts[b].outs.back();
        const std::size_t q = model.branches[b].back().out;
        for (std::size_t r = 0; r < g.n; ++r) {
            double p = probs[r * q + g.labels[r * heads + b]];
            total -= std::log(std::max(p, 1e-300));
        }
    }
    return total / static_cast<double>(g.n);
}

double gradient_pass(ThreadPool& pool, const MlpModel& model, const Gathered& g,
                     Loss loss, ModelGrads& grads) {
    StackActs trunk_acts;
    std::vector<StackActs> br_acts;
    double total = forward_loss(pool, model, g, loss, trunk_acts, br_acts);
    if (!std::isfinite(total)) return total;

    const double inv_n = 1.0 / static_cast<double>(g.n);
    if (loss == Loss::mse) {
        const std::size_t tw = model.output_width();
        std::vector<double> gout(g.n * tw);
        const auto& pred = trunk_acts.outs.back();
        for (std::size_t i = 0; i < gout.size(); ++i)
            gout[i] = 2.0 * (pred[i] - g.targets[i]) * inv_n;
        backward_stack(pool, model.trunk, g.x.data(), g.n, trunk_acts, gout,
                       grads.trunk, nullptr);
        return total;
    }
    if (model.topology == Topology::plain) {
        const std::size_t q = model.output_width();
        std::vector<double> gout(trunk_acts.outs.back());
        for (auto& v : gout) v *= inv_n;
        for (std::size_t r = 0; r < g.n; ++r) gout[r * q + g.labels[r]] -= inv_n;
        backward_stack(pool, model.trunk, g.x.data(), g.n, trunk_acts, gout,
                       grads.trunk, nullptr);
        return total;
    }
    const std::size_t heads = model.branch_count();
    const double* trunk_out = trunk_acts.outs.back().data();
    std::vector<double> d_trunk_out(g.n * model.trunk_output_width(), 0.0);
    for (std::size_t b = 0; b < heads; ++b) {
        const std::size_t q = model.branches[b].back().out;
        std::vector<double> gout(br_acts[b].outs.back());
        for (auto& v : gout) v *= inv_n;
        for (std::size_t r = 0; r < g.n; ++r)
            gout[r * q + g.labels[r * heads + b]] -= inv_n;
        std::vector<double> d_in;
        backward_stack(pool, model.branches[b], trunk_out, g.n, br_acts[b], gout,
                       grads.branches[b], &d_in);
        kernels::axpy(1.0, d_in.data(), d_trunk_out.data(), d_trunk_out.size());
    }
    backward_stack(pool, model.trunk, g.x.data(), g.n, trunk_acts, d_trunk_out,
                   grads.trunk, nullptr);
    return total;
}

struct AdamState {
    std::vector<LayerGrads> m_trunk, v_trunk;
    std::vector<std::vector<LayerGrads>> m_br, v_br;
    std::uint64_t t = 0;
};

std::vector<LayerGrads> zeros_for(const std::vector<DenseLayer>& layers) {
    std::vector<LayerGrads> out;
    for (const auto& l : layers)
        out.push_back({std::vector<double>(l.w.size(), 0.0),
                       std::vector<double>(l.b.size(), 0.0)});
    return out;
}

void zero(std::vector<LayerGrads>& g) {
    for (auto& lg : g) {
        std::fill(lg.w.begin(), lg.w.end(), 0.0);
        std::fill(lg.b.begin(), lg.b.end(), 0.0);
    }
}

void adam_apply(std::vector<DenseLayer>& layers, std::vector<LayerGrads>& g,
                std::vector<LayerGrads>& m, std::vector<LayerGrads>& v,
                const TrainConfig& cfg, double lr, double c1, double c2) {
    for (std::size_t li = 0; li < layers.size(); ++li) {
        kernels::adam_update(layers[li].w.data(), m[li].w.data(), v[li].w.data(),
                             g[li].w.data(), layers[li].w.size(), lr, cfg.beta1,
                             cfg.beta2, cfg.adam_eps, c1, c2);
        kernels::adam_update(layers[li].b.data(), m[li].b.data(), v[li].b.data(),
                             g[li].b.data(), layers[li].b.size(), lr, cfg.beta1,
                             cfg.beta2, cfg.adam_eps, c1, c2);
    }
}

void snapshot(const MlpModel& m, std::vector<std::vector<double>>& store) {
    store.clear();
    for (const auto& l : m.trunk) {
        store.push_back(l.w);
        store.push_back(l.b);
    }
    for (const auto& br : m.branches)
        for (const auto& l : br) {
            store.push_back(l.w);
            store.push_back(l.b);
        }
}

void restore(MlpModel& m, const std::vector<std::vector<double>>& store) {
    std::size_t i = 0;
    for (auto& l : m.trunk) {
        l.w = store[i++];
        l.b = store[i++];
    }
    for (auto& br : m.branches)
        for (auto& l : br) {
            l.w = store[i++];
            l.b = store[i++];
        }
}

}  // namespace

ModelGrads ModelGrads::zeros_like(const MlpModel& m) {
    ModelGrads g;
    g.trunk = zeros_for(m.trunk);
    for (const auto& br : m.branches) g.branches.push_back(zeros_for(br));
    return g;
}

double batch_loss(const MlpModel& model, const TrainData& data,
                  const std::vector<std::size_t>& idx, Loss loss) {
    check_conformance(model, data, loss);
    ThreadPool pool(1);
    constexpr std::size_t kChunk = 1024;
    double total = 0.0;
    Gathered g;
    StackActs trunk_acts;
    std::vector<StackActs> br_acts;
    for (std::size_t b0 = 0; b0 < idx.size(); b0 += kChunk) {
        std::size_t b1 = std::min(idx.size(), b0 + kChunk);
        gather(model, data, idx, b0, b1, loss, g);
        total += forward_loss(pool, model, g, loss, trunk_acts, br_acts) *
                 static_cast<double>(b1 - b0);
    }
    return total / static_cast<double>(idx.size());
}

double batch_gradient(const MlpModel& model, const TrainData& data,
                      const std::vector<std::size_t>& idx, Loss loss,
                      ModelGrads& grads, unsigned threads) {
    check_conformance(model, data, loss);
    ThreadPool pool(threads);
    Gathered g;
    gather(model, data, idx, 0, idx.size(), loss, g);
    zero(grads.trunk);
    for (auto& br : grads.branches) zero(br);
    return gradient_pass(pool, model, g, loss, grads);
}

TrainResult train(MlpModel& model, const TrainData& data, const TrainConfig& cfg) {
    model.validate();
    check_conformance(model, data, cfg.loss);
    if (cfg.batch_size == 0 || cfg.epochs == 0)
        throw std::invalid_argument("train: batch size and epochs must be positive");

    // deterministic validation split
    std::vector<std::size_t> order(data.n);
    for (std::size_t i = 0; i < data.n; ++i) order[i] = i;
    {
        rng::Stream s(cfg.seed, rng::stream_id("val-split"));
        for (std::size_t i = data.n; i > 1; --i)
            std::swap(order[i - 1], order[static_cast<std::size_t>(s.uniform() * i)]);
    }
    std::size_t val_n = static_cast<std::size_t>(cfg.validation_fraction * data.n);
    if (val_n >= data.n) val_n = data.n - 1;
    std::vector<std::size_t> train_idx(order.begin(), order.end() - val_n);
    std::vector<std::size_t> val_idx(order.end() - val_n, order.end());

    if (cfg.standardize_inputs) {
        model.feat_mean.assign(model.input_width, 0.0);
        model.feat_std.assign(model.input_width, 0.0);
        for (std::size_t r : train_idx)
            for (std::size_t j = 0; j < model.input_width; ++j)
                model.feat_mean[j] += data.inputs[r * model.input_width + j];
        for (auto& v : model.feat_mean) v /= static_cast<double>(train_idx.size());
        for (std::size_t r : train_idx)
            for (std::size_t j = 0; j < model.input_width; ++j) {
                double d = data.inputs[r * model.input_width + j] - model.feat_mean[j];
                model.feat_std[j] += d * d;
            }
        for (auto& v : model.feat_std)
            v = std::max(std::sqrt(v / static_cast<double>(train_idx.size())), 1e-12);
    } else {
        model.feat_mean.clear();
        model.feat_std.clear();
    }

    init_weights(model, cfg.seed);

    ThreadPool pool(cfg.threads);
    ModelGrads grads = ModelGrads::zeros_like(model);
    AdamState adam;
    adam.m_trunk = zeros_for(model.trunk);
    adam.v_trunk = zeros_for(model.trunk);
    for (const auto& br : model.branches) {
        adam.m_br.push_back(zeros_for(br));
        adam.v_br.push_back(zeros_for(br));
    }

    TrainResult result;
    result.best_val_loss = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> best_weights;
    std::size_t stale_epochs = 0;
    double lr = cfg.learning_rate;
    Gathered g;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng::Stream s(cfg.seed, rng::stream_id("shuffle", epoch + 1));
        for (std::size_t i = train_idx.size(); i > 1; --i)
            std::swap(train_idx[i - 1], train_idx[static_cast<std::size_t>(s.uniform() * i)]);

        double epoch_loss = 0.0;
        for (std::size_t b0 = 0; b0 < train_idx.size(); b0 += cfg.batch_size) {
            std::size_t b1 = std::min(train_idx.size(), b0 + cfg.batch_size);
            gather(model, data, train_idx, b0, b1, cfg.loss, g);
            zero(grads.trunk);
            for (auto& br : grads.branches) zero(br);
            double loss = gradient_pass(pool, model, g, cfg.loss, grads);
            if (!std::isfinite(loss))
                throw std::runtime_error(
                    "train: non-finite loss at epoch " + std::to_string(epoch) +
                    ", batch " + std::to_string(b0 / cfg.batch_size) +
                    " (check learning rate and input scaling)");
            epoch_loss += loss * static_cast<double>(b1 - b0);

            ++adam.t;
            double c1 = 1.0 / (1.0 - std::pow(cfg.beta1, static_cast<double>(adam.t)));
            double c2 = 1.0 / (1.0 - std::pow(cfg.beta2, static_cast<double>(adam.t)));
            adam_apply(model.trunk, grads.trunk, adam.m_trunk, adam.v_trunk, cfg, lr,
                       c1, c2);
            for (std::size_t b = 0; b < model.branches.size(); ++b)
                adam_apply(model.branches[b], grads.branches[b], adam.m_br[b],
                           adam.v_br[b], cfg, lr, c1, c2);
        }
        result.train_loss.push_back(epoch_loss / static_cast<double>(train_idx.size()));

        if (!val_idx.empty()) {
            double vl = batch_loss(model, data, val_idx, cfg.loss);
            result.val_loss.push_back(vl);
            if (vl < result.best_val_loss) {
                result.best_val_loss = vl;
                stale_epochs = 0;
                if (cfg.early_stop_patience > 0) snapshot(model, best_weights);
            } else if (cfg.early_stop_patience > 0 &&
                       ++stale_epochs >= cfg.early_stop_patience) {
                result.epochs_run = epoch + 1;
                restore(model, best_weights);
                model.trained = true;
                return result;
            }
        }
        lr *= cfg.lr_decay;
        result.epochs_run = epoch + 1;
    }
    if (cfg.early_stop_patience > 0 && !best_weights.empty()) restore(model, best_weights);
    model.trained = true;
    return result;
}

}  // namespace phasepos::nn
