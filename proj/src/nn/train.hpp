#pragma once

#include <cstdint>
#include <vector>

#include "nn/mlp.hpp"

namespace phasepos::nn {

enum class Loss : std::uint8_t { mse = 0, cross_entropy_per_head = 1 };

struct TrainConfig {
    std::size_t batch_size = 128;
    double learning_rate = 1e-3;
    double lr_decay = 1.0;  // per-epoch multiplier
    std::size_t epochs = 20;
    Loss loss = Loss::mse;
    double validation_fraction = 0.2;
    std::size_t early_stop_patience = 0;  // 0 disables early stopping
    std::uint64_t seed = 1;
    unsigned threads = 1;
    bool standardize_inputs = true;
    // Adam
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
};

/// Supervised data. `targets` (n x target_width) feeds the MSE loss;
/// `labels` (n x head_count, row-major class indices) feeds per-head
/// cross-entropy. Only the buffer matching the loss needs to be filled.
struct TrainData {
    std::size_t n = 0;
    std::size_t in_width = 0;
    std::vector<double> inputs;
    std::size_t target_width = 0;
    std::vector<double> targets;
    std::vector<int> labels;
};

struct TrainResult {
    std::vector<double> train_loss;  // one entry per epoch run
    std::vector<double> val_loss;
    std::size_t epochs_run = 0;
    double best_val_loss = 0.0;
};

/// Mini-batch Adam training. Deterministic for a fixed seed; worker count
/// never changes results because all parallel loops partition output rows.
/// Throws on NaN loss with a diagnostic message.
TrainResult train(MlpModel& model, const TrainData& data, const TrainConfig& cfg);

// Exposed for the finite-difference gradient oracle and for evaluation.

struct LayerGrads {
    std::vector<double> w;
    std::vector<double> b;
};

struct ModelGrads {
    std::vector<LayerGrads> trunk;
    std::vector<std::vector<LayerGrads>> branches;

    static ModelGrads zeros_like(const MlpModel& m);
};

/// Mean batch loss over the index subset.
double batch_loss(const MlpModel& model, const TrainData& data,
                  const std::vector<std::size_t>& idx, Loss loss);

/// Mean batch loss and its gradient for every parameter.
double batch_gradient(const MlpModel& model, const TrainData& data,
                      const std::vector<std::size_t>& idx, Loss loss,
                      ModelGrads& grads, unsigned threads = 1);

}  // namespace phasepos::nn
