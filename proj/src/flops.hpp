#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nn/mlp.hpp"
#include "scenario.hpp"

namespace phasepos::flops {

/// Dense layer cost: 2 * n_out * n_in (one multiply and one add per weight).
std::uint64_t dense_layer_flops(std::uint64_t n_in, std::uint64_t n_out);

/// Pair selector: 2A(20A + 8I + eta).
std::uint64_t aps_flops(std::uint64_t A, std::uint64_t I, std::uint64_t eta);

/// Ambiguity estimator: D^2(4|J| + 16) + D(2Q + 4I). Q may be fractional in
/// gated mode (the class count is averaged over pairs).
std::uint64_t dae_flops(std::uint64_t D, std::uint64_t j_size, double q_effective,
                        std::uint64_t I);

/// Position solver: T(18|J| + 10).
std::uint64_t gd_flops(std::uint64_t T, std::uint64_t j_size);

struct FlopParams {
    std::uint64_t dae_neurons = 150;    // D
    std::uint64_t aps_neurons = 100;    // A
    std::uint64_t gd_iterations = 500;  // T
    std::uint64_t ap_count = 9;         // I
    double total_classes = 334.0;       // Q over all pairs

    std::uint64_t pair_count() const {  // eta = C(I-1, 2)
        return (ap_count - 1) * (ap_count - 2) / 2;
    }
};

struct FlopReport {
    FlopParams params;
    std::uint64_t c_aps = 0;
    std::uint64_t c_dae_all = 0;
    std::uint64_t c_gd_all = 0;
    std::uint64_t c_hi_all = 0;
    std::uint64_t c_dae_two = 0;
    std::uint64_t c_gd_two = 0;
    std::uint64_t c_hi_two = 0;
    std::uint64_t total_two_with_aps = 0;
    double reduction_percent = 0.0;  // 100 (1 - (c_hi_two + c_aps) / c_hi_all)
};

FlopReport reduction_report(const FlopParams& p);

/// Report with Q and I taken from a concrete scenario.
FlopReport reduction_report_for(const scenario::ScenarioConfig& cfg,
                                std::uint64_t dae_neurons, std::uint64_t aps_neurons,
                                std::uint64_t gd_iterations);

std::string format_table(const FlopReport& r);
std::string format_tsv(const FlopReport& r);

// ---------------------------------------------------------------------------
// Instrumented operation counting: the reference kernels and the solver step
// run on a counting scalar, so the measured counts reflect the arithmetic the
// implementation actually performs.

struct OpCounts {
    std::uint64_t add = 0;  // additions and subtractions
    std::uint64_t mul = 0;
    std::uint64_t div = 0;
    std::uint64_t sqrt_ops = 0;
    std::uint64_t exp_ops = 0;  // activation transcendentals, counted separately

    std::uint64_t arithmetic_total() const { return add + mul + div + sqrt_ops; }
};

/// Counting context for the current thread. Only one may be active at a
/// time; constructing a second throws, and counted arithmetic outside any
/// scope throws std::logic_error ("instrumentation disabled").
class CountingScope {
public:
    CountingScope();
    ~CountingScope();
    CountingScope(const CountingScope&) = delete;
    CountingScope& operator=(const CountingScope&) = delete;

    const OpCounts& counts() const { return counts_; }
    static bool active();
    static OpCounts& current();

private:
    OpCounts counts_;
};

/// y = W x + b on a random layer of the given shape.
OpCounts measured_dense_forward(std::size_t n_in, std::size_t n_out,
                                std::uint64_t seed);

/// Forward pass through the model's dense layers (standardization excluded).
/// Activation costs are counted only when count_activations is set; the
/// closed forms above exclude them.
OpCounts measured_mlp_forward(const nn::MlpModel& model, const std::vector<double>& x,
                              const std::vector<int>* branches = nullptr,
                              bool count_activations = false);

/// Runs `iterations` solver steps from `start` and returns the op counts.
OpCounts measured_gd_iterations(const std::vector<scenario::Vec2>& aps,
                                const std::vector<int>& j_set, int reference,
                                const std::vector<double>& dhat, scenario::Vec2 start,
                                std::size_t iterations, double learning_rate);

}  // namespace phasepos::flops
