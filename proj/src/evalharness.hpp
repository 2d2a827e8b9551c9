#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "apselect.hpp"
#include "dae.hpp"
#include "flops.hpp"
#include "gdsolver.hpp"
#include "nn/train.hpp"
#include "phasesim.hpp"
#include "scenario.hpp"

namespace phasepos::eval {

using scenario::ScenarioConfig;

/// Sorted (error, cumulative fraction) pairs; throws on empty input.
std::vector<std::pair<double, double>> ecdf(std::vector<double> errors);

/// Nearest-rank percentile (no interpolation): the ceil(p/100 * S)-th order
/// statistic. `sorted` must be ascending; p in (0, 100].
double percentile_nearest_rank(const std::vector<double>& sorted, double p);

struct StrategyResult {
    std::string name;
    std::vector<double> errors_m;  // per sample, meters
    double mean_m = 0.0;
    double p95_m = 0.0;
    double p99_m = 0.0;
};

struct EvalReport {
    std::uint64_t scenario_hash = 0;
    double sigma_train = 0.0;
    double sigma_test = 0.0;
    std::size_t samples = 0;
    double overall_accuracy_pct = 0.0;  // all-branch DAE accuracy on the test set
    flops::FlopReport flop_summary;
    std::vector<StrategyResult> strategies;

    const StrategyResult& strategy(const std::string& name) const;
};

/// Evaluates proposed, random, max_snr, no_selection and best_achievable on
/// the same test rows with identical per-sample randomness. The per-pair
/// ground-truth error vectors (gated DAE + solver) back both the proposed
/// choice's realized error and the best_achievable oracle.
EvalReport run_benchmarks(const ScenarioConfig& cfg, double sigma_train,
                          const nn::MlpModel& dae_model,
                          const nn::MlpModel& selector_model, const gd::GdConfig& gdc,
                          const phasesim::Dataset& test_set, unsigned threads = 1,
                          bool full_features = false);

struct MatrixOptions {
    std::size_t train_samples = 30000;
    std::size_t test_samples = 10000;
    std::size_t dae_neurons = 150;
    nn::TrainConfig train;
    gd::GdConfig gd;
    std::uint64_t data_seed = 1;
    unsigned threads = 1;
};

struct MatrixEntry {
    double sigma_train = 0.0;
    double sigma_test = 0.0;
    double overall_accuracy_pct = 0.0;
    double mean_m = 0.0;
    double p95_m = 0.0;
    double p99_m = 0.0;
    std::size_t samples = 0;
};

/// Trains one DAE per sigma_train value and evaluates every sigma_test
/// combination: all-branch accuracy and the positioning error of the
/// all-ambiguity solve.
std::vector<MatrixEntry> run_matrix(const ScenarioConfig& base,
                                    const std::vector<double>& sigma_train,
                                    const std::vector<double>& sigma_test,
                                    const MatrixOptions& opts);

/// All-branch estimate accuracy plus all-ambiguity positioning errors for a
/// trained DAE on one test set.
MatrixEntry evaluate_dae(const ScenarioConfig& test_cfg, const nn::MlpModel& dae_model,
                         const gd::GdConfig& gdc, const phasesim::Dataset& test_set,
                         unsigned threads);

// Report files: a '#'-meta header plus one TSV row per strategy (meters).
// ECDF point files go next to the summary, one per strategy.
void write_benchmark_report(const EvalReport& r, const std::string& path_prefix);
EvalReport read_benchmark_report(const std::string& summary_path);

void write_matrix_report(const std::vector<MatrixEntry>& entries,
                         const std::string& path);

}  // namespace phasepos::eval
