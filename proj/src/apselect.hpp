#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dae.hpp"
#include "gdsolver.hpp"
#include "nn/mlp.hpp"
#include "nn/train.hpp"
#include "phasesim.hpp"
#include "scenario.hpp"
#include "util/rng.hpp"

namespace phasepos::apselect {

using phasesim::DatasetRow;
using scenario::ScenarioConfig;

// Unordered ambiguity pairs (a, b), 1 <= a < b <= I-1, in lexicographic
// order. eta = C(I-1, 2).
std::size_t pair_count(int ap_count);
std::pair<int, int> pair_at(int ap_count, std::size_t index);
std::size_t pair_index(int ap_count, int a, int b);

/// AP index of pair slot m (skips the reference), and its inverse.
int ap_of_pair(int m, int ref_index);
int pair_of_ap(int ap_index, int ref_index);

/// Per-AP feature block, horizontally concatenated over APs in index order.
/// Subset width 8: padded delta, SNR, distance to reference, sin/cos of the
/// angle to the reference, normalized closest-neighbor index, sin/cos of the
/// angle to the closest neighbor. Full width 11 appends the furthest-AP
/// triple. Angles are measured counterclockwise from +x; the reference AP's
/// own angle-to-reference is 0 by convention; index ties break low.
std::size_t feature_width(bool full_set);
std::vector<double> extract_features(const ScenarioConfig& cfg, const DatasetRow& row,
                                     bool full_set = false);

/// Widths 8I -> A -> 2A -> 4A -> 2A -> A -> eta. Activations are linear by
/// default (a deliberately linear net: see docs); relu_hidden switches the
/// hidden layers to ReLU.
nn::MlpModel build_selector_model(std::size_t input_width, std::size_t eta,
                                  std::size_t neurons, bool relu_hidden = false);

/// Ground-truth positioning error for every pair, meters, pair-map order.
struct PairErrorVector {
    std::vector<double> errors_m;
    std::vector<std::uint8_t> sentinel;  // 1 where the solver failed

    std::size_t argmin() const;
};

/// Positioning error of the sentinel rows: the area diagonal.
double sentinel_error(const ScenarioConfig& cfg);

/// Estimator abstraction so labels can come from the gated DAE or, in
/// oracle tests, from ground truth: returns (dz_a, dz_b) for pair (a, b).
using PairEstimator = std::function<std::pair<int, int>(int a, int b)>;

PairErrorVector label_pairs_with(const ScenarioConfig& cfg, const gd::GdConfig& gdc,
                                 const DatasetRow& row, const PairEstimator& est);

/// Labels from the gated DAE: one trunk pass, then per-pair branch heads.
PairErrorVector label_pairs(const ScenarioConfig& cfg,
                            const scenario::AmbiguityLabelSpace& space,
                            const nn::MlpModel& dae_model, const gd::GdConfig& gdc,
                            const DatasetRow& row);

/// argmin over the predicted error vector; ties pick the lexicographically
/// smaller pair. Model outputs are in the trained (log1p) scale, which is
/// monotone, so the argmin is unchanged.
std::pair<int, int> select_pair(const nn::MlpModel& selector,
                                const std::vector<double>& features, int ap_count);

enum class Strategy { random, max_snr, no_selection, best_achievable };
Strategy strategy_from_name(const std::string& name);
const char* strategy_name(Strategy s);

/// Pair choice of the reference strategies; `all` marks the no-selection
/// token (all I-1 ambiguities). best_achievable requires the truth vector;
/// random requires a stream.
struct Selection {
    bool all = false;
    int a = 0;
    int b = 0;
};
Selection baseline_select(Strategy s, const ScenarioConfig& cfg, const DatasetRow& row,
                          const PairErrorVector* truth, rng::Stream* stream);

/// Selector training tensors: features plus log1p-compressed error targets
/// (raw meters when log_compress is off).
nn::TrainData make_selector_training_data(const ScenarioConfig& cfg,
                                          const phasesim::Dataset& ds,
                                          const std::vector<PairErrorVector>& labels,
                                          bool full_features = false,
                                          bool log_compress = true);

/// Label cache, keyed by the scenario and DAE model fingerprints so stale
/// labels are rejected before selector training.
struct PairLabelFile {
    std::uint64_t scenario_hash = 0;
    std::uint64_t dae_model_hash = 0;
    std::uint64_t gd_iterations = 0;
    double gd_learning_rate = 0.0;
    int gd_restarts = 0;
    double sentinel_m = 0.0;
    std::vector<PairErrorVector> labels;
};

void write_pair_labels(const PairLabelFile& f, const std::string& path);
PairLabelFile read_pair_labels(const std::string& path);

}  // namespace phasepos::apselect
