#pragma once

#include <vector>

#include "nn/mlp.hpp"
#include "nn/train.hpp"
#include "phasesim.hpp"
#include "scenario.hpp"

namespace phasepos::dae {

using scenario::AmbiguityLabelSpace;
using scenario::ScenarioConfig;

struct AmbiguityEstimate {
    std::vector<int> indices;  // pair indices m in [1, I-1], ascending
    std::vector<int> delta_z;  // estimates, within the label-space bounds
    std::vector<std::vector<double>> posteriors;  // per head, optional (may be empty)
};

struct DifferentialDistanceEstimate {
    std::vector<int> indices;
    std::vector<double> delta_d;  // delta_j + lambda * dz_j, meters
};

/// (cos, sin) of the differential phase 2 pi delta_m / lambda per AP, with
/// the reference AP contributing the zero-angle entry: 2I inputs.
std::vector<double> encode_input(const std::vector<double>& delta, int ap_count,
                                 int ref_index, double lambda);

/// Shared trunk (input layer plus eight hidden layers of width D) with one
/// two-layer branch and a softmax head per differential ambiguity. The head
/// width of branch m-1 is the label-space class count of pair m.
nn::MlpModel build_dae_model(const AmbiguityLabelSpace& space, std::size_t neurons,
                             int ap_count);

/// Training tensors from a dataset: encoded inputs plus per-head class
/// labels (dz - lo). Throws if any label falls outside the space.
nn::TrainData make_training_data(const ScenarioConfig& cfg,
                                 const AmbiguityLabelSpace& space,
                                 const phasesim::Dataset& ds);

/// Gated estimate: only the branches for pairs in j_set are evaluated.
/// Posterior ties break toward the lower class index. Throws if the model
/// is untrained.
AmbiguityEstimate estimate(const nn::MlpModel& model, const AmbiguityLabelSpace& space,
                           const ScenarioConfig& cfg, const std::vector<double>& delta,
                           const std::vector<int>& j_set, bool want_posteriors = false);

/// Same, with the trunk output precomputed (one trunk pass shared across
/// many gated calls on the same sample).
AmbiguityEstimate estimate_from_trunk(const nn::MlpModel& model,
                                      const AmbiguityLabelSpace& space,
                                      const std::vector<double>& trunk_out,
                                      const std::vector<int>& j_set,
                                      bool want_posteriors = false);

DifferentialDistanceEstimate differential_distances(const AmbiguityEstimate& est,
                                                    const std::vector<double>& delta,
                                                    double lambda);

/// Fraction of samples whose whole estimated vector matches the truth, as a
/// percentage. Throws on empty or mismatched inputs.
double overall_accuracy(const std::vector<std::vector<int>>& estimates,
                        const std::vector<std::vector<int>>& truths);

}  // namespace phasepos::dae
