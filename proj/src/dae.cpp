#include "dae.hpp"

#include <cmath>
#include <stdexcept>

namespace phasepos::dae {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;
constexpr std::size_t kTrunkDepth = 8;   // hidden D->D layers after the input layer
constexpr std::size_t kBranchDepth = 2;  // D->D layers before each head
}  // namespace

std::vector<double> encode_input(const std::vector<double>& delta, int ap_count,
                                 int ref_index, double lambda) {
    if (static_cast<int>(delta.size()) != ap_count - 1)
        throw std::invalid_argument("encode_input: delta length mismatch");
    std::vector<double> x(2 * ap_count);
    int m = 0;
    for (int i = 0; i < ap_count; ++i) {
        double angle = 0.0;  // reference AP carries the padded zero entry
        if (i != ref_index) angle = kTwoPi * delta[m++] / lambda;
        x[2 * i] = std::cos(angle);
        x[2 * i + 1] = std::sin(angle);
    }
    return x;
}

nn::MlpModel build_dae_model(const AmbiguityLabelSpace& space, std::size_t neurons,
                             int ap_count) {
    if (neurons < 1) throw std::invalid_argument("build_dae_model: neurons must be >= 1");
    if (space.per_pair.size() != static_cast<std::size_t>(ap_count - 1))
        throw std::invalid_argument("build_dae_model: label space / AP count mismatch");
    const std::size_t D = neurons;
    nn::MlpModel m;
    m.topology = nn::Topology::trunk_with_branches;
    m.input_width = 2 * static_cast<std::size_t>(ap_count);

    auto dense = [](std::size_t in, std::size_t out, nn::Activation act) {
        nn::DenseLayer l;
        l.in = in;
        l.out = out;
        l.w.assign(in * out, 0.0);
        l.b.assign(out, 0.0);
        l.act = act;
        return l;
    };

    m.trunk.push_back(dense(m.input_width, D, nn::Activation::relu));
    for (std::size_t i = 0; i < kTrunkDepth; ++i)
        m.trunk.push_back(dense(D, D, nn::Activation::relu));
    for (const auto& bounds : space.per_pair) {
        std::vector<nn::DenseLayer> branch;
        for (std::size_t i = 0; i < kBranchDepth; ++i)
            branch.push_back(dense(D, D, nn::Activation::relu));
        branch.push_back(dense(D, static_cast<std::size_t>(bounds.count()),
                               nn::Activation::softmax));
        m.branches.push_back(std::move(branch));
    }
    m.validate();
    return m;
}

nn::TrainData make_training_data(const ScenarioConfig& cfg,
                                 const AmbiguityLabelSpace& space,
                                 const phasesim::Dataset& ds) {
    const int I = cfg.ap_count();
    if (ds.ap_count != I)
        throw std::invalid_argument("make_training_data: dataset AP count mismatch");
    nn::TrainData data;
    data.n = ds.size();
    data.in_width = 2 * static_cast<std::size_t>(I);
    data.inputs.reserve(data.n * data.in_width);
    data.labels.reserve(data.n * (I - 1));
    for (const auto& row : ds.rows) {
        auto x = encode_input(row.delta, I, cfg.reference_ap_index,
                              cfg.wavelength_lambda);
        data.inputs.insert(data.inputs.end(), x.begin(), x.end());
        for (int m = 1; m <= I - 1; ++m) {
            int dz = row.true_delta_z[m - 1];
            if (!space.contains(m, dz))
                throw std::runtime_error(
                    "make_training_data: ambiguity outside the label space");
            data.labels.push_back(dz - space.bounds(m).lo);
        }
    }
    return data;
}

AmbiguityEstimate estimate_from_trunk(const nn::MlpModel& model,
                                      const AmbiguityLabelSpace& space,
                                      const std::vector<double>& trunk_out,
                                      const std::vector<int>& j_set,
                                      bool want_posteriors) {
    if (!model.trained) throw std::runtime_error("dae: model is untrained");
    if (space.per_pair.size() != model.branch_count())
        throw std::invalid_argument("dae: label space / model branch mismatch");
    AmbiguityEstimate est;
    est.indices = j_set;
    for (int m : j_set) {
        if (m < 1 || static_cast<std::size_t>(m) > model.branch_count())
            throw std::invalid_argument("dae: pair index out of range");
        std::vector<double> probs = nn::run_layers(model.branches[m - 1], trunk_out);
        std::size_t best = 0;
        for (std::size_t c = 1; c < probs.size(); ++c)
            if (probs[c] > probs[best]) best = c;  // ties keep the lower class
        est.delta_z.push_back(space.bounds(m).lo + static_cast<int>(best));
        if (want_posteriors) est.posteriors.push_back(std::move(probs));
    }
    return est;
}

AmbiguityEstimate estimate(const nn::MlpModel& model, const AmbiguityLabelSpace& space,
                           const ScenarioConfig& cfg, const std::vector<double>& delta,
                           const std::vector<int>& j_set, bool want_posteriors) {
    auto x = encode_input(delta, cfg.ap_count(), cfg.reference_ap_index,
                          cfg.wavelength_lambda);
    auto trunk_out = nn::forward_trunk(model, x);
    return estimate_from_trunk(model, space, trunk_out, j_set, want_posteriors);
}

DifferentialDistanceEstimate differential_distances(const AmbiguityEstimate& est,
                                                    const std::vector<double>& delta,
                                                    double lambda) {
    DifferentialDistanceEstimate out;
    out.indices = est.indices;
    out.delta_d.reserve(est.indices.size());
    for (std::size_t k = 0; k < est.indices.size(); ++k) {
        int m = est.indices[k];
        if (m < 1 || static_cast<std::size_t>(m) > delta.size())
            throw std::invalid_argument("differential_distances: index out of range");
        out.delta_d.push_back(delta[m - 1] + lambda * est.delta_z[k]);
    }
    return out;
}

double overall_accuracy(const std::vector<std::vector<int>>& estimates,
                        const std::vector<std::vector<int>>& truths) {
    if (estimates.empty() || estimates.size() != truths.size())
        throw std::invalid_argument("overall_accuracy: empty or mismatched inputs");
    std::size_t hits = 0;
    for (std::size_t s = 0; s < estimates.size(); ++s) {
        if (estimates[s].size() != truths[s].size())
            throw std::invalid_argument("overall_accuracy: vector length mismatch");
        if (estimates[s] == truths[s]) ++hits;
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(estimates.size());
}

}  // namespace phasepos::dae
