#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace phasepos::nn {

enum class Activation : std::uint8_t { linear = 0, relu = 1, softmax = 2 };

struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> w;  // out x in, row-major
    std::vector<double> b;  // out
    Activation act = Activation::linear;
};

enum class Topology : std::uint8_t { plain = 0, trunk_with_branches = 1 };

/// Feedforward network. Plain models run trunk layers end to end; branched
/// models share the trunk and fan out into independent per-branch stacks
/// (used for one classifier head per differential ambiguity).
struct MlpModel {
    Topology topology = Topology::plain;
    bool trained = false;
    std::size_t input_width = 0;
    std::vector<double> feat_mean;  // input standardization, set at training time
    std::vector<double> feat_std;
    std::vector<DenseLayer> trunk;
    std::vector<std::vector<DenseLayer>> branches;

    std::size_t branch_count() const { return branches.size(); }
    std::size_t trunk_output_width() const;
    /// output width of a branch (plain model: branch 0 = trunk output)
    std::size_t output_width(std::size_t branch = 0) const;
    std::size_t parameter_count() const;

    /// Width compatibility, softmax only as a final activation, branch count
    /// consistent with topology. Throws std::invalid_argument.
    void validate() const;
};

/// Plain stack from layer widths; acts has one entry per layer.
MlpModel make_plain(const std::vector<std::size_t>& widths,
                    const std::vector<Activation>& acts);

/// (x - mean) / std with the stored vectors; identity when they are empty.
void standardize_input(const MlpModel& m, std::span<const double> x, double* out);

/// Single-sample forward through the standardization and trunk.
std::vector<double> forward_trunk(const MlpModel& m, std::span<const double> x);

/// Single-sample forward through one layer stack (no standardization).
std::vector<double> run_layers(const std::vector<DenseLayer>& layers,
                               std::vector<double> input);

/// Full forward. `branches` selects which branch stacks run (ignored for
/// plain models); inactive branches are not evaluated at all. Results align
/// with the requested branch order.
std::vector<std::vector<double>> forward(const MlpModel& m, std::span<const double> x,
                                         const std::vector<int>* branches = nullptr);

/// He/Xavier initialization, deterministic in the seed.
void init_weights(MlpModel& m, std::uint64_t seed);

// Little-endian binary model file; load rejects wrong magic, wrong version
// and truncated payloads.
void save_model(const MlpModel& m, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace phasepos::nn
