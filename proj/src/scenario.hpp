#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace phasepos::scenario {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

double distance(const Vec2& a, const Vec2& b);

/// Distance -> SNR mapping parameters (free-space path loss against a flat
/// noise floor) plus the SNR -> phase-noise rule selector.
struct NoiseModelParams {
    double pathloss_exponent = 2.0;   // 2 = free space
    double noise_floor_dbm = -94.0;
    double bandwidth_hz = 1e6;        // informational; floor is set directly
    std::string snr_to_phase_rule = "crb_high_snr";
};

/// Deployment geometry, physical constants and seeds shared by every stage.
/// Immutable after construction; safe to share across threads.
struct ScenarioConfig {
    std::vector<Vec2> ap_positions;           // length I >= 3
    int reference_ap_index = 0;
    double wavelength_lambda = 0.0857;        // meters (3.5 GHz carrier)
    double area_side = 10.0;                  // meters, square [0, side]^2
    double tx_power_dbm = 0.0;
    double perturbation_sigma = 0.0;          // radians, std of gamma
    NoiseModelParams noise;
    std::uint64_t rng_seed = 1;

    int ap_count() const { return static_cast<int>(ap_positions.size()); }
    const Vec2& reference_ap() const { return ap_positions[reference_ap_index]; }

    /// Throws std::invalid_argument on any violated invariant.
    void validate() const;

    /// Fingerprint of every field, stable across runs.
    std::uint64_t hash() const;
};

/// Per-pair integer intervals for the differential ambiguities.
struct AmbiguityLabelSpace {
    struct Bounds {
        int lo = 0;
        int hi = 0;
        int count() const { return hi - lo + 1; }
    };
    std::vector<Bounds> per_pair;  // index m-1 for non-reference AP m in [1, I-1]
    int total_classes = 0;         // Q = sum of per-pair counts

    const Bounds& bounds(int pair_m) const { return per_pair[pair_m - 1]; }
    bool contains(int pair_m, int dz) const {
        const Bounds& b = bounds(pair_m);
        return dz >= b.lo && dz <= b.hi;
    }
};

/// Bounds from the triangle inequality |delta d| <= baseline: with
/// q = floor(baseline / lambda), the interval is [-q-1, q], so each pair has
/// 2q+2 classes. Throws if any baseline is zero.
AmbiguityLabelSpace build_label_space(const ScenarioConfig& cfg);

/// Documented deterministic layout on a square of the given side: the center
/// first (reference), then the four corners, then the four edge midpoints,
/// all inset by 5% of the side. Supports 3 <= count <= 9.
std::vector<Vec2> default_layout(int count, double side);

/// Built-in configurations:
///   "default"  9 APs, 10 m area, lambda 0.0857 m
///   "paper-q"  same geometry with lambda 0.26 m, shrinking the label space
///              to a few hundred classes
///   "desk"     9 APs on a 5 m square, lambda 0.35 m: a label space around
///              130 classes, sized so ~1e5 training samples cover every
///              ambiguity cell densely
ScenarioConfig preset(const std::string& name);

ScenarioConfig read_scenario_file(const std::string& path);
void write_scenario_file(const ScenarioConfig& cfg, const std::string& path);

}  // namespace phasepos::scenario
