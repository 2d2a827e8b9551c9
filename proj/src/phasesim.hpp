#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scenario.hpp"
#include "util/rng.hpp"

namespace phasepos::phasesim {

using scenario::ScenarioConfig;
using scenario::Vec2;

/// One positioning epoch with ground truth and latent draws kept for
/// debugging and oracle checks.
struct MeasurementSample {
    Vec2 ue_position;
    std::vector<double> distances;       // d_i, meters
    std::vector<double> wrapped_phases;  // theta_i in [-pi, pi)
    std::vector<double> snr_db;
    std::vector<double> gamma;           // latent phase perturbation per AP
    std::vector<double> noise;           // latent measurement noise per AP
    double phi_ue = 0.0;                 // latent UE phase offset
    std::vector<int> integer_z;          // wrap count per AP
    std::vector<double> delta;           // differential measurement, meters, length I-1
    std::vector<double> true_delta_d;    // d_m - d_0
    std::vector<int> true_delta_z;       // differential ambiguity per pair
};

/// Explicit latent draws, for tests that pin or shift them.
struct Latents {
    double phi_ue = 0.0;
    std::vector<double> gamma;
    std::vector<double> noise;
};

/// SNR_dB = tx_power - 10 n log10(4 pi d / lambda) - noise_floor. Requires d > 0.
double snr_from_geometry(const ScenarioConfig& cfg, double d);

/// High-SNR phase error std: sqrt(1 / (2 snr_linear)).
double phase_noise_std(double snr_db);

/// Draws latents (phi_ue, then gamma per AP, then noise per AP) from the
/// stream and builds the sample. Throws std::domain_error if the UE
/// coincides with an AP.
MeasurementSample sample_epoch(const ScenarioConfig& cfg, Vec2 ue_position,
                               rng::Stream& stream);

/// Same epoch construction from pinned latents.
MeasurementSample sample_epoch_with_latents(const ScenarioConfig& cfg,
                                            Vec2 ue_position, const Latents& latents);

/// Rows of the on-disk dataset: the columns every downstream stage consumes.
struct DatasetRow {
    Vec2 ue_position;
    std::vector<double> wrapped_phases;
    std::vector<double> snr_db;
    std::vector<double> delta;
    std::vector<int> true_delta_z;
};

struct Dataset {
    std::uint64_t scenario_hash = 0;
    std::uint64_t seed = 0;
    int ap_count = 0;
    double sigma = 0.0;
    std::vector<DatasetRow> rows;

    std::size_t size() const { return rows.size(); }
};

DatasetRow to_row(const MeasurementSample& s);

/// UE positions uniform over the area; one counter-based stream per sample
/// index, so the result is independent of worker count and identical for
/// identical seeds.
Dataset generate_dataset(const ScenarioConfig& cfg, std::size_t n_samples,
                         std::uint64_t seed, unsigned threads = 1);

void write_dataset(const Dataset& ds, const std::string& path);
Dataset read_dataset(const std::string& path);

}  // namespace phasepos::phasesim
