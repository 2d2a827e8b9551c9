#include "phasesim.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "util/text.hpp"
#include "util/thread_pool.hpp"

namespace phasepos::phasesim {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;
}

double snr_from_geometry(const ScenarioConfig& cfg, double d) {
    if (!(d > 0.0)) throw std::domain_error("snr_from_geometry: distance must be > 0");
    double pathloss_db = 10.0 * cfg.noise.pathloss_exponent *
                         std::log10(4.0 * M_PI * d / cfg.wavelength_lambda);
    return cfg.tx_power_dbm - pathloss_db - cfg.noise.noise_floor_dbm;
}

double phase_noise_std(double snr_db) {
    double snr_linear = std::pow(10.0, snr_db / 10.0);
    return std::sqrt(1.0 / (2.0 * snr_linear));
}

MeasurementSample sample_epoch_with_latents(const ScenarioConfig& cfg,
                                            Vec2 ue_position, const Latents& latents) {
    const int I = cfg.ap_count();
    const double lambda = cfg.wavelength_lambda;
    MeasurementSample s;
    s.ue_position = ue_position;
    s.phi_ue = latents.phi_ue;
    s.gamma = latents.gamma;
    s.noise = latents.noise;
    s.distances.resize(I);
    s.wrapped_phases.resize(I);
    s.snr_db.resize(I);
    s.integer_z.resize(I);

    for (int i = 0; i < I; ++i) {
        double d = scenario::distance(ue_position, cfg.ap_positions[i]);
        if (d == 0.0) throw std::domain_error("sample_epoch: UE coincides with an AP");
        s.distances[i] = d;
        s.snr_db[i] = snr_from_geometry(cfg, d);
        double unwrapped =
            -(kTwoPi / lambda) * d + latents.gamma[i] + latents.phi_ue + latents.noise[i];
        // z = -round(unwrapped / 2pi), half rounded up so theta lands in [-pi, pi)
        int z = -static_cast<int>(std::floor(unwrapped / kTwoPi + 0.5));
        s.integer_z[i] = z;
        s.wrapped_phases[i] = unwrapped + kTwoPi * z;
    }

    const int r = cfg.reference_ap_index;
    s.delta.reserve(I - 1);
    s.true_delta_d.reserve(I - 1);
    s.true_delta_z.reserve(I - 1);
    for (int i = 0; i < I; ++i) {
        if (i == r) continue;
        // raw differential, then one canonical wrap into [0, lambda): phase
        // differences are defined modulo 2pi, and only the canonical form is
        // invariant to the per-AP wrap and the UE phase offset
        double raw = -(lambda / kTwoPi) * (s.wrapped_phases[i] - s.wrapped_phases[r]);
        double delta = raw - lambda * std::floor(raw / lambda);
        if (delta >= lambda) delta -= lambda;  // guard the floor rounding edge
        double dd = s.distances[i] - s.distances[r];
        double dgamma = (lambda / kTwoPi) * (latents.gamma[r] - latents.gamma[i]);
        double dnoise = (lambda / kTwoPi) * (latents.noise[r] - latents.noise[i]);
        double invariant = dd + dgamma + dnoise;
        s.delta.push_back(delta);
        s.true_delta_d.push_back(dd);
        s.true_delta_z.push_back(static_cast<int>(std::floor(invariant / lambda)));
    }
    return s;
}

MeasurementSample sample_epoch(const ScenarioConfig& cfg, Vec2 ue_position,
                               rng::Stream& stream) {
    const int I = cfg.ap_count();
    Latents latents;
    latents.phi_ue = stream.uniform(-M_PI, M_PI);
    latents.gamma.resize(I);
    latents.noise.resize(I);
    for (int i = 0; i < I; ++i)
        latents.gamma[i] = stream.normal(0.0, cfg.perturbation_sigma);
    for (int i = 0; i < I; ++i) {
        double d = scenario::distance(ue_position, cfg.ap_positions[i]);
        if (d == 0.0) throw std::domain_error("sample_epoch: UE coincides with an AP");
        latents.noise[i] = stream.normal(0.0, phase_noise_std(snr_from_geometry(cfg, d)));
    }
    return sample_epoch_with_latents(cfg, ue_position, latents);
}

DatasetRow to_row(const MeasurementSample& s) {
    return {s.ue_position, s.wrapped_phases, s.snr_db, s.delta, s.true_delta_z};
}

Dataset generate_dataset(const ScenarioConfig& cfg, std::size_t n_samples,
                         std::uint64_t seed, unsigned threads) {
    cfg.validate();
    if (n_samples == 0)
        throw std::invalid_argument("generate_dataset: n_samples must be > 0");
    Dataset ds;
    ds.scenario_hash = cfg.hash();
    ds.seed = seed;
    ds.ap_count = cfg.ap_count();
    ds.sigma = cfg.perturbation_sigma;
    ds.rows.resize(n_samples);

    util::ThreadPool pool(threads);
    pool.run_chunks(n_samples, [&](std::size_t begin, std::size_t end) {
        for (std::size_t idx = begin; idx < end; ++idx) {
            rng::Stream stream(seed, idx);
            for (;;) {
                Vec2 ue{stream.uniform(0.0, cfg.area_side),
                        stream.uniform(0.0, cfg.area_side)};
                try {
                    ds.rows[idx] = to_row(sample_epoch(cfg, ue, stream));
                    break;
                } catch (const std::domain_error&) {
                    // UE landed on an AP: reject and redraw from the same stream
                }
            }
        }
    });
    return ds;
}

void write_dataset(const Dataset& ds, const std::string& path) {
    std::ostringstream out;
    out << "# phasepos-dataset v1 scenario=" << text::to_hex(ds.scenario_hash)
        << " seed=" << ds.seed << " aps=" << ds.ap_count
        << " sigma=" << text::format_double(ds.sigma) << " n=" << ds.rows.size()
        << "\n";
    for (const auto& row : ds.rows) {
        out << text::format_double(row.ue_position.x) << ' '
            << text::format_double(row.ue_position.y);
        for (double v : row.wrapped_phases) out << ' ' << text::format_double(v);
        for (double v : row.snr_db) out << ' ' << text::format_double(v);
        for (double v : row.delta) out << ' ' << text::format_double(v);
        for (int v : row.true_delta_z) out << ' ' << v;
        out << '\n';
    }
    text::write_file(path, out.str());
}

Dataset read_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset: " + path);
    std::string header;
    if (!std::getline(in, header) || header.rfind("# phasepos-dataset v1", 0) != 0)
        throw std::runtime_error(path + ": not a phasepos dataset (bad header)");
    Dataset ds;
    for (const auto& tok : text::split_ws(header.substr(1))) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
        if (k == "scenario") ds.scenario_hash = std::stoull(v, nullptr, 16);
        else if (k == "seed") ds.seed = std::stoull(v);
        else if (k == "aps") ds.ap_count = std::stoi(v);
        else if (k == "sigma") ds.sigma = text::parse_double(v);
    }
    if (ds.ap_count < 3) throw std::runtime_error(path + ": bad AP count in header");
    const int I = ds.ap_count;
    const std::size_t want = 2 + 2 * I + 2 * (I - 1);
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto tok = text::split_ws(line);
        if (tok.size() != want)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected " + std::to_string(want) + " columns");
        DatasetRow row;
        std::size_t c = 0;
        row.ue_position.x = text::parse_double(tok[c++]);
        row.ue_position.y = text::parse_double(tok[c++]);
        row.wrapped_phases.resize(I);
        for (int i = 0; i < I; ++i) row.wrapped_phases[i] = text::parse_double(tok[c++]);
        row.snr_db.resize(I);
        for (int i = 0; i < I; ++i) row.snr_db[i] = text::parse_double(tok[c++]);
        row.delta.resize(I - 1);
        for (int i = 0; i < I - 1; ++i) row.delta[i] = text::parse_double(tok[c++]);
        row.true_delta_z.resize(I - 1);
        for (int i = 0; i < I - 1; ++i)
            row.true_delta_z[i] = static_cast<int>(text::parse_int(tok[c++]));
        ds.rows.push_back(std::move(row));
    }
    return ds;
}

}  // namespace phasepos::phasesim
