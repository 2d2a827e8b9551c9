#include "scenario.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "util/text.hpp"

namespace phasepos::scenario {

double distance(const Vec2& a, const Vec2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

void ScenarioConfig::validate() const {
    if (ap_count() < 3)
        throw std::invalid_argument("scenario: need at least 3 APs");
    if (reference_ap_index < 0 || reference_ap_index >= ap_count())
        throw std::invalid_argument("scenario: reference_ap_index out of range");
    if (!(wavelength_lambda > 0.0))
        throw std::invalid_argument("scenario: wavelength must be > 0");
    if (!(area_side > 0.0))
        throw std::invalid_argument("scenario: area side must be > 0");
    if (perturbation_sigma < 0.0)
        throw std::invalid_argument("scenario: perturbation sigma must be >= 0");
    for (int i = 0; i < ap_count(); ++i)
        for (int j = i + 1; j < ap_count(); ++j)
            if (ap_positions[i].x == ap_positions[j].x &&
                ap_positions[i].y == ap_positions[j].y)
                throw std::invalid_argument("scenario: duplicate AP position");
}

std::uint64_t ScenarioConfig::hash() const {
    // canonical text form so the fingerprint is platform independent
    std::ostringstream ss;
    ss << "v1|" << reference_ap_index << '|' << text::format_double(wavelength_lambda)
       << '|' << text::format_double(area_side) << '|'
       << text::format_double(tx_power_dbm) << '|'
       << text::format_double(perturbation_sigma) << '|'
       << text::format_double(noise.pathloss_exponent) << '|'
       << text::format_double(noise.noise_floor_dbm) << '|'
       << text::format_double(noise.bandwidth_hz) << '|' << noise.snr_to_phase_rule
       << '|' << rng_seed;
    for (const auto& p : ap_positions)
        ss << '|' << text::format_double(p.x) << ',' << text::format_double(p.y);
    std::string s = ss.str();
    return text::fnv1a(s.data(), s.size());
}

AmbiguityLabelSpace build_label_space(const ScenarioConfig& cfg) {
    cfg.validate();
    AmbiguityLabelSpace space;
    const Vec2& ref = cfg.reference_ap();
    for (int i = 0; i < cfg.ap_count(); ++i) {
        if (i == cfg.reference_ap_index) continue;
        double baseline = distance(cfg.ap_positions[i], ref);
        if (baseline == 0.0)
            throw std::invalid_argument("label space: AP coincides with reference");
        int q = static_cast<int>(std::floor(baseline / cfg.wavelength_lambda));
        space.per_pair.push_back({-q - 1, q});
        space.total_classes += 2 * q + 2;
    }
    return space;
}

std::vector<Vec2> default_layout(int count, double side) {
    if (count < 3 || count > 9)
        throw std::invalid_argument(
            "default_layout supports 3..9 APs; pass explicit positions otherwise");
    if (!(side > 0.0)) throw std::invalid_argument("default_layout: side must be > 0");
    const double lo = 0.05 * side;
    const double mid = 0.5 * side;
    const double hi = side - lo;
    const Vec2 order[9] = {
        {mid, mid},           // reference at the center
        {lo, lo},  {hi, lo},  {lo, hi},  {hi, hi},   // corners
        {mid, lo}, {hi, mid}, {mid, hi}, {lo, mid},  // edge midpoints
    };
    return {order, order + count};
}

ScenarioConfig preset(const std::string& name) {
    ScenarioConfig cfg;
    cfg.ap_positions = default_layout(9, 10.0);
    cfg.area_side = 10.0;
    if (name == "default") {
        cfg.wavelength_lambda = 0.0857;
    } else if (name == "paper-q") {
        cfg.wavelength_lambda = 0.26;
    } else if (name == "desk") {
        cfg.ap_positions = default_layout(9, 5.0);
        cfg.area_side = 5.0;
        cfg.wavelength_lambda = 0.35;
    } else {
        throw std::invalid_argument("unknown scenario preset: " + name);
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig read_scenario_file(const std::string& path) {
    text::KvFile kv = text::read_kv_file(path);
    ScenarioConfig cfg;
    cfg.ap_positions.clear();
    if (kv.has("preset")) cfg = preset(kv.get("preset", "default"));
    if (kv.has("wavelength"))
        cfg.wavelength_lambda = text::parse_double(kv.get("wavelength", ""));
    if (kv.has("area_side")) cfg.area_side = text::parse_double(kv.get("area_side", ""));
    if (kv.has("tx_power_dbm"))
        cfg.tx_power_dbm = text::parse_double(kv.get("tx_power_dbm", ""));
    if (kv.has("perturbation_sigma"))
        cfg.perturbation_sigma = text::parse_double(kv.get("perturbation_sigma", ""));
    if (kv.has("reference_ap"))
        cfg.reference_ap_index = static_cast<int>(text::parse_int(kv.get("reference_ap", "")));
    if (kv.has("rng_seed"))
        cfg.rng_seed = static_cast<std::uint64_t>(text::parse_int(kv.get("rng_seed", "")));
    if (kv.has("noise_floor_dbm"))
        cfg.noise.noise_floor_dbm = text::parse_double(kv.get("noise_floor_dbm", ""));
    if (kv.has("pathloss_exponent"))
        cfg.noise.pathloss_exponent = text::parse_double(kv.get("pathloss_exponent", ""));
    if (kv.has("bandwidth_hz"))
        cfg.noise.bandwidth_hz = text::parse_double(kv.get("bandwidth_hz", ""));
    if (kv.has("snr_to_phase_rule"))
        cfg.noise.snr_to_phase_rule = kv.get("snr_to_phase_rule", "");
    auto aps = kv.get_all("ap");
    if (!aps.empty()) {
        cfg.ap_positions.clear();
        for (const auto& line : aps) {
            auto parts = text::split_ws(line);
            if (parts.size() != 2)
                throw std::runtime_error(path + ": 'ap' wants two coordinates");
            cfg.ap_positions.push_back(
                {text::parse_double(parts[0]), text::parse_double(parts[1])});
        }
    } else if (cfg.ap_positions.empty()) {
        int count = static_cast<int>(text::parse_int(kv.get("ap_grid_count", "9")));
        cfg.ap_positions = default_layout(count, cfg.area_side);
    }
    cfg.validate();
    return cfg;
}

void write_scenario_file(const ScenarioConfig& cfg, const std::string& path) {
    std::ostringstream ss;
    ss << "# phasepos scenario\n";
    ss << "wavelength = " << text::format_double(cfg.wavelength_lambda) << "\n";
    ss << "area_side = " << text::format_double(cfg.area_side) << "\n";
    ss << "tx_power_dbm = " << text::format_double(cfg.tx_power_dbm) << "\n";
    ss << "perturbation_sigma = " << text::format_double(cfg.perturbation_sigma) << "\n";
    ss << "reference_ap = " << cfg.reference_ap_index << "\n";
    ss << "rng_seed = " << cfg.rng_seed << "\n";
    ss << "noise_floor_dbm = " << text::format_double(cfg.noise.noise_floor_dbm) << "\n";
    ss << "pathloss_exponent = " << text::format_double(cfg.noise.pathloss_exponent)
       << "\n";
    ss << "bandwidth_hz = " << text::format_double(cfg.noise.bandwidth_hz) << "\n";
    ss << "snr_to_phase_rule = " << cfg.noise.snr_to_phase_rule << "\n";
    for (const auto& p : cfg.ap_positions)
        ss << "ap = " << text::format_double(p.x) << ' ' << text::format_double(p.y)
           << "\n";
    text::write_file(path, ss.str());
}

}  // namespace phasepos::scenario
