#include "apselect.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "util/text.hpp"

namespace phasepos::apselect {

std::size_t pair_count(int ap_count) {
    std::size_t n = static_cast<std::size_t>(ap_count - 1);
    return n * (n - 1) / 2;
}

std::pair<int, int> pair_at(int ap_count, std::size_t index) {
    const int n = ap_count - 1;
    std::size_t k = index;
    for (int a = 1; a < n; ++a) {
        std::size_t row = static_cast<std::size_t>(n - a);
        if (k < row) return {a, a + 1 + static_cast<int>(k)};
        k -= row;
    }
    throw std::out_of_range("pair_at: index out of range");
}

std::size_t pair_index(int ap_count, int a, int b) {
    if (a > b) std::swap(a, b);
    const int n = ap_count - 1;
    if (a < 1 || b > n || a == b) throw std::out_of_range("pair_index: bad pair");
    // pairs (1,2)..(1,n), (2,3)..: offset of row a, then b
    std::size_t offset = static_cast<std::size_t>(a - 1) * n -
                         static_cast<std::size_t>(a - 1) * a / 2;
    return offset + static_cast<std::size_t>(b - a - 1);
}

int ap_of_pair(int m, int ref_index) { return m <= ref_index ? m - 1 : m; }

int pair_of_ap(int ap_index, int ref_index) {
    if (ap_index == ref_index) throw std::invalid_argument("pair_of_ap: reference AP");
    return ap_index < ref_index ? ap_index + 1 : ap_index;
}

std::size_t feature_width(bool full_set) { return full_set ? 11 : 8; }

std::vector<double> extract_features(const ScenarioConfig& cfg, const DatasetRow& row,
                                     bool full_set) {
    const int I = cfg.ap_count();
    const int ref = cfg.reference_ap_index;
    const std::size_t w = feature_width(full_set);
    std::vector<double> out;
    out.reserve(w * static_cast<std::size_t>(I));

    auto angle_feats = [](const scenario::Vec2& from, const scenario::Vec2& to,
                          double& s, double& c) {
        double a = std::atan2(to.y - from.y, to.x - from.x);
        s = std::sin(a);
        c = std::cos(a);
    };

    for (int i = 0; i < I; ++i) {
        const scenario::Vec2& p = cfg.ap_positions[i];
        double delta = i == ref ? 0.0 : row.delta[pair_of_ap(i, ref) - 1];
        double snr = row.snr_db[i];

        double dist_ref = 0.0, sin_ref = 0.0, cos_ref = 1.0;  // reference convention
        if (i != ref) {
            dist_ref = scenario::distance(p, cfg.ap_positions[ref]);
            angle_feats(p, cfg.ap_positions[ref], sin_ref, cos_ref);
        }

        int closest = -1, furthest = -1;
        double dmin = 0.0, dmax = -1.0;
        for (int j = 0; j < I; ++j) {
            if (j == i) continue;
            double d = scenario::distance(p, cfg.ap_positions[j]);
            if (closest < 0 || d < dmin) {
                closest = j;
                dmin = d;
            }
            if (d > dmax) {
                furthest = j;
                dmax = d;
            }
        }
        double sin_cl, cos_cl, sin_fu, cos_fu;
        angle_feats(p, cfg.ap_positions[closest], sin_cl, cos_cl);
        angle_feats(p, cfg.ap_positions[furthest], sin_fu, cos_fu);
        const double norm = static_cast<double>(I - 1);

        out.push_back(delta);
        out.push_back(snr);
        out.push_back(dist_ref);
        out.push_back(sin_ref);
        out.push_back(cos_ref);
        out.push_back(closest / norm);
        out.push_back(sin_cl);
        out.push_back(cos_cl);
        if (full_set) {
            out.push_back(furthest / norm);
            out.push_back(sin_fu);
            out.push_back(cos_fu);
        }
    }
    return out;
}

nn::MlpModel build_selector_model(std::size_t input_width, std::size_t eta,
                                  std::size_t neurons, bool relu_hidden) {
    if (neurons < 1)
        throw std::invalid_argument("build_selector_model: neurons must be >= 1");
    const std::size_t A = neurons;
    nn::Activation hidden = relu_hidden ? nn::Activation::relu : nn::Activation::linear;
    return nn::make_plain({input_width, A, 2 * A, 4 * A, 2 * A, A, eta},
                          {hidden, hidden, hidden, hidden, hidden,
                           nn::Activation::linear});
}

std::size_t PairErrorVector::argmin() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < errors_m.size(); ++i)
        if (errors_m[i] < errors_m[best]) best = i;
    return best;
}

double sentinel_error(const ScenarioConfig& cfg) {
    return cfg.area_side * std::sqrt(2.0);
}

PairErrorVector label_pairs_with(const ScenarioConfig& cfg, const gd::GdConfig& gdc,
                                 const DatasetRow& row, const PairEstimator& est) {
    const int I = cfg.ap_count();
    const int ref = cfg.reference_ap_index;
    const double lambda = cfg.wavelength_lambda;
    const double sentinel = sentinel_error(cfg);
    const std::size_t eta = pair_count(I);
    PairErrorVector out;
    out.errors_m.resize(eta);
    out.sentinel.assign(eta, 0);
    for (std::size_t k = 0; k < eta; ++k) {
        auto [a, b] = pair_at(I, k);
        auto [dz_a, dz_b] = est(a, b);
        std::vector<int> j_aps{ap_of_pair(a, ref), ap_of_pair(b, ref)};
        std::vector<double> dhat{row.delta[a - 1] + lambda * dz_a,
                                 row.delta[b - 1] + lambda * dz_b};
        gd::PositionEstimate pe = gd::solve(gdc, cfg.ap_positions, ref, j_aps, dhat);
        if (pe.failed) {
            out.errors_m[k] = sentinel;
            out.sentinel[k] = 1;
        } else {
            out.errors_m[k] = scenario::distance(pe.position, row.ue_position);
        }
    }
    return out;
}

PairErrorVector label_pairs(const ScenarioConfig& cfg,
                            const scenario::AmbiguityLabelSpace& space,
                            const nn::MlpModel& dae_model, const gd::GdConfig& gdc,
                            const DatasetRow& row) {
    auto x = dae::encode_input(row.delta, cfg.ap_count(), cfg.reference_ap_index,
                               cfg.wavelength_lambda);
    auto trunk_out = nn::forward_trunk(dae_model, x);
    return label_pairs_with(
        cfg, gdc, row, [&](int a, int b) -> std::pair<int, int> {
            auto est = dae::estimate_from_trunk(dae_model, space, trunk_out, {a, b});
            return {est.delta_z[0], est.delta_z[1]};
        });
}

std::pair<int, int> select_pair(const nn::MlpModel& selector,
                                const std::vector<double>& features, int ap_count) {
    if (!selector.trained) throw std::runtime_error("select_pair: untrained model");
    auto pred = nn::forward(selector, features)[0];
    if (pred.size() != pair_count(ap_count))
        throw std::invalid_argument("select_pair: model output width mismatch");
    std::size_t best = 0;
    for (std::size_t i = 1; i < pred.size(); ++i)
        if (pred[i] < pred[best]) best = i;  // first minimum = lexicographic tie-break
    return pair_at(ap_count, best);
}

Strategy strategy_from_name(const std::string& name) {
    if (name == "random") return Strategy::random;
    if (name == "max_snr") return Strategy::max_snr;
    if (name == "no_selection") return Strategy::no_selection;
    if (name == "best_achievable") return Strategy::best_achievable;
    throw std::invalid_argument("unknown strategy: " + name);
}

const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::random: return "random";
        case Strategy::max_snr: return "max_snr";
        case Strategy::no_selection: return "no_selection";
        case Strategy::best_achievable: return "best_achievable";
    }
    return "?";
}

Selection baseline_select(Strategy s, const ScenarioConfig& cfg, const DatasetRow& row,
                          const PairErrorVector* truth, rng::Stream* stream) {
    const int I = cfg.ap_count();
    switch (s) {
        case Strategy::random: {
            if (!stream) throw std::invalid_argument("random strategy needs a stream");
            std::size_t k = static_cast<std::size_t>(stream->uniform() *
                                                     static_cast<double>(pair_count(I)));
            auto [a, b] = pair_at(I, k);
            return {false, a, b};
        }
        case Strategy::max_snr: {
            int best1 = -1, best2 = -1;
            for (int i = 0; i < I; ++i) {
                if (i == cfg.reference_ap_index) continue;
                if (best1 < 0 || row.snr_db[i] > row.snr_db[best1]) {
                    best2 = best1;
                    best1 = i;
                } else if (best2 < 0 || row.snr_db[i] > row.snr_db[best2]) {
                    best2 = i;
                }
            }
            int a = pair_of_ap(best1, cfg.reference_ap_index);
            int b = pair_of_ap(best2, cfg.reference_ap_index);
            if (a > b) std::swap(a, b);
            return {false, a, b};
        }
        case Strategy::no_selection:
            return {true, 0, 0};
        case Strategy::best_achievable: {
            if (!truth)
                throw std::invalid_argument("best_achievable needs the truth vector");
            auto [a, b] = pair_at(I, truth->argmin());
            return {false, a, b};
        }
    }
    throw std::logic_error("baseline_select: unreachable");
}

nn::TrainData make_selector_training_data(const ScenarioConfig& cfg,
                                          const phasesim::Dataset& ds,
                                          const std::vector<PairErrorVector>& labels,
                                          bool full_features, bool log_compress) {
    if (ds.size() != labels.size())
        throw std::invalid_argument("selector data: dataset / label count mismatch");
    const std::size_t eta = pair_count(cfg.ap_count());
    nn::TrainData data;
    data.n = ds.size();
    data.in_width = feature_width(full_features) * static_cast<std::size_t>(cfg.ap_count());
    data.target_width = eta;
    data.inputs.reserve(data.n * data.in_width);
    data.targets.reserve(data.n * eta);
    for (std::size_t r = 0; r < ds.size(); ++r) {
        auto f = extract_features(cfg, ds.rows[r], full_features);
        data.inputs.insert(data.inputs.end(), f.begin(), f.end());
        if (labels[r].errors_m.size() != eta)
            throw std::invalid_argument("selector data: label width mismatch");
        for (double e : labels[r].errors_m)
            data.targets.push_back(log_compress ? std::log1p(e) : e);
    }
    return data;
}

void write_pair_labels(const PairLabelFile& f, const std::string& path) {
    std::ostringstream out;
    out << "# phasepos-pair-labels v1 scenario=" << text::to_hex(f.scenario_hash)
        << " dae=" << text::to_hex(f.dae_model_hash) << " gd_iters=" << f.gd_iterations
        << " gd_lr=" << text::format_double(f.gd_learning_rate)
        << " gd_restarts=" << f.gd_restarts
        << " sentinel=" << text::format_double(f.sentinel_m)
        << " n=" << f.labels.size() << "\n";
    for (const auto& l : f.labels) {
        for (std::size_t i = 0; i < l.errors_m.size(); ++i) {
            if (i) out << ' ';
            out << text::format_double(l.errors_m[i]);
        }
        out << '\n';
    }
    text::write_file(path, out.str());
}

PairLabelFile read_pair_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open labels: " + path);
    std::string header;
    if (!std::getline(in, header) || header.rfind("# phasepos-pair-labels v1", 0) != 0)
        throw std::runtime_error(path + ": not a phasepos pair-label file");
    PairLabelFile f;
    for (const auto& tok : text::split_ws(header.substr(1))) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
        if (k == "scenario") f.scenario_hash = std::stoull(v, nullptr, 16);
        else if (k == "dae") f.dae_model_hash = std::stoull(v, nullptr, 16);
        else if (k == "gd_iters") f.gd_iterations = std::stoull(v);
        else if (k == "gd_lr") f.gd_learning_rate = text::parse_double(v);
        else if (k == "gd_restarts") f.gd_restarts = std::stoi(v);
        else if (k == "sentinel") f.sentinel_m = text::parse_double(v);
    }
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        PairErrorVector v;
        for (const auto& t : text::split_ws(line))
            v.errors_m.push_back(text::parse_double(t));
        v.sentinel.assign(v.errors_m.size(), 0);
        for (std::size_t i = 0; i < v.errors_m.size(); ++i)
            if (v.errors_m[i] == f.sentinel_m) v.sentinel[i] = 1;
        f.labels.push_back(std::move(v));
    }
    return f;
}

}  // namespace phasepos::apselect
