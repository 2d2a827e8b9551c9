#include "evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "util/text.hpp"
#include "util/thread_pool.hpp"

namespace phasepos::eval {

std::vector<std::pair<double, double>> ecdf(std::vector<double> errors) {
    if (errors.empty()) throw std::invalid_argument("ecdf: empty input");
    std::sort(errors.begin(), errors.end());
    std::vector<std::pair<double, double>> pts;
    pts.reserve(errors.size());
    const double S = static_cast<double>(errors.size());
    for (std::size_t k = 0; k < errors.size(); ++k)
        pts.emplace_back(errors[k], static_cast<double>(k + 1) / S);
    return pts;
}

double percentile_nearest_rank(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("percentile: empty input");
    if (!(p > 0.0) || p > 100.0) throw std::invalid_argument("percentile: p in (0,100]");
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(p / 100.0 * static_cast<double>(sorted.size())));
    if (rank == 0) rank = 1;
    return sorted[rank - 1];
}

namespace {

void finalize(StrategyResult& s) {
    std::vector<double> sorted = s.errors_m;
    std::sort(sorted.begin(), sorted.end());
    s.mean_m = std::accumulate(sorted.begin(), sorted.end(), 0.0) /
               static_cast<double>(sorted.size());
    s.p95_m = percentile_nearest_rank(sorted, 95.0);
    s.p99_m = percentile_nearest_rank(sorted, 99.0);
}

/// all-ambiguity positioning error for one row given the estimated dz vector
double all_pair_error(const ScenarioConfig& cfg, const gd::GdConfig& gdc,
                      const phasesim::DatasetRow& row, const std::vector<int>& dz) {
    const int I = cfg.ap_count();
    std::vector<int> j_aps;
    std::vector<double> dhat;
    for (int m = 1; m <= I - 1; ++m) {
        j_aps.push_back(apselect::ap_of_pair(m, cfg.reference_ap_index));
        dhat.push_back(row.delta[m - 1] + cfg.wavelength_lambda * dz[m - 1]);
    }
    gd::PositionEstimate pe = gd::solve(gdc, cfg.ap_positions, cfg.reference_ap_index,
                                        j_aps, dhat);
    if (pe.failed) return apselect::sentinel_error(cfg);
    return scenario::distance(pe.position, row.ue_position);
}

}  // namespace

const StrategyResult& EvalReport::strategy(const std::string& name) const {
    for (const auto& s : strategies)
        if (s.name == name) return s;
    throw std::out_of_range("report has no strategy " + name);
}

EvalReport run_benchmarks(const ScenarioConfig& cfg, double sigma_train,
                          const nn::MlpModel& dae_model,
                          const nn::MlpModel& selector_model, const gd::GdConfig& gdc,
                          const phasesim::Dataset& test_set, unsigned threads,
                          bool full_features) {
    const auto space = scenario::build_label_space(cfg);
    const int I = cfg.ap_count();
    const std::size_t S = test_set.size();
    if (S == 0) throw std::invalid_argument("run_benchmarks: empty test set");

    EvalReport report;
    report.scenario_hash = cfg.hash();
    report.sigma_train = sigma_train;
    report.sigma_test = test_set.sigma;
    report.samples = S;
    report.flop_summary = flops::reduction_report_for(
        cfg, dae_model.trunk.back().out, selector_model.trunk[0].out, gdc.iterations);

    std::vector<std::string> names = {"proposed", "random", "max_snr", "no_selection",
                                      "best_achievable"};
    report.strategies.resize(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
        report.strategies[i].name = names[i];
        report.strategies[i].errors_m.resize(S);
    }
    std::vector<std::uint8_t> exact(S, 0);

    util::ThreadPool pool(threads);
    pool.run_chunks(S, [&](std::size_t b, std::size_t e) {
        std::vector<int> all_m(I - 1);
        for (int m = 1; m <= I - 1; ++m) all_m[m - 1] = m;
        for (std::size_t r = b; r < e; ++r) {
            const auto& row = test_set.rows[r];
            // one trunk pass feeds the gated labels and the all-branch estimate
            auto x = dae::encode_input(row.delta, I, cfg.reference_ap_index,
                                       cfg.wavelength_lambda);
            auto trunk_out = nn::forward_trunk(dae_model, x);

            apselect::PairErrorVector truth = apselect::label_pairs_with(
                cfg, gdc, row, [&](int a, int b2) -> std::pair<int, int> {
                    auto est = dae::estimate_from_trunk(dae_model, space, trunk_out,
                                                        {a, b2});
                    return {est.delta_z[0], est.delta_z[1]};
                });

            auto features = apselect::extract_features(cfg, row, full_features);
            auto [pa, pb] = apselect::select_pair(selector_model, features, I);
            report.strategies[0].errors_m[r] =
                truth.errors_m[apselect::pair_index(I, pa, pb)];

            rng::Stream stream(test_set.seed ^ 0x9e3779b97f4a7c15ull, r);
            auto rnd = apselect::baseline_select(apselect::Strategy::random, cfg, row,
                                                 nullptr, &stream);
            report.strategies[1].errors_m[r] =
                truth.errors_m[apselect::pair_index(I, rnd.a, rnd.b)];

            auto snr = apselect::baseline_select(apselect::Strategy::max_snr, cfg, row,
                                                 nullptr, nullptr);
            report.strategies[2].errors_m[r] =
                truth.errors_m[apselect::pair_index(I, snr.a, snr.b)];

            auto est_all = dae::estimate_from_trunk(dae_model, space, trunk_out, all_m);
            report.strategies[3].errors_m[r] =
                all_pair_error(cfg, gdc, row, est_all.delta_z);
            exact[r] = est_all.delta_z == row.true_delta_z ? 1 : 0;

            report.strategies[4].errors_m[r] = truth.errors_m[truth.argmin()];
        }
    });

    for (auto& s : report.strategies) finalize(s);
    std::size_t hits = 0;
    for (auto v : exact) hits += v;
    report.overall_accuracy_pct = 100.0 * static_cast<double>(hits) /
                                  static_cast<double>(S);
    return report;
}

MatrixEntry evaluate_dae(const ScenarioConfig& test_cfg, const nn::MlpModel& dae_model,
                         const gd::GdConfig& gdc, const phasesim::Dataset& test_set,
                         unsigned threads) {
    const auto space = scenario::build_label_space(test_cfg);
    const int I = test_cfg.ap_count();
    const std::size_t S = test_set.size();
    MatrixEntry entry;
    entry.sigma_test = test_set.sigma;
    entry.samples = S;

    std::vector<std::uint8_t> exact(S, 0);
    std::vector<double> errors(S, 0.0);
    util::ThreadPool pool(threads);
    pool.run_chunks(S, [&](std::size_t b, std::size_t e) {
        std::vector<int> all_m(I - 1);
        for (int m = 1; m <= I - 1; ++m) all_m[m - 1] = m;
        for (std::size_t r = b; r < e; ++r) {
            const auto& row = test_set.rows[r];
            auto est = dae::estimate(dae_model, space, test_cfg, row.delta, all_m);
            exact[r] = est.delta_z == row.true_delta_z ? 1 : 0;
            errors[r] = all_pair_error(test_cfg, gdc, row, est.delta_z);
        }
    });
    std::size_t hits = 0;
    for (auto v : exact) hits += v;
    entry.overall_accuracy_pct = 100.0 * static_cast<double>(hits) /
                                 static_cast<double>(S);
    std::sort(errors.begin(), errors.end());
    entry.mean_m = std::accumulate(errors.begin(), errors.end(), 0.0) /
                   static_cast<double>(S);
    entry.p95_m = percentile_nearest_rank(errors, 95.0);
    entry.p99_m = percentile_nearest_rank(errors, 99.0);
    return entry;
}

std::vector<MatrixEntry> run_matrix(const ScenarioConfig& base,
                                    const std::vector<double>& sigma_train,
                                    const std::vector<double>& sigma_test,
                                    const MatrixOptions& opts) {
    std::vector<MatrixEntry> out;
    for (double st : sigma_train) {
        ScenarioConfig train_cfg = base;
        train_cfg.perturbation_sigma = st;
        auto space = scenario::build_label_space(train_cfg);
        auto train_set = phasesim::generate_dataset(
            train_cfg, opts.train_samples,
            opts.data_seed ^ rng::stream_id("matrix-train", std::llround(st * 1e9)),
            opts.threads);
        auto model = dae::build_dae_model(space, opts.dae_neurons, train_cfg.ap_count());
        auto data = dae::make_training_data(train_cfg, space, train_set);
        nn::TrainConfig tc = opts.train;
        tc.loss = nn::Loss::cross_entropy_per_head;
        tc.threads = opts.threads;
        nn::train(model, data, tc);

        for (double se : sigma_test) {
            ScenarioConfig test_cfg = base;
            test_cfg.perturbation_sigma = se;
            auto test_set = phasesim::generate_dataset(
                test_cfg, opts.test_samples,
                opts.data_seed ^ rng::stream_id("matrix-test", std::llround(se * 1e9)),
                opts.threads);
            MatrixEntry entry = evaluate_dae(test_cfg, model, opts.gd, test_set,
                                             opts.threads);
            entry.sigma_train = st;
            out.push_back(entry);
        }
    }
    return out;
}

void write_benchmark_report(const EvalReport& r, const std::string& path_prefix) {
    std::ostringstream out;
    out << "# phasepos-benchmarks v1\n";
    out << "# scenario " << text::to_hex(r.scenario_hash) << "\n";
    out << "# sigma_train " << text::format_double(r.sigma_train) << "\n";
    out << "# sigma_test " << text::format_double(r.sigma_test) << "\n";
    out << "# samples " << r.samples << "\n";
    out << "# overall_accuracy_pct " << text::format_double(r.overall_accuracy_pct)
        << "\n";
    out << "# c_hi_all " << r.flop_summary.c_hi_all << "\n";
    out << "# total_two_with_aps " << r.flop_summary.total_two_with_aps << "\n";
    out << "# reduction_percent "
        << text::format_double(r.flop_summary.reduction_percent) << "\n";
    out << "# units meters\n";
    out << "strategy\tmean\tp95\tp99\n";
    for (const auto& s : r.strategies)
        out << s.name << '\t' << text::format_double(s.mean_m) << '\t'
            << text::format_double(s.p95_m) << '\t' << text::format_double(s.p99_m)
            << '\n';
    text::write_file(path_prefix + "_summary.tsv", out.str());

    for (const auto& s : r.strategies) {
        std::ostringstream ec;
        ec << "# phasepos-ecdf v1 strategy=" << s.name << " units=meters\n";
        ec << "error\tcumulative_fraction\n";
        for (const auto& [e, f] : ecdf(s.errors_m))
            ec << text::format_double(e) << '\t' << text::format_double(f) << '\n';
        text::write_file(path_prefix + "_ecdf_" + s.name + ".tsv", ec.str());
    }
}

EvalReport read_benchmark_report(const std::string& summary_path) {
    std::ifstream in(summary_path);
    if (!in) throw std::runtime_error("cannot open report: " + summary_path);
    EvalReport r;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto tok = text::split_ws(line.substr(1));
            if (tok.size() < 2) continue;
            if (tok[0] == "scenario") r.scenario_hash = std::stoull(tok[1], nullptr, 16);
            else if (tok[0] == "sigma_train") r.sigma_train = text::parse_double(tok[1]);
            else if (tok[0] == "sigma_test") r.sigma_test = text::parse_double(tok[1]);
            else if (tok[0] == "samples") r.samples = std::stoull(tok[1]);
            else if (tok[0] == "overall_accuracy_pct")
                r.overall_accuracy_pct = text::parse_double(tok[1]);
            continue;
        }
        if (!header_seen) {  // column header row
            header_seen = true;
            continue;
        }
        auto tok = text::split_ws(line);
        if (tok.size() != 4)
            throw std::runtime_error(summary_path + ": bad strategy row");
        StrategyResult s;
        s.name = tok[0];
        s.mean_m = text::parse_double(tok[1]);
        s.p95_m = text::parse_double(tok[2]);
        s.p99_m = text::parse_double(tok[3]);
        r.strategies.push_back(std::move(s));
    }
    return r;
}

void write_matrix_report(const std::vector<MatrixEntry>& entries,
                         const std::string& path) {
    std::ostringstream out;
    out << "# phasepos-robustness-matrix v1 units=meters\n";
    out << "sigma_train\tsigma_test\toverall_accuracy_pct\tmean\tp95\tp99\tsamples\n";
    for (const auto& e : entries)
        out << text::format_double(e.sigma_train) << '\t'
            << text::format_double(e.sigma_test) << '\t'
            << text::format_double(e.overall_accuracy_pct) << '\t'
            << text::format_double(e.mean_m) << '\t' << text::format_double(e.p95_m)
            << '\t' << text::format_double(e.p99_m) << '\t' << e.samples << '\n';
    text::write_file(path, out.str());
}

}  // namespace phasepos::eval
