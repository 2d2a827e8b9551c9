// phasepos: carrier-phase-only uplink positioning lab.
// Pipeline: gen-data -> train-dae -> label-pairs -> train-aps -> eval.
// Stages communicate only through files; every stage writes a manifest with
// content hashes so runs can be reproduced byte for byte.

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "apselect.hpp"
#include "dae.hpp"
#include "evalharness.hpp"
#include "flops.hpp"
#include "gdsolver.hpp"
#include "kernels/kernels.hpp"
#include "manifest.hpp"
#include "nn/mlp.hpp"
#include "nn/train.hpp"
#include "phasesim.hpp"
#include "scenario.hpp"
#include "util/text.hpp"
#include "util/thread_pool.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

// exit codes: 0 ok, 1 runtime failure, 2 usage, 3 malformed config,
// 4 missing/incompatible prerequisite artifact
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PrereqError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using namespace phasepos;

struct CommonOpts {
    std::string scenario_path;
    std::string preset = "default";
    double sigma_override = -1.0;
    unsigned threads = 1;
    std::string kernels_name;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--scenario", c.scenario_path,
                    "scenario config file (default: $PHASEPOS_SCENARIO or preset)");
    cmd->add_option("--preset", c.preset,
                    "built-in scenario: default | paper-q | desk");
    cmd->add_option("--sigma", c.sigma_override,
                    "override the phase-perturbation std (radians)");
    cmd->add_option("--threads", c.threads, "worker threads");
    cmd->add_option("--kernels", c.kernels_name, "force kernel backend: scalar | avx2");
}

scenario::ScenarioConfig load_scenario(const CommonOpts& c) {
    scenario::ScenarioConfig cfg;
    try {
        std::string path = c.scenario_path;
        if (path.empty())
            if (const char* env = std::getenv("PHASEPOS_SCENARIO")) path = env;
        cfg = path.empty() ? scenario::preset(c.preset)
                           : scenario::read_scenario_file(path);
        if (c.sigma_override >= 0.0) cfg.perturbation_sigma = c.sigma_override;
        cfg.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    if (!c.kernels_name.empty()) {
        if (c.kernels_name == "scalar")
            kernels::force_backend(kernels::Backend::scalar);
        else if (c.kernels_name == "avx2")
            kernels::force_backend(kernels::Backend::avx2);
        else
            throw ConfigError("unknown kernel backend: " + c.kernels_name);
    }
    return cfg;
}

manifest::RunManifest make_manifest(const scenario::ScenarioConfig& cfg,
                                    const CommonOpts& c, std::uint64_t seed,
                                    int argc, char** argv) {
    manifest::RunManifest m;
    m.version = kVersion;
    std::ostringstream cmd;
    for (int i = 0; i < argc; ++i) cmd << (i ? " " : "") << argv[i];
    m.command = cmd.str();
    m.seed = seed;
    m.scenario_hash = text::to_hex(cfg.hash());
    m.kernel_backend = kernels::backend_name(kernels::active_backend());
    m.threads = c.threads;
    char buf[32];
    std::time_t now = std::time(nullptr);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    m.timestamp = buf;
    return m;
}

nn::MlpModel load_model_or_prereq(const std::string& path, const char* what) {
    std::ifstream probe(path);
    if (!probe)
        throw PrereqError(std::string(what) + " model missing: " + path +
                          " (run the producing stage first)");
    probe.close();
    try {
        return nn::load_model(path);
    } catch (const std::exception& e) {
        throw PrereqError(std::string(what) + ": " + e.what());
    }
}

gd::GdConfig gd_from_flags(const scenario::ScenarioConfig& cfg, std::uint64_t iters,
                           double lr, int restarts) {
    gd::GdConfig g;
    g.iterations = iters;
    g.learning_rate = lr;
    g.restarts = restarts;
    g.area_side = cfg.area_side;
    return g;
}

int cmd_gen_data(const CommonOpts& c, std::size_t samples, std::uint64_t seed,
                 const std::string& out, int argc, char** argv) {
    auto cfg = load_scenario(c);
    auto ds = phasesim::generate_dataset(cfg, samples, seed, c.threads);
    phasesim::write_dataset(ds, out);
    auto m = make_manifest(cfg, c, seed, argc, argv);
    manifest::add_output(m, out);
    manifest::write_manifest(m, out + ".manifest.json");
    std::printf("wrote %zu samples to %s (scenario %s)\n", ds.size(), out.c_str(),
                text::to_hex(ds.scenario_hash).c_str());
    return 0;
}

struct TrainFlags {
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
    std::size_t neurons = 150;
    std::size_t epochs = 20;
    std::size_t batch = 128;
    double lr = 1e-3;
    double lr_decay = 1.0;
    double val_fraction = 0.2;
    std::size_t patience = 0;
    std::string data_path;
    std::string out = "dae.model";
};

void add_train_flags(CLI::App* cmd, TrainFlags& t, std::size_t default_neurons) {
    t.neurons = default_neurons;
    cmd->add_option("--samples", t.samples, "training samples to generate");
    cmd->add_option("--seed", t.seed, "master seed");
    cmd->add_option("--neurons", t.neurons, "hidden width parameter");
    cmd->add_option("--epochs", t.epochs, "training epochs");
    cmd->add_option("--batch", t.batch, "mini-batch size");
    cmd->add_option("--lr", t.lr, "Adam learning rate");
    cmd->add_option("--lr-decay", t.lr_decay, "per-epoch learning-rate multiplier");
    cmd->add_option("--val-fraction", t.val_fraction, "validation split fraction");
    cmd->add_option("--patience", t.patience, "early-stop patience (0 = off)");
    cmd->add_option("--data", t.data_path, "use an existing dataset file instead");
    cmd->add_option("--out", t.out, "output model path");
}

void write_loss_curves(const nn::TrainResult& r, const std::string& path) {
    std::ostringstream out;
    out << "epoch\ttrain_loss\tval_loss\n";
    for (std::size_t e = 0; e < r.train_loss.size(); ++e) {
        out << e << '\t' << text::format_double(r.train_loss[e]) << '\t';
        out << (e < r.val_loss.size() ? text::format_double(r.val_loss[e]) : "-");
        out << '\n';
    }
    text::write_file(path, out.str());
}

int cmd_train_dae(const CommonOpts& c, const TrainFlags& t, int argc, char** argv) {
    auto cfg = load_scenario(c);
    auto space = scenario::build_label_space(cfg);
    phasesim::Dataset ds;
    if (!t.data_path.empty()) {
        ds = phasesim::read_dataset(t.data_path);
        if (ds.scenario_hash != cfg.hash())
            throw PrereqError("dataset was generated under a different scenario");
    } else {
        ds = phasesim::generate_dataset(cfg, t.samples, t.seed, c.threads);
    }
    auto model = dae::build_dae_model(space, t.neurons, cfg.ap_count());
    auto data = dae::make_training_data(cfg, space, ds);
    nn::TrainConfig tc;
    tc.loss = nn::Loss::cross_entropy_per_head;
    tc.batch_size = t.batch;
    tc.learning_rate = t.lr;
    tc.lr_decay = t.lr_decay;
    tc.epochs = t.epochs;
    tc.validation_fraction = t.val_fraction;
    tc.early_stop_patience = t.patience;
    tc.seed = t.seed;
    tc.threads = c.threads;
    auto result = nn::train(model, data, tc);
    nn::save_model(model, t.out);
    write_loss_curves(result, t.out + ".losses.tsv");
    auto m = make_manifest(cfg, c, t.seed, argc, argv);
    if (!t.data_path.empty()) manifest::add_input(m, t.data_path);
    manifest::add_output(m, t.out);
    manifest::add_output(m, t.out + ".losses.tsv");
    manifest::write_manifest(m, t.out + ".manifest.json");
    std::printf("trained DAE (D=%zu, Q=%d) on %zu samples, %zu epochs, val loss %s\n",
                t.neurons, space.total_classes, ds.size(), result.epochs_run,
                result.val_loss.empty()
                    ? "-"
                    : text::format_double(result.val_loss.back()).c_str());
    return 0;
}

int cmd_label_pairs(const CommonOpts& c, const std::string& dae_path,
                    const std::string& data_path, const std::string& out,
                    std::uint64_t gd_iters, double gd_lr, int gd_restarts, int argc,
                    char** argv) {
    auto cfg = load_scenario(c);
    auto space = scenario::build_label_space(cfg);
    auto dae_model = load_model_or_prereq(dae_path, "DAE");
    std::ifstream probe(data_path);
    if (!probe) throw PrereqError("dataset missing: " + data_path);
    probe.close();
    auto ds = phasesim::read_dataset(data_path);
    if (ds.scenario_hash != cfg.hash())
        throw PrereqError("dataset was generated under a different scenario");
    gd::GdConfig gdc = gd_from_flags(cfg, gd_iters, gd_lr, gd_restarts);

    apselect::PairLabelFile f;
    f.scenario_hash = cfg.hash();
    f.dae_model_hash = text::fnv1a_file(dae_path);
    f.gd_iterations = gdc.iterations;
    f.gd_learning_rate = gdc.learning_rate;
    f.gd_restarts = gdc.restarts;
    f.sentinel_m = apselect::sentinel_error(cfg);
    f.labels.resize(ds.size());
    util::ThreadPool pool(c.threads);
    pool.run_chunks(ds.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t r = b; r < e; ++r)
            f.labels[r] = apselect::label_pairs(cfg, space, dae_model, gdc, ds.rows[r]);
    });
    apselect::write_pair_labels(f, out);
    auto m = make_manifest(cfg, c, ds.seed, argc, argv);
    manifest::add_input(m, dae_path);
    manifest::add_input(m, data_path);
    manifest::add_output(m, out);
    manifest::write_manifest(m, out + ".manifest.json");
    std::printf("labeled %zu samples x %zu pairs -> %s\n", ds.size(),
                apselect::pair_count(cfg.ap_count()), out.c_str());
    return 0;
}

int cmd_train_aps(const CommonOpts& c, const TrainFlags& t, const std::string& dae_path,
                  const std::string& labels_path, bool full_features, bool relu_hidden,
                  bool raw_targets, int argc, char** argv) {
    auto cfg = load_scenario(c);
    if (t.data_path.empty()) throw ConfigError("train-aps requires --data <dataset>");
    std::ifstream probe(labels_path);
    if (!probe)
        throw PrereqError("pair labels missing: " + labels_path +
                          " (run label-pairs first)");
    probe.close();
    auto labels = apselect::read_pair_labels(labels_path);
    if (labels.scenario_hash != cfg.hash())
        throw PrereqError("pair labels were produced under a different scenario");
    if (!dae_path.empty()) {
        std::ifstream dprobe(dae_path);
        if (!dprobe) throw PrereqError("DAE model missing: " + dae_path);
        dprobe.close();
        if (labels.dae_model_hash != text::fnv1a_file(dae_path))
            throw PrereqError("pair labels were produced by a different DAE model");
    }
    auto ds = phasesim::read_dataset(t.data_path);
    if (ds.scenario_hash != cfg.hash())
        throw PrereqError("dataset was generated under a different scenario");

    auto data = apselect::make_selector_training_data(cfg, ds, labels.labels,
                                                      full_features, !raw_targets);
    auto model = apselect::build_selector_model(
        data.in_width, apselect::pair_count(cfg.ap_count()), t.neurons, relu_hidden);
    nn::TrainConfig tc;
    tc.loss = nn::Loss::mse;
    tc.batch_size = t.batch;
    tc.learning_rate = t.lr;
    tc.lr_decay = t.lr_decay;
    tc.epochs = t.epochs;
    tc.validation_fraction = t.val_fraction;
    tc.early_stop_patience = t.patience;
    tc.seed = t.seed;
    tc.threads = c.threads;
    auto result = nn::train(model, data, tc);
    nn::save_model(model, t.out);
    write_loss_curves(result, t.out + ".losses.tsv");
    auto m = make_manifest(cfg, c, t.seed, argc, argv);
    manifest::add_input(m, labels_path);
    manifest::add_input(m, t.data_path);
    if (!dae_path.empty()) manifest::add_input(m, dae_path);
    manifest::add_output(m, t.out);
    manifest::write_manifest(m, t.out + ".manifest.json");
    std::printf("trained selector (A=%zu) on %zu samples, %zu epochs, val loss %s\n",
                t.neurons, ds.size(), result.epochs_run,
                result.val_loss.empty()
                    ? "-"
                    : text::format_double(result.val_loss.back()).c_str());
    return 0;
}

int cmd_eval_benchmarks(const CommonOpts& c, const std::string& dae_path,
                        const std::string& aps_path, const std::string& data_path,
                        std::size_t samples, std::uint64_t seed,
                        const std::string& out_prefix, std::uint64_t gd_iters,
                        double gd_lr, int gd_restarts, bool full_features, int argc,
                        char** argv) {
    auto cfg = load_scenario(c);
    auto dae_model = load_model_or_prereq(dae_path, "DAE");
    auto aps_model = load_model_or_prereq(aps_path, "selector");
    phasesim::Dataset test =
        data_path.empty() ? phasesim::generate_dataset(cfg, samples, seed, c.threads)
                          : phasesim::read_dataset(data_path);
    if (!data_path.empty() && test.scenario_hash != cfg.hash())
        throw PrereqError("dataset was generated under a different scenario");
    gd::GdConfig gdc = gd_from_flags(cfg, gd_iters, gd_lr, gd_restarts);
    auto report = eval::run_benchmarks(cfg, cfg.perturbation_sigma, dae_model,
                                       aps_model, gdc, test, c.threads, full_features);
    eval::write_benchmark_report(report, out_prefix);
    auto m = make_manifest(cfg, c, seed, argc, argv);
    manifest::add_input(m, dae_path);
    manifest::add_input(m, aps_path);
    if (!data_path.empty()) manifest::add_input(m, data_path);
    manifest::add_output(m, out_prefix + "_summary.tsv");
    manifest::write_manifest(m, out_prefix + "_manifest.json");

    std::printf("benchmarks over %zu samples (sigma=%.6g), DAE accuracy %.2f%%\n",
                report.samples, report.sigma_test, report.overall_accuracy_pct);
    std::printf("%-16s %10s %10s %10s   [cm]\n", "strategy", "mean", "p95", "p99");
    for (const auto& s : report.strategies)
        std::printf("%-16s %10.3f %10.3f %10.3f\n", s.name.c_str(), 100.0 * s.mean_m,
                    100.0 * s.p95_m, 100.0 * s.p99_m);
    return 0;
}

int cmd_eval_matrix(const CommonOpts& c, const std::vector<double>& sig_train,
                    const std::vector<double>& sig_test, const TrainFlags& t,
                    std::size_t test_samples, const std::string& out,
                    std::uint64_t gd_iters, double gd_lr, int gd_restarts, int argc,
                    char** argv) {
    auto cfg = load_scenario(c);
    eval::MatrixOptions opts;
    opts.train_samples = t.samples;
    opts.test_samples = test_samples;
    opts.dae_neurons = t.neurons;
    opts.train.batch_size = t.batch;
    opts.train.learning_rate = t.lr;
    opts.train.lr_decay = t.lr_decay;
    opts.train.epochs = t.epochs;
    opts.train.validation_fraction = t.val_fraction;
    opts.train.early_stop_patience = t.patience;
    opts.train.seed = t.seed;
    opts.gd = gd_from_flags(cfg, gd_iters, gd_lr, gd_restarts);
    opts.data_seed = t.seed;
    opts.threads = c.threads;
    auto entries = eval::run_matrix(cfg, sig_train, sig_test, opts);
    eval::write_matrix_report(entries, out);
    auto m = make_manifest(cfg, c, t.seed, argc, argv);
    manifest::add_output(m, out);
    manifest::write_manifest(m, out + ".manifest.json");
    std::printf("%12s %12s %10s %12s %12s\n", "sigma_train", "sigma_test", "acc[%]",
                "p95[cm]", "p99[cm]");
    for (const auto& e : entries)
        std::printf("%12.6g %12.6g %10.2f %12.4f %12.4f\n", e.sigma_train, e.sigma_test,
                    e.overall_accuracy_pct, 100.0 * e.p95_m, 100.0 * e.p99_m);
    return 0;
}

int cmd_flops(bool defaults, const CommonOpts& c, std::uint64_t D, std::uint64_t A,
              std::uint64_t T, double classes, const std::string& out_tsv) {
    flops::FlopReport report;
    if (defaults) {
        flops::FlopParams p;
        p.dae_neurons = D;
        p.aps_neurons = A;
        p.gd_iterations = T;
        if (classes > 0) p.total_classes = classes;
        report = flops::reduction_report(p);
    } else {
        auto cfg = load_scenario(c);
        report = flops::reduction_report_for(cfg, D, A, T);
    }
    std::fputs(flops::format_table(report).c_str(), stdout);
    std::fputs("\n", stdout);
    std::fputs(flops::format_tsv(report).c_str(), stdout);
    if (!out_tsv.empty()) text::write_file(out_tsv, flops::format_tsv(report));
    return 0;
}

int cmd_solve(const CommonOpts& c, const std::string& dhat_path, std::uint64_t gd_iters,
              double gd_lr, int gd_restarts) {
    auto cfg = load_scenario(c);
    std::ifstream in(dhat_path);
    if (!in) throw PrereqError("differential-distance file missing: " + dhat_path);
    std::vector<int> j_aps;
    std::vector<double> dhat;
    std::string line;
    while (std::getline(in, line)) {
        auto t = text::trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto tok = text::split_ws(t);
        if (tok.size() != 2)
            throw ConfigError(dhat_path + ": each line wants '<pair m> <delta_d m>'");
        int m = static_cast<int>(text::parse_int(tok[0]));
        if (m < 1 || m >= cfg.ap_count())
            throw ConfigError(dhat_path + ": pair index out of range");
        j_aps.push_back(apselect::ap_of_pair(m, cfg.reference_ap_index));
        dhat.push_back(text::parse_double(tok[1]));
    }
    gd::GdConfig gdc = gd_from_flags(cfg, gd_iters, gd_lr, gd_restarts);
    auto est = gd::solve(gdc, cfg.ap_positions, cfg.reference_ap_index, j_aps, dhat);
    if (est.failed) {
        std::fprintf(stderr, "solver diverged from every start\n");
        return 1;
    }
    std::printf("position: %s %s\ncost: %s\niterations: %zu%s\n",
                text::format_double(est.position.x).c_str(),
                text::format_double(est.position.y).c_str(),
                text::format_double(est.cost).c_str(), est.iterations_used,
                est.collinear_warning ? "\nwarning: participating APs are collinear"
                                      : "");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"phasepos: carrier-phase-only uplink positioning lab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    CommonOpts common;

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate a measurement dataset");
    add_common(gen, common);
    std::size_t gen_samples = 1000;
    std::uint64_t gen_seed = 1;
    std::string gen_out = "dataset.tsv";
    gen->add_option("--samples", gen_samples, "number of samples")->required();
    gen->add_option("--seed", gen_seed, "master seed");
    gen->add_option("--out", gen_out, "output dataset path");

    // train-dae
    auto* tdae = app.add_subcommand("train-dae", "train the ambiguity estimator");
    add_common(tdae, common);
    TrainFlags dae_flags;
    add_train_flags(tdae, dae_flags, 150);

    // label-pairs
    auto* lp = app.add_subcommand("label-pairs",
                                  "per-pair positioning errors for selector training");
    add_common(lp, common);
    std::string lp_dae = "dae.model", lp_data, lp_out = "pair_labels.tsv";
    std::uint64_t gd_iters = 500;
    double gd_lr = 0.08;
    int gd_restarts = 4;
    lp->add_option("--dae", lp_dae, "trained DAE model");
    lp->add_option("--data", lp_data, "dataset to label")->required();
    lp->add_option("--out", lp_out, "output label file");
    lp->add_option("--gd-iters", gd_iters, "solver iterations");
    lp->add_option("--gd-lr", gd_lr, "solver learning rate");
    lp->add_option("--gd-restarts", gd_restarts, "extra solver starts (0-4)");

    // train-aps
    auto* taps = app.add_subcommand("train-aps", "train the AP-selection network");
    add_common(taps, common);
    TrainFlags aps_flags;
    aps_flags.out = "aps.model";
    add_train_flags(taps, aps_flags, 100);
    std::string taps_labels = "pair_labels.tsv", taps_dae;
    bool full_features = false, relu_hidden = false, raw_targets = false;
    taps->add_option("--labels", taps_labels, "pair-label file from label-pairs");
    taps->add_option("--dae", taps_dae, "DAE model (to verify the label provenance)");
    taps->add_flag("--full-features", full_features, "11-wide per-AP feature blocks");
    taps->add_flag("--relu", relu_hidden, "ReLU hidden activations");
    taps->add_flag("--raw-targets", raw_targets, "train on raw meters (no log1p)");

    // eval
    auto* ev = app.add_subcommand("eval", "evaluate strategies / robustness matrix");
    add_common(ev, common);
    bool benchmarks = false, matrix = false;
    std::string ev_dae = "dae.model", ev_aps = "aps.model", ev_data;
    std::size_t ev_samples = 4000, ev_test_samples = 10000;
    std::uint64_t ev_seed = 99;
    std::string ev_out = "eval";
    std::vector<double> sig_train, sig_test;
    TrainFlags ev_train;
    ev->add_flag("--benchmarks", benchmarks, "strategy benchmark on one test set");
    ev->add_flag("--robustness-matrix", matrix, "sigma train/test accuracy matrix");
    ev->add_option("--dae", ev_dae, "trained DAE model");
    ev->add_option("--aps", ev_aps, "trained selector model");
    ev->add_option("--data", ev_data, "test dataset (otherwise generated)");
    ev->add_option("--samples", ev_samples, "test samples to generate");
    ev->add_option("--seed", ev_seed, "test-set seed");
    ev->add_option("--out", ev_out, "output path prefix");
    ev->add_option("--gd-iters", gd_iters, "solver iterations");
    ev->add_option("--gd-lr", gd_lr, "solver learning rate");
    ev->add_option("--gd-restarts", gd_restarts, "extra solver starts (0-4)");
    ev->add_flag("--full-features", full_features, "11-wide per-AP feature blocks");
    ev->add_option("--sigma-train", sig_train, "matrix: training sigmas (radians)");
    ev->add_option("--sigma-test", sig_test, "matrix: test sigmas (radians)");
    ev->add_option("--train-samples", ev_train.samples, "matrix: train-set size");
    ev->add_option("--test-samples", ev_test_samples, "matrix: test-set size");
    ev->add_option("--neurons", ev_train.neurons, "matrix: DAE width");
    ev->add_option("--epochs", ev_train.epochs, "matrix: training epochs");
    ev->add_option("--batch", ev_train.batch, "matrix: batch size");
    ev->add_option("--lr", ev_train.lr, "matrix: learning rate");
    ev->add_option("--train-seed", ev_train.seed, "matrix: training seed");

    // flops
    auto* fl = app.add_subcommand("flops", "closed-form inference complexity report");
    add_common(fl, common);
    bool fl_defaults = false;
    std::uint64_t fl_D = 150, fl_A = 100, fl_T = 500;
    double fl_classes = 0.0;
    std::string fl_out;
    fl->add_flag("--defaults", fl_defaults,
                 "use the published parameter set (Q=334) instead of a scenario");
    fl->add_option("-D,--dae-neurons", fl_D, "DAE width D");
    fl->add_option("-A,--aps-neurons", fl_A, "selector width A");
    fl->add_option("-T,--gd-iterations", fl_T, "solver iterations T");
    fl->add_option("--classes", fl_classes, "override the total class count Q");
    fl->add_option("--out", fl_out, "also write the TSV report here");

    // solve
    auto* so = app.add_subcommand("solve", "one-shot position solve from delta-d");
    add_common(so, common);
    std::string so_dhat;
    so->add_option("--delta-d", so_dhat, "file of '<pair m> <delta_d meters>' lines")
        ->required();
    so->add_option("--gd-iters", gd_iters, "solver iterations");
    so->add_option("--gd-lr", gd_lr, "solver learning rate");
    so->add_option("--gd-restarts", gd_restarts, "extra solver starts (0-4)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        app.exit(e);
        std::fprintf(stderr, "phasepos: error code=2 msg=\"usage: %s\"\n", e.what());
        return 2;
    }

    try {
        if (gen->parsed())
            return cmd_gen_data(common, gen_samples, gen_seed, gen_out, argc, argv);
        if (tdae->parsed()) return cmd_train_dae(common, dae_flags, argc, argv);
        if (lp->parsed())
            return cmd_label_pairs(common, lp_dae, lp_data, lp_out, gd_iters, gd_lr,
                                   gd_restarts, argc, argv);
        if (taps->parsed())
            return cmd_train_aps(common, aps_flags, taps_dae, taps_labels,
                                 full_features, relu_hidden, raw_targets, argc, argv);
        if (ev->parsed()) {
            if (matrix) {
                if (sig_train.empty()) sig_train = {0.0, M_PI / 200, M_PI / 100, M_PI / 50};
                if (sig_test.empty()) sig_test = sig_train;
                return cmd_eval_matrix(common, sig_train, sig_test, ev_train,
                                       ev_test_samples, ev_out + "_matrix.tsv",
                                       gd_iters, gd_lr, gd_restarts, argc, argv);
            }
            if (!benchmarks)
                throw ConfigError("eval needs --benchmarks or --robustness-matrix");
            return cmd_eval_benchmarks(common, ev_dae, ev_aps, ev_data, ev_samples,
                                       ev_seed, ev_out, gd_iters, gd_lr, gd_restarts,
                                       full_features, argc, argv);
        }
        if (fl->parsed())
            return cmd_flops(fl_defaults, common, fl_D, fl_A, fl_T, fl_classes, fl_out);
        if (so->parsed())
            return cmd_solve(common, so_dhat, gd_iters, gd_lr, gd_restarts);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "phasepos: error code=3 msg=\"%s\"\n", e.what());
        return 3;
    } catch (const PrereqError& e) {
        std::fprintf(stderr, "phasepos: error code=4 msg=\"%s\"\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "phasepos: error code=1 msg=\"%s\"\n", e.what());
        return 1;
    }
    return 2;
}
