#include "flops.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "gdsolver.hpp"
#include "kernels/ref_impl.hpp"
#include "util/rng.hpp"

namespace phasepos::flops {

std::uint64_t dense_layer_flops(std::uint64_t n_in, std::uint64_t n_out) {
    return 2 * n_out * n_in;
}

std::uint64_t aps_flops(std::uint64_t A, std::uint64_t I, std::uint64_t eta) {
    return 2 * A * (20 * A + 8 * I + eta);
}

std::uint64_t dae_flops(std::uint64_t D, std::uint64_t j_size, double q_effective,
                        std::uint64_t I) {
    double v = static_cast<double>(D) * static_cast<double>(D) *
                   (4.0 * static_cast<double>(j_size) + 16.0) +
               static_cast<double>(D) * (2.0 * q_effective + 4.0 * static_cast<double>(I));
    return static_cast<std::uint64_t>(std::llround(v));
}

std::uint64_t gd_flops(std::uint64_t T, std::uint64_t j_size) {
    return T * (18 * j_size + 10);
}

FlopReport reduction_report(const FlopParams& p) {
    FlopReport r;
    r.params = p;
    const std::uint64_t j_all = p.ap_count - 1;
    const double q_two = p.total_classes * 2.0 / static_cast<double>(j_all);
    r.c_aps = aps_flops(p.aps_neurons, p.ap_count, p.pair_count());
    r.c_dae_all = dae_flops(p.dae_neurons, j_all, p.total_classes, p.ap_count);
    r.c_gd_all = gd_flops(p.gd_iterations, j_all);
    r.c_hi_all = r.c_dae_all + r.c_gd_all;
    r.c_dae_two = dae_flops(p.dae_neurons, 2, q_two, p.ap_count);
    r.c_gd_two = gd_flops(p.gd_iterations, 2);
    r.c_hi_two = r.c_dae_two + r.c_gd_two;
    r.total_two_with_aps = r.c_hi_two + r.c_aps;
    r.reduction_percent = 100.0 * (1.0 - static_cast<double>(r.total_two_with_aps) /
                                             static_cast<double>(r.c_hi_all));
    return r;
}

FlopReport reduction_report_for(const scenario::ScenarioConfig& cfg,
                                std::uint64_t dae_neurons, std::uint64_t aps_neurons,
                                std::uint64_t gd_iterations) {
    FlopParams p;
    p.dae_neurons = dae_neurons;
    p.aps_neurons = aps_neurons;
    p.gd_iterations = gd_iterations;
    p.ap_count = static_cast<std::uint64_t>(cfg.ap_count());
    p.total_classes =
        static_cast<double>(scenario::build_label_space(cfg).total_classes);
    return reduction_report(p);
}

namespace {

std::string with_commas(std::uint64_t v) {
    std::string raw = std::to_string(v);
    std::string out;
    int c = 0;
    for (auto it = raw.rbegin(); it != raw.rend(); ++it) {
        if (c && c % 3 == 0) out.push_back(',');
        out.push_back(*it);
        ++c;
    }
    return {out.rbegin(), out.rend()};
}

}  // namespace

std::string format_table(const FlopReport& r) {
    char buf[160];
    std::ostringstream out;
    out << "inference complexity (FLOPs)\n";
    std::snprintf(buf, sizeof buf, "  D=%llu A=%llu T=%llu I=%llu Q=%g eta=%llu\n\n",
                  (unsigned long long)r.params.dae_neurons,
                  (unsigned long long)r.params.aps_neurons,
                  (unsigned long long)r.params.gd_iterations,
                  (unsigned long long)r.params.ap_count, r.params.total_classes,
                  (unsigned long long)r.params.pair_count());
    out << buf;
    auto row = [&](const char* name, const std::string& all, const std::string& two) {
        std::snprintf(buf, sizeof buf, "  %-28s %14s %14s\n", name, all.c_str(),
                      two.c_str());
        out << buf;
    };
    row("component", "all-ambiguity", "two-ambiguity");
    row("ambiguity estimator (DAE)", with_commas(r.c_dae_all), with_commas(r.c_dae_two));
    row("position solver (GD)", with_commas(r.c_gd_all), with_commas(r.c_gd_two));
    row("hyperbola intersection", with_commas(r.c_hi_all), with_commas(r.c_hi_two));
    row("pair selector (APS)", "-", with_commas(r.c_aps));
    row("total", with_commas(r.c_hi_all), with_commas(r.total_two_with_aps));
    std::snprintf(buf, sizeof buf, "\n  reduction vs all-ambiguity: %.2f%%\n",
                  r.reduction_percent);
    out << buf;
    return out.str();
}

std::string format_tsv(const FlopReport& r) {
    std::ostringstream out;
    out << "key\tvalue\n";
    out << "d\t" << r.params.dae_neurons << "\n";
    out << "a\t" << r.params.aps_neurons << "\n";
    out << "t\t" << r.params.gd_iterations << "\n";
    out << "i\t" << r.params.ap_count << "\n";
    out << "q\t" << r.params.total_classes << "\n";
    out << "eta\t" << r.params.pair_count() << "\n";
    out << "c_aps\t" << r.c_aps << "\n";
    out << "c_dae_all\t" << r.c_dae_all << "\n";
    out << "c_gd_all\t" << r.c_gd_all << "\n";
    out << "c_hi_all\t" << r.c_hi_all << "\n";
    out << "c_dae_two\t" << r.c_dae_two << "\n";
    out << "c_gd_two\t" << r.c_gd_two << "\n";
    out << "c_hi_two\t" << r.c_hi_two << "\n";
    out << "total_two_with_aps\t" << r.total_two_with_aps << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", r.reduction_percent);
    out << "reduction_percent\t" << buf << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// counting scalar

namespace {
thread_local CountingScope* g_scope = nullptr;
thread_local OpCounts* g_counts = nullptr;
}  // namespace

CountingScope::CountingScope() {
    if (g_scope)
        throw std::logic_error("flops: counting scope already active on this thread");
    g_scope = this;
    g_counts = &counts_;
}

CountingScope::~CountingScope() {
    g_scope = nullptr;
    g_counts = nullptr;
}

bool CountingScope::active() { return g_scope != nullptr; }

OpCounts& CountingScope::current() {
    if (!g_counts)
        throw std::logic_error("flops: instrumentation disabled (no counting scope)");
    return *g_counts;
}

namespace {

struct Counted {
    double v;
    Counted() : v(0.0) {}
    explicit Counted(double x) : v(x) {}

    friend Counted operator+(Counted a, Counted b) {
        CountingScope::current().add++;
        return Counted(a.v + b.v);
    }
    friend Counted operator-(Counted a, Counted b) {
        CountingScope::current().add++;
        return Counted(a.v - b.v);
    }
    friend Counted operator*(Counted a, Counted b) {
        CountingScope::current().mul++;
        return Counted(a.v * b.v);
    }
    friend Counted operator/(Counted a, Counted b) {
        CountingScope::current().div++;
        return Counted(a.v / b.v);
    }
    friend Counted sqrt(Counted a) {
        CountingScope::current().sqrt_ops++;
        return Counted(std::sqrt(a.v));
    }
    friend bool operator>(Counted a, Counted b) { return a.v > b.v; }
    friend bool operator<(Counted a, Counted b) { return a.v < b.v; }
};

std::vector<Counted> lift(const std::vector<double>& v) {
    std::vector<Counted> out;
    out.reserve(v.size());
    for (double x : v) out.push_back(Counted(x));
    return out;
}

// dense stack forward on the counting scalar; returns the final output
std::vector<Counted> counted_stack(const std::vector<nn::DenseLayer>& layers,
                                   std::vector<Counted> cur, bool count_activations) {
    for (const auto& l : layers) {
        std::vector<Counted> w = lift(l.w);
        std::vector<Counted> b = lift(l.b);
        std::vector<Counted> next(l.out);
        kernels::ref::matvec(w.data(), l.out, l.in, cur.data(), b.data(), next.data());
        switch (l.act) {
            case nn::Activation::linear:
                break;
            case nn::Activation::relu:
                kernels::ref::relu(next.data(), next.size());
                break;
            case nn::Activation::softmax: {
                double mx = next[0].v;
                for (const auto& x : next) mx = std::max(mx, x.v);
                if (count_activations) {
                    OpCounts& c = CountingScope::current();
                    c.add += 2 * next.size() - 1;  // shifts and the sum
                    c.exp_ops += next.size();
                    c.div += next.size();
                }
                double sum = 0.0;
                for (auto& x : next) {
                    x.v = std::exp(x.v - mx);
                    sum += x.v;
                }
                for (auto& x : next) x.v /= sum;
                break;
            }
        }
        cur = std::move(next);
    }
    return cur;
}

}  // namespace

OpCounts measured_dense_forward(std::size_t n_in, std::size_t n_out,
                                std::uint64_t seed) {
    rng::Stream s(seed, rng::stream_id("dense-measure"));
    std::vector<Counted> w(n_in * n_out), b(n_out), x(n_in), y(n_out);
    for (auto& v : w) v = Counted(s.normal());
    for (auto& v : b) v = Counted(s.normal());
    for (auto& v : x) v = Counted(s.normal());
    CountingScope scope;
    kernels::ref::matvec(w.data(), n_out, n_in, x.data(), b.data(), y.data());
    return scope.counts();
}

OpCounts measured_mlp_forward(const nn::MlpModel& model, const std::vector<double>& x,
                              const std::vector<int>* branches,
                              bool count_activations) {
    if (x.size() != model.input_width)
        throw std::invalid_argument("measured_mlp_forward: input width mismatch");
    CountingScope scope;
    std::vector<Counted> trunk_out =
        counted_stack(model.trunk, lift(x), count_activations);
    if (model.topology == nn::Topology::trunk_with_branches) {
        std::vector<int> all;
        if (!branches) {
            all.resize(model.branch_count());
            for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
            branches = &all;
        }
        for (int b : *branches)
            counted_stack(model.branches.at(b), trunk_out, count_activations);
    }
    return scope.counts();
}

OpCounts measured_gd_iterations(const std::vector<scenario::Vec2>& aps,
                                const std::vector<int>& j_set, int reference,
                                const std::vector<double>& dhat, scenario::Vec2 start,
                                std::size_t iterations, double learning_rate) {
    CountingScope scope;
    Counted px(start.x), py(start.y);
    const double alpha2 = 2.0 * learning_rate;
    for (std::size_t t = 0; t < iterations; ++t)
        gd::gd_step(px, py, aps, j_set, reference, dhat, alpha2);
    return scope.counts();
}

}  // namespace phasepos::flops
