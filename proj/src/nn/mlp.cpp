#include "nn/mlp.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "kernels/kernels.hpp"
#include "util/rng.hpp"

namespace phasepos::nn {

namespace {

void apply_activation(Activation act, double* x, std::size_t n) {
    switch (act) {
        case Activation::linear:
            break;
        case Activation::relu:
            kernels::relu(x, n);
            break;
        case Activation::softmax: {
            double mx = x[0];
            for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, x[i]);
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] = std::exp(x[i] - mx);
                sum += x[i];
            }
            for (std::size_t i = 0; i < n; ++i) x[i] /= sum;
            break;
        }
    }
}

void validate_stack(const std::vector<DenseLayer>& layers, std::size_t in_width,
                    bool head_allowed) {
    std::size_t w = in_width;
    for (std::size_t li = 0; li < layers.size(); ++li) {
        const DenseLayer& l = layers[li];
        if (l.in != w) throw std::invalid_argument("mlp: layer width mismatch");
        if (l.w.size() != l.in * l.out || l.b.size() != l.out)
            throw std::invalid_argument("mlp: layer buffer size mismatch");
        if (l.act == Activation::softmax && !(head_allowed && li + 1 == layers.size()))
            throw std::invalid_argument("mlp: softmax only as final head activation");
        w = l.out;
    }
}

}  // namespace

std::size_t MlpModel::trunk_output_width() const {
    return trunk.empty() ? input_width : trunk.back().out;
}

std::size_t MlpModel::output_width(std::size_t branch) const {
    if (topology == Topology::plain) return trunk_output_width();
    return branches.at(branch).back().out;
}

std::size_t MlpModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : trunk) n += l.w.size() + l.b.size();
    for (const auto& br : branches)
        for (const auto& l : br) n += l.w.size() + l.b.size();
    return n;
}

void MlpModel::validate() const {
    if (input_width == 0) throw std::invalid_argument("mlp: zero input width");
    if (!feat_mean.empty() &&
        (feat_mean.size() != input_width || feat_std.size() != input_width))
        throw std::invalid_argument("mlp: standardization width mismatch");
    if (topology == Topology::plain) {
        if (!branches.empty())
            throw std::invalid_argument("mlp: plain model with branches");
        if (trunk.empty()) throw std::invalid_argument("mlp: empty model");
        validate_stack(trunk, input_width, true);
    } else {
        if (branches.empty())
            throw std::invalid_argument("mlp: branched model without branches");
        validate_stack(trunk, input_width, false);
        for (const auto& br : branches) {
            if (br.empty()) throw std::invalid_argument("mlp: empty branch");
            validate_stack(br, trunk_output_width(), true);
        }
    }
}

MlpModel make_plain(const std::vector<std::size_t>& widths,
                    const std::vector<Activation>& acts) {
    if (widths.size() < 2 || acts.size() != widths.size() - 1)
        throw std::invalid_argument("make_plain: need n widths and n-1 activations");
    MlpModel m;
    m.topology = Topology::plain;
    m.input_width = widths[0];
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        DenseLayer l;
        l.in = widths[i];
        l.out = widths[i + 1];
        l.w.assign(l.in * l.out, 0.0);
        l.b.assign(l.out, 0.0);
        l.act = acts[i];
        m.trunk.push_back(std::move(l));
    }
    return m;
}

void standardize_input(const MlpModel& m, std::span<const double> x, double* out) {
    if (m.feat_mean.empty()) {
        std::memcpy(out, x.data(), x.size() * sizeof(double));
        return;
    }
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = (x[i] - m.feat_mean[i]) / m.feat_std[i];
}

std::vector<double> run_layers(const std::vector<DenseLayer>& layers,
                               std::vector<double> input) {
    std::vector<double> next;
    for (const DenseLayer& l : layers) {
        next.resize(l.out);
        kernels::matvec(l.w.data(), l.out, l.in, input.data(), l.b.data(), next.data());
        apply_activation(l.act, next.data(), l.out);
        input.swap(next);
    }
    return input;
}

std::vector<double> forward_trunk(const MlpModel& m, std::span<const double> x) {
    if (x.size() != m.input_width) throw std::invalid_argument("forward: input width");
    std::vector<double> cur(m.input_width);
    standardize_input(m, x, cur.data());
    return run_layers(m.trunk, std::move(cur));
}

std::vector<std::vector<double>> forward(const MlpModel& m, std::span<const double> x,
                                         const std::vector<int>* branches) {
    std::vector<double> trunk_out = forward_trunk(m, x);
    if (m.topology == Topology::plain) return {std::move(trunk_out)};

    std::vector<int> all;
    if (!branches) {
        all.resize(m.branch_count());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
        branches = &all;
    }
    std::vector<std::vector<double>> outs;
    outs.reserve(branches->size());
    for (int bi : *branches) {
        if (bi < 0 || static_cast<std::size_t>(bi) >= m.branch_count())
            throw std::invalid_argument("forward: branch index out of range");
        outs.push_back(run_layers(m.branches[bi], trunk_out));
    }
    return outs;
}

void init_weights(MlpModel& m, std::uint64_t seed) {
    std::uint64_t layer_index = 0;
    auto init_layer = [&](DenseLayer& l) {
        rng::Stream stream(seed, rng::stream_id("init", layer_index++));
        // He for relu, Xavier otherwise
        double scale = l.act == Activation::relu ? std::sqrt(2.0 / l.in)
                                                 : std::sqrt(1.0 / l.in);
        for (auto& w : l.w) w = stream.normal(0.0, scale);
        for (auto& b : l.b) b = 0.0;
    };
    for (auto& l : m.trunk) init_layer(l);
    for (auto& br : m.branches)
        for (auto& l : br) init_layer(l);
    m.trained = false;
}

namespace {

constexpr char kMagic[8] = {'P', 'P', 'N', 'N', 'M', 'D', 'L', '\0'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
void get(std::ifstream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw std::runtime_error("model file truncated");
}

void put_vec(std::ofstream& out, const std::vector<double>& v) {
    put(out, static_cast<std::uint64_t>(v.size()));
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void get_vec(std::ifstream& in, std::vector<double>& v) {
    std::uint64_t n = 0;
    get(in, n);
    if (n > (1ull << 32)) throw std::runtime_error("model file corrupt (vector size)");
    v.resize(n);
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw std::runtime_error("model file truncated");
}

void put_layer(std::ofstream& out, const DenseLayer& l) {
    put(out, static_cast<std::uint64_t>(l.in));
    put(out, static_cast<std::uint64_t>(l.out));
    put(out, static_cast<std::uint8_t>(l.act));
    put_vec(out, l.w);
    put_vec(out, l.b);
}

DenseLayer get_layer(std::ifstream& in) {
    DenseLayer l;
    std::uint64_t in_w = 0, out_w = 0;
    std::uint8_t act = 0;
    get(in, in_w);
    get(in, out_w);
    get(in, act);
    if (act > 2) throw std::runtime_error("model file corrupt (activation tag)");
    l.in = in_w;
    l.out = out_w;
    l.act = static_cast<Activation>(act);
    get_vec(in, l.w);
    get_vec(in, l.b);
    return l;
}

}  // namespace

void save_model(const MlpModel& m, const std::string& path) {
    m.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model: " + path);
    out.write(kMagic, sizeof kMagic);
    put(out, kVersion);
    put(out, static_cast<std::uint8_t>(m.topology));
    put(out, static_cast<std::uint8_t>(m.trained ? 1 : 0));
    put(out, static_cast<std::uint64_t>(m.input_width));
    put_vec(out, m.feat_mean);
    put_vec(out, m.feat_std);
    put(out, static_cast<std::uint64_t>(m.trunk.size()));
    for (const auto& l : m.trunk) put_layer(out, l);
    put(out, static_cast<std::uint64_t>(m.branches.size()));
    for (const auto& br : m.branches) {
        put(out, static_cast<std::uint64_t>(br.size()));
        for (const auto& l : br) put_layer(out, l);
    }
    if (!out) throw std::runtime_error("model write failed: " + path);
}

MlpModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model: " + path);
    char magic[8] = {};
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw std::runtime_error(path + ": not a phasepos model file");
    std::uint32_t version = 0;
    get(in, version);
    if (version != kVersion)
        throw std::runtime_error(path + ": unsupported model schema version " +
                                 std::to_string(version));
    MlpModel m;
    std::uint8_t topo = 0, trained = 0;
    get(in, topo);
    get(in, trained);
    if (topo > 1) throw std::runtime_error(path + ": corrupt topology tag");
    m.topology = static_cast<Topology>(topo);
    m.trained = trained != 0;
    std::uint64_t iw = 0;
    get(in, iw);
    m.input_width = iw;
    get_vec(in, m.feat_mean);
    get_vec(in, m.feat_std);
    std::uint64_t ntrunk = 0;
    get(in, ntrunk);
    for (std::uint64_t i = 0; i < ntrunk; ++i) m.trunk.push_back(get_layer(in));
    std::uint64_t nbranches = 0;
    get(in, nbranches);
    for (std::uint64_t i = 0; i < nbranches; ++i) {
        std::uint64_t nl = 0;
        get(in, nl);
        std::vector<DenseLayer> br;
        for (std::uint64_t k = 0; k < nl; ++k) br.push_back(get_layer(in));
        m.branches.push_back(std::move(br));
    }
    m.validate();
    return m;
}

}  // namespace phasepos::nn
