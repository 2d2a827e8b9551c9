#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "nn/mlp.hpp"
#include "nn/train.hpp"
#include "util/rng.hpp"

using namespace phasepos;
using nn::Activation;
using nn::MlpModel;

namespace {

// central finite differences over every parameter, the independent oracle
// for backprop
void check_gradients_fd(MlpModel& model, const nn::TrainData& data, nn::Loss loss,
                        double step = 1e-5, double tol = 1e-4) {
    std::vector<std::size_t> idx(data.n);
    for (std::size_t i = 0; i < data.n; ++i) idx[i] = i;
    nn::ModelGrads grads = nn::ModelGrads::zeros_like(model);
    nn::batch_gradient(model, data, idx, loss, grads);

    auto check_layer = [&](nn::DenseLayer& l, const nn::LayerGrads& g) {
        auto probe = [&](std::vector<double>& params, const std::vector<double>& grad) {
            for (std::size_t i = 0; i < params.size(); ++i) {
                double orig = params[i];
                params[i] = orig + step;
                double up = nn::batch_loss(model, data, idx, loss);
                params[i] = orig - step;
                double dn = nn::batch_loss(model, data, idx, loss);
                params[i] = orig;
                double fd = (up - dn) / (2.0 * step);
                double scale = std::max({1.0, std::abs(fd), std::abs(grad[i])});
                REQUIRE(std::abs(fd - grad[i]) <= tol * scale);
            }
        };
        probe(l.w, g.w);
        probe(l.b, g.b);
    };
    for (std::size_t li = 0; li < model.trunk.size(); ++li)
        check_layer(model.trunk[li], grads.trunk[li]);
    for (std::size_t b = 0; b < model.branches.size(); ++b)
        for (std::size_t li = 0; li < model.branches[b].size(); ++li)
            check_layer(model.branches[b][li], grads.branches[b][li]);
}

nn::TrainData random_regression_data(std::size_t n, std::size_t in, std::size_t out,
                                     std::uint64_t seed) {
    rng::Stream s(seed, 0);
    nn::TrainData d;
    d.n = n;
    d.in_width = in;
    d.target_width = out;
    d.inputs.resize(n * in);
    d.targets.resize(n * out);
    for (auto& v : d.inputs) v = s.normal();
    for (auto& v : d.targets) v = s.normal();
    return d;
}

nn::DenseLayer dense(std::size_t in, std::size_t out, Activation a) {
    nn::DenseLayer l;
    l.in = in;
    l.out = out;
    l.w.assign(in * out, 0.0);
    l.b.assign(out, 0.0);
    l.act = a;
    return l;
}

}  // namespace

TEST_CASE("identity-weight linear model reproduces its input") {
    MlpModel m = nn::make_plain({4, 4}, {Activation::linear});
    for (std::size_t i = 0; i < 4; ++i) m.trunk[0].w[i * 4 + i] = 1.0;
    m.trained = true;
    std::vector<double> x{0.5, -1.5, 2.0, 0.0};
    auto y = nn::forward(m, x)[0];
    CHECK(y == x);
}

TEST_CASE("softmax head outputs sum to one") {
    rng::Stream s(42, 0);
    MlpModel m = nn::make_plain({6, 9, 5}, {Activation::relu, Activation::softmax});
    nn::init_weights(m, 11);
    for (int k = 0; k < 100; ++k) {
        std::vector<double> x(6);
        for (auto& v : x) v = s.normal(0.0, 3.0);
        auto y = nn::forward(m, x)[0];
        double sum = 0.0;
        for (double p : y) {
            CHECK(p >= 0.0);
            sum += p;
        }
        REQUIRE(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("branch gating equals the matching slice of the all-branch forward") {
    MlpModel m;
    m.topology = nn::Topology::trunk_with_branches;
    m.input_width = 5;
    m.trunk.push_back(dense(5, 7, Activation::relu));
    for (int b = 0; b < 4; ++b) {
        std::vector<nn::DenseLayer> br{dense(7, 6, Activation::relu),
                                       dense(6, 3 + b, Activation::softmax)};
        m.branches.push_back(std::move(br));
    }
    nn::init_weights(m, 3);
    rng::Stream s(1, 1);
    std::vector<double> x(5);
    for (auto& v : x) v = s.normal();
    auto all = nn::forward(m, x);
    std::vector<int> sel{1, 3};
    auto gated = nn::forward(m, x, &sel);
    CHECK(gated[0] == all[1]);
    CHECK(gated[1] == all[3]);
}

TEST_CASE("oracle: backprop matches central finite differences (mse, plain)") {
    MlpModel m = nn::make_plain({3, 8, 6, 2},
                                {Activation::relu, Activation::relu, Activation::linear});
    nn::init_weights(m, 17);
    auto data = random_regression_data(5, 3, 2, 23);
    check_gradients_fd(m, data, nn::Loss::mse);
}

TEST_CASE("oracle: backprop matches central finite differences (ce, branched)") {
    MlpModel m;
    m.topology = nn::Topology::trunk_with_branches;
    m.input_width = 4;
    m.trunk.push_back(dense(4, 6, Activation::relu));
    m.trunk.push_back(dense(6, 6, Activation::relu));
    for (int b = 0; b < 3; ++b)
        m.branches.push_back({dense(6, 5, Activation::relu),
                              dense(5, 4, Activation::softmax)});
    nn::init_weights(m, 29);

    rng::Stream s(31, 0);
    nn::TrainData data;
    data.n = 6;
    data.in_width = 4;
    data.inputs.resize(24);
    for (auto& v : data.inputs) v = s.normal();
    data.labels.resize(data.n * 3);
    for (auto& l : data.labels) l = static_cast<int>(s.uniform() * 4);
    check_gradients_fd(m, data, nn::Loss::cross_entropy_per_head);
}

TEST_CASE("branch gradients are independent across branches") {
    MlpModel m;
    m.topology = nn::Topology::trunk_with_branches;
    m.input_width = 3;
    m.trunk.push_back(dense(3, 5, Activation::relu));
    m.branches.push_back({dense(5, 4, Activation::softmax)});
    m.branches.push_back({dense(5, 4, Activation::softmax)});
    nn::init_weights(m, 5);

    rng::Stream s(6, 0);
    nn::TrainData data;
    data.n = 4;
    data.in_width = 3;
    data.inputs.resize(12);
    for (auto& v : data.inputs) v = s.normal();
    data.labels = {0, 1, 2, 3, 1, 0, 3, 2};

    // perturb branch 1's weights: branch 0's gradient must not move
    nn::ModelGrads g0 = nn::ModelGrads::zeros_like(m);
    std::vector<std::size_t> idx{0, 1, 2, 3};
    nn::batch_gradient(m, data, idx, nn::Loss::cross_entropy_per_head, g0);
    m.branches[1][0].w[7] += 0.5;
    nn::ModelGrads g1 = nn::ModelGrads::zeros_like(m);
    nn::batch_gradient(m, data, idx, nn::Loss::cross_entropy_per_head, g1);
    CHECK(g0.branches[0][0].w == g1.branches[0][0].w);
    CHECK(g0.branches[0][0].b == g1.branches[0][0].b);
}

TEST_CASE("linear 1->1 regression recovers y = 2x") {
    MlpModel m = nn::make_plain({1, 1}, {Activation::linear});
    rng::Stream s(77, 0);
    nn::TrainData data;
    data.n = 256;
    data.in_width = 1;
    data.target_width = 1;
    for (std::size_t i = 0; i < data.n; ++i) {
        double x = s.uniform(-2.0, 2.0);
        data.inputs.push_back(x);
        data.targets.push_back(2.0 * x);
    }
    nn::TrainConfig cfg;
    cfg.loss = nn::Loss::mse;
    cfg.epochs = 400;
    cfg.batch_size = 32;
    cfg.learning_rate = 0.02;
    cfg.validation_fraction = 0.1;
    cfg.standardize_inputs = false;
    cfg.seed = 2;
    auto r = nn::train(m, data, cfg);
    CHECK(m.trunk[0].w[0] == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(std::abs(m.trunk[0].b[0]) < 1e-3);
    CHECK(r.val_loss.back() <= r.val_loss.front());
}

TEST_CASE("cross-entropy on separable 2-class data reaches 100% train accuracy") {
    // class = sign(x0 + x1) with a margin
    MlpModel m = nn::make_plain({2, 8, 2}, {Activation::relu, Activation::softmax});
    rng::Stream s(99, 0);
    nn::TrainData data;
    data.n = 200;
    data.in_width = 2;
    for (std::size_t i = 0; i < data.n; ++i) {
        double x0 = s.uniform(-1.0, 1.0);
        double x1 = s.uniform(-1.0, 1.0);
        double v = x0 + x1;
        if (std::abs(v) < 0.1) {
            v = v < 0 ? -0.1 : 0.1;
            x1 = v - x0;
        }
        data.inputs.push_back(x0);
        data.inputs.push_back(x1);
        data.labels.push_back(v > 0 ? 1 : 0);
    }
    nn::TrainConfig cfg;
    cfg.loss = nn::Loss::cross_entropy_per_head;
    cfg.epochs = 200;
    cfg.batch_size = 32;
    cfg.learning_rate = 5e-3;
    cfg.validation_fraction = 0.0;
    cfg.standardize_inputs = false;
    cfg.seed = 3;
    nn::train(m, data, cfg);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.n; ++i) {
        std::vector<double> x{data.inputs[2 * i], data.inputs[2 * i + 1]};
        auto p = nn::forward(m, x)[0];
        int cls = p[1] > p[0] ? 1 : 0;
        hits += cls == data.labels[i];
    }
    CHECK(hits == data.n);
}

TEST_CASE("training is deterministic for a fixed seed and any thread count") {
    auto data = random_regression_data(128, 4, 3, 55);
    nn::TrainConfig cfg;
    cfg.loss = nn::Loss::mse;
    cfg.epochs = 5;
    cfg.batch_size = 16;
    cfg.seed = 42;

    MlpModel a = nn::make_plain({4, 10, 3}, {Activation::relu, Activation::linear});
    MlpModel b = a;
    MlpModel c = a;
    cfg.threads = 1;
    nn::train(a, data, cfg);
    nn::train(b, data, cfg);
    cfg.threads = 2;
    nn::train(c, data, cfg);
    CHECK(a.trunk[0].w == b.trunk[0].w);
    CHECK(a.trunk[1].w == b.trunk[1].w);
    CHECK(a.trunk[0].w == c.trunk[0].w);
    CHECK(a.trunk[1].w == c.trunk[1].w);
    CHECK(a.trunk[1].b == c.trunk[1].b);
}

TEST_CASE("NaN loss aborts with a diagnostic") {
    auto data = random_regression_data(64, 3, 2, 7);
    for (auto& v : data.targets) v *= 1e155;  // overflow the squared loss
    MlpModel m = nn::make_plain({3, 2}, {Activation::linear});
    nn::TrainConfig cfg;
    cfg.loss = nn::Loss::mse;
    cfg.epochs = 3;
    cfg.learning_rate = 1e10;
    CHECK_THROWS_WITH_AS(nn::train(m, data, cfg),
                         doctest::Contains("non-finite loss"), std::runtime_error);
}

TEST_CASE("model files round-trip bit-exactly and reject damage") {
    MlpModel m;
    m.topology = nn::Topology::trunk_with_branches;
    m.input_width = 6;
    m.trunk.push_back(dense(6, 9, Activation::relu));
    m.branches.push_back({dense(9, 4, Activation::softmax)});
    m.branches.push_back({dense(9, 7, Activation::softmax)});
    nn::init_weights(m, 13);
    m.trained = true;
    m.feat_mean.assign(6, 0.25);
    m.feat_std.assign(6, 2.0);

    std::string path = "/tmp/phasepos_model_rt.bin";
    nn::save_model(m, path);
    auto back = nn::load_model(path);
    CHECK(back.trained);
    rng::Stream s(21, 0);
    for (int k = 0; k < 100; ++k) {
        std::vector<double> x(6);
        for (auto& v : x) v = s.normal();
        auto y0 = nn::forward(m, x);
        auto y1 = nn::forward(back, x);
        REQUIRE(y0 == y1);
    }

    std::string whole;
    {
        FILE* f = fopen(path.c_str(), "rb");
        REQUIRE(f);
        char buf[4096];
        size_t got;
        while ((got = fread(buf, 1, sizeof buf, f)) > 0) whole.append(buf, got);
        fclose(f);
    }
    // truncation -> load error
    std::string cut = whole.substr(0, whole.size() / 2);
    FILE* f = fopen("/tmp/phasepos_model_cut.bin", "wb");
    fwrite(cut.data(), 1, cut.size(), f);
    fclose(f);
    CHECK_THROWS(nn::load_model("/tmp/phasepos_model_cut.bin"));

    // version bump -> explicit schema error, not a silent misread
    std::string bumped = whole;
    bumped[8] = 99;  // version field follows the 8-byte magic
    f = fopen("/tmp/phasepos_model_ver.bin", "wb");
    fwrite(bumped.data(), 1, bumped.size(), f);
    fclose(f);
    CHECK_THROWS_WITH_AS(nn::load_model("/tmp/phasepos_model_ver.bin"),
                         doctest::Contains("schema version"), std::runtime_error);

    std::remove(path.c_str());
    std::remove("/tmp/phasepos_model_cut.bin");
    std::remove("/tmp/phasepos_model_ver.bin");
}
