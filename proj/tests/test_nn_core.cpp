#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "checkpoint.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "grad_check.hpp"
#include "layers.hpp"
#include "lstm_model.hpp"
#include "params.hpp"
#include "rng.hpp"
#include "tensor.hpp"
#include "test_util.hpp"

using namespace revcast;
using nn::Graph;
using nn::Node;
using nn::Tensor;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double scale = 1.0) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = scale * rng.uniform(-1.0, 1.0);
    return t;
}

} // namespace

TEST_CASE("rng: deterministic and bounded") {
    Rng a(123), b(123), c(124);
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(u == b.uniform());
    }
    CHECK(a.next_u64() != c.next_u64());

    std::vector<int> v1{1, 2, 3, 4, 5, 6, 7}, v2{1, 2, 3, 4, 5, 6, 7};
    Rng s1(9), s2(9);
    s1.shuffle(v1);
    s2.shuffle(v2);
    CHECK(v1 == v2);
}

TEST_CASE("glorot init stays within the documented limit") {
    Rng rng(7);
    Tensor t = Tensor::matrix(20, 30);
    nn::glorot_init(t, 20, 30, rng);
    const double limit = std::sqrt(6.0 / 50.0);
    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(std::abs(t[i]) <= limit);
    }
}

TEST_CASE("mae: hand values and tie subgradient") {
    Graph g;
    Tensor pred_v({1, 2}, {1.0, 3.0});
    Tensor grad_sink({1, 2});
    Node* pred = g.parameter(pred_v, &grad_sink);
    Node* loss = g.mae(pred, Tensor({1, 2}, {2.0, 1.0}));
    CHECK(loss->scalar() == doctest::Approx(1.5));
    g.backward(loss);
    CHECK(grad_sink[0] == doctest::Approx(-0.5));
    CHECK(grad_sink[1] == doctest::Approx(0.5));

    Graph g2;
    Tensor sink2({1, 2});
    Node* p2 = g2.parameter(Tensor({1, 2}, {4.0, 4.0}), &sink2);
    Node* l2 = g2.mae(p2, Tensor({1, 2}, {4.0, 4.0}));
    CHECK(l2->scalar() == 0.0);
    g2.backward(l2);
    CHECK(sink2[0] == 0.0);
    CHECK(sink2[1] == 0.0);
}

TEST_CASE("mae: gradient matches finite differences away from ties") {
    Rng rng(21);
    const Tensor target = random_tensor({3, 4}, rng);
    const Tensor at = random_tensor({3, 4}, rng);
    Tensor analytic({3, 4});
    {
        Graph g;
        Node* p = g.parameter(at, &analytic);
        g.backward(g.mae(p, target));
    }
    const double err = testutil::max_rel_grad_err(
        [&](const Tensor& t) {
            Graph g;
            Node* p = g.input(t);
            return g.mae(p, target)->scalar();
        },
        at, analytic);
    CHECK(err < 1e-6);
}

TEST_CASE("dense layer: gradients match finite differences on 20 random configs") {
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t b = 1 + rng.uniform_index(4);
        const std::size_t d = 1 + rng.uniform_index(6);
        const std::size_t n = 1 + rng.uniform_index(5);
        const Tensor x = random_tensor({b, d}, rng);
        const Tensor w = random_tensor({d, n}, rng);
        const Tensor bias = random_tensor({n}, rng);
        const Tensor readout = random_tensor({b, n}, rng);

        auto eval = [&](const Tensor& xv, const Tensor& wv, const Tensor& bv) {
            Graph g;
            Node* out = nn::dense(g, g.input(xv), g.input(wv), g.input(bv));
            return g.sum(g.mul(out, g.input(readout)))->scalar();
        };

        Tensor dx({b, d}), dw({d, n}), db({n});
        {
            Graph g;
            Node* out = nn::dense(g, g.parameter(x, &dx), g.parameter(w, &dw),
                                  g.parameter(bias, &db));
            g.backward(g.sum(g.mul(out, g.input(readout))));
        }
        CHECK(testutil::max_rel_grad_err(
                  [&](const Tensor& t) { return eval(t, w, bias); }, x, dx) < 1e-4);
        CHECK(testutil::max_rel_grad_err(
                  [&](const Tensor& t) { return eval(x, t, bias); }, w, dw) < 1e-4);
        CHECK(testutil::max_rel_grad_err(
                  [&](const Tensor& t) { return eval(x, w, t); }, bias, db) < 1e-4);
    }
}

TEST_CASE("lstm cell: zero weights and inputs give zero state") {
    Graph g;
    const std::size_t h = 3, d = 2;
    nn::LstmCellRefs cell{g.input(Tensor::matrix(d, 4 * h)), g.input(Tensor::matrix(h, 4 * h)),
                          g.input(Tensor::vector(4 * h)), h};
    auto [hs, cs] = nn::lstm_cell(g, g.input(Tensor::matrix(1, d)),
                                  g.input(Tensor::matrix(1, h)), g.input(Tensor::matrix(1, h)),
                                  cell);
    for (std::size_t i = 0; i < h; ++i) {
        CHECK(hs->value[i] == 0.0);
        CHECK(cs->value[i] == 0.0);
    }
}

TEST_CASE("lstm cell: scalar cell matches hand-evaluated gates") {
    // 1 input, 1 hidden; packed gate order is [i, f, g, o].
    const double wi = 0.3, wf = -0.4, wg = 0.7, wo = 0.2;
    const double ui = -0.1, uf = 0.5, ug = -0.6, uo = 0.9;
    const double bi = 0.05, bf = 0.1, bg = -0.2, bo = 0.3;
    const double x = 0.8, h_prev = -0.5, c_prev = 0.25;

    const auto sigmoid = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    const double gate_i = sigmoid(wi * x + ui * h_prev + bi);
    const double gate_f = sigmoid(wf * x + uf * h_prev + bf);
    const double gate_g = std::tanh(wg * x + ug * h_prev + bg);
    const double gate_o = sigmoid(wo * x + uo * h_prev + bo);
    const double c_expect = gate_f * c_prev + gate_i * gate_g;
    const double h_expect = gate_o * std::tanh(c_expect);

    Graph g;
    nn::LstmCellRefs cell{g.input(Tensor({1, 4}, {wi, wf, wg, wo})),
                          g.input(Tensor({1, 4}, {ui, uf, ug, uo})),
                          g.input(Tensor({4}, {bi, bf, bg, bo})), 1};
    auto [hs, cs] = nn::lstm_cell(g, g.input(Tensor({1, 1}, {x})),
                                  g.input(Tensor({1, 1}, {h_prev})),
                                  g.input(Tensor({1, 1}, {c_prev})), cell);
    CHECK(hs->value[0] == doctest::Approx(h_expect).epsilon(1e-12));
    CHECK(cs->value[0] == doctest::Approx(c_expect).epsilon(1e-12));
}

TEST_CASE("lstm cell: input gradient matches finite differences") {
    Rng rng(17);
    const std::size_t d = 3, h = 4;
    const Tensor w = random_tensor({d, 4 * h}, rng, 0.6);
    const Tensor u = random_tensor({h, 4 * h}, rng, 0.6);
    const Tensor b = random_tensor({4 * h}, rng, 0.3);
    const Tensor x = random_tensor({2, d}, rng);
    const Tensor h0 = random_tensor({2, h}, rng, 0.4);
    const Tensor c0 = random_tensor({2, h}, rng, 0.4);
    const Tensor readout = random_tensor({2, h}, rng);

    auto eval = [&](const Tensor& xv) {
        Graph g;
        nn::LstmCellRefs cell{g.input(w), g.input(u), g.input(b), h};
        auto [hs, cs] = nn::lstm_cell(g, g.input(xv), g.input(h0), g.input(c0), cell);
        (void)cs;
        return g.sum(g.mul(hs, g.input(readout)))->scalar();
    };
    Tensor dx({2, d});
    {
        Graph g;
        nn::LstmCellRefs cell{g.input(w), g.input(u), g.input(b), h};
        auto [hs, cs] = nn::lstm_cell(g, g.parameter(x, &dx), g.input(h0), g.input(c0), cell);
        (void)cs;
        g.backward(g.sum(g.mul(hs, g.input(readout))));
    }
    CHECK(testutil::max_rel_grad_err(eval, x, dx) < 1e-6);
}

TEST_CASE("lstm cell: parameter gradients match finite differences on 20 random configs") {
    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t d = 1 + rng.uniform_index(3);
        const std::size_t h = 1 + rng.uniform_index(4);
        const std::size_t batch = 1 + rng.uniform_index(3);
        const Tensor w = random_tensor({d, 4 * h}, rng, 0.7);
        const Tensor u = random_tensor({h, 4 * h}, rng, 0.7);
        const Tensor b = random_tensor({4 * h}, rng, 0.3);
        const Tensor x = random_tensor({batch, d}, rng);
        const Tensor h0 = random_tensor({batch, h}, rng, 0.5);
        const Tensor c0 = random_tensor({batch, h}, rng, 0.5);
        const Tensor readout = random_tensor({batch, h}, rng);

        auto eval = [&](const Tensor& wv, const Tensor& uv, const Tensor& bv) {
            Graph g;
            nn::LstmCellRefs cell{g.input(wv), g.input(uv), g.input(bv), h};
            auto [hs, cs] = nn::lstm_cell(g, g.input(x), g.input(h0), g.input(c0), cell);
            (void)cs;
            return g.sum(g.mul(hs, g.input(readout)))->scalar();
        };
        Tensor dw({d, 4 * h}), du({h, 4 * h}), db({4 * h});
        {
            Graph g;
            nn::LstmCellRefs cell{g.parameter(w, &dw), g.parameter(u, &du), g.parameter(b, &db),
                                  h};
            auto [hs, cs] = nn::lstm_cell(g, g.input(x), g.input(h0), g.input(c0), cell);
            (void)cs;
            g.backward(g.sum(g.mul(hs, g.input(readout))));
        }
        CHECK(testutil::max_rel_grad_err(
                  [&](const Tensor& t) { return eval(t, u, b); }, w, dw) < 1e-4);
        CHECK(testutil::max_rel_grad_err(
                  [&](const Tensor& t) { return eval(w, t, b); }, u, du) < 1e-4);
        CHECK(testutil::max_rel_grad_err(
                  [&](const Tensor& t) { return eval(w, u, t); }, b, db) < 1e-4);
    }
}

TEST_CASE("conv1d: identity kernel passes input through") {
    Graph g;
    // Width 2: tap order is [past, current].
    Node* w = g.input(Tensor({1, 1, 2}, {0.0, 1.0}));
    Node* b = g.input(Tensor::vector(1));
    const Tensor x({1, 6}, {1.0, -2.0, 3.0, 0.5, 4.0, -1.0});
    Node* out = g.conv1d_causal(g.input(x), w, b, 1);
    for (std::size_t t = 0; t < 6; ++t) CHECK(out->value[t] == x[t]);
}

TEST_CASE("conv1d: impulse through dilation-4 past tap lands at time 4") {
    Graph g;
    Node* w = g.input(Tensor({1, 1, 2}, {1.0, 0.0})); // w_past=1, w_now=0
    Node* b = g.input(Tensor::vector(1));
    Tensor x = Tensor::matrix(1, 10);
    x[0] = 1.0; // unit impulse at time 0
    Node* out = g.conv1d_causal(g.input(x), w, b, 4);
    for (std::size_t t = 0; t < 10; ++t) {
        CHECK(out->value[t] == (t == 4 ? 1.0 : 0.0));
    }
}

TEST_CASE("conv1d: three-layer stack has an exact lag-8 causality boundary") {
    const int time = 20, probe = 12;
    auto run = [&](const Tensor& x) {
        Graph g;
        Node* cur = g.input(x);
        const int dilations[3] = {1, 2, 4};
        for (const int d : dilations) {
            Node* w = g.input(Tensor({1, 1, 2}, {0.3, 0.6}));
            Node* b = g.input(Tensor({1}, {0.1}));
            cur = g.conv1d_causal(cur, w, b, d);
        }
        return cur->value[static_cast<std::size_t>(probe)];
    };

    Rng rng(5);
    Tensor x = random_tensor({1, time}, rng);
    const double base = run(x);

    Tensor lag8 = x;
    lag8[static_cast<std::size_t>(probe - 8)] += 10.0;
    CHECK(run(lag8) == base); // receptive field is 2^3 = 8: positions probe-7..probe

    Tensor lag7 = x;
    lag7[static_cast<std::size_t>(probe - 7)] += 10.0;
    CHECK(run(lag7) != base);

    Tensor future = x;
    future[static_cast<std::size_t>(probe + 1)] += 10.0;
    CHECK(run(future) == base);
}

TEST_CASE("conv1d: gradients match finite differences on 20 random configs") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t c_in = 1 + rng.uniform_index(3);
        const std::size_t c_out = 1 + rng.uniform_index(3);
        const std::size_t time = 4 + rng.uniform_index(6);
        const int dilation = 1 + static_cast<int>(rng.uniform_index(3));
        const Tensor x = random_tensor({c_in, time}, rng);
        const Tensor w = random_tensor({c_out, c_in, 2}, rng);
        const Tensor b = random_tensor({c_out}, rng, 0.2);
        const Tensor readout = random_tensor({c_out, time}, rng);

        auto eval = [&](const Tensor& xv, const Tensor& wv, const Tensor& bv) {
            Graph g;
            Node* out = g.conv1d_causal(g.input(xv), g.input(wv), g.input(bv), dilation);
            return g.sum(g.mul(out, g.input(readout)))->scalar();
        };
        Tensor dx({c_in, time}), dw({c_out, c_in, 2}), db({c_out});
        {
            Graph g;
            Node* out = g.conv1d_causal(g.parameter(x, &dx), g.parameter(w, &dw),
                                        g.parameter(b, &db), dilation);
            g.backward(g.sum(g.mul(out, g.input(readout))));
        }
        CHECK(testutil::max_rel_grad_err(
                  [&](const Tensor& t) { return eval(t, w, b); }, x, dx) < 1e-4);
        CHECK(testutil::max_rel_grad_err(
                  [&](const Tensor& t) { return eval(x, t, b); }, w, dw) < 1e-4);
        CHECK(testutil::max_rel_grad_err(
                  [&](const Tensor& t) { return eval(x, w, t); }, b, db) < 1e-4);
    }
}

TEST_CASE("adam: zero gradient leaves values unchanged and advances step") {
    nn::ParameterSet params;
    Tensor& t = params.add("w", {3});
    t[0] = 1.0;
    t[1] = -2.0;
    t[2] = 0.5;
    nn::AdamState adam;
    params.zero_grads();
    nn::adam_step(params, adam);
    CHECK(adam.step == 1);
    CHECK(params.value("w")[0] == 1.0);
    CHECK(params.value("w")[1] == -2.0);
    CHECK(params.value("w")[2] == 0.5);
}

TEST_CASE("adam: closed-form first step") {
    nn::ParameterSet params;
    params.add("w", {1});
    params.grad("w")[0] = 1.0;
    nn::AdamState adam; // lr 1e-3, betas (0.9, 0.999), eps 1e-8
    nn::adam_step(params, adam);
    const double expected = -1e-3 * 1.0 / (1.0 + 1e-8);
    CHECK(params.value("w")[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("adam: non-finite gradient raises a training error") {
    nn::ParameterSet params;
    params.add("w", {1});
    params.grad("w")[0] = std::nan("");
    nn::AdamState adam;
    CHECK_THROWS_AS(nn::adam_step(params, adam), TrainingError);
}

TEST_CASE("parameter clipping caps the global norm") {
    nn::ParameterSet params;
    params.add("a", {2});
    params.grad("a")[0] = 30.0;
    params.grad("a")[1] = 40.0; // norm 50
    params.clip_grads(5.0);
    CHECK(params.grad_norm() == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(params.grad("a")[0] == doctest::Approx(3.0));
    CHECK(params.grad("a")[1] == doctest::Approx(4.0));
}

TEST_CASE("checkpoint: round trip restores parameters and moments") {
    LstmConfig cfg;
    cfg.hidden_size = 4;
    cfg.encoder_length = 3;
    cfg.horizon = 2;
    LstmForecaster model(cfg, 11);

    // Take one step so adam moments are non-trivial.
    LstmExample ex;
    ex.encoder_values = {0.1, 0.2, 0.3};
    ex.targets = {0.4, 0.5};
    model.train_step({&ex});

    testutil::TempDir tmp;
    const std::string path = tmp.file("ckpt.json");
    nn::save_checkpoint(model.state(), {{"variant", "test"}}, path);

    LstmForecaster restored(cfg, 999);
    const auto meta = nn::load_checkpoint(path, restored.state());
    CHECK(meta.at("variant") == "test");
    CHECK(restored.state().params.content_hash() == model.state().params.content_hash());
    CHECK(restored.state().adam.step == model.state().adam.step);

    // Same history must now forecast identically.
    const std::vector<double> history{0.1, 0.2, 0.3};
    CHECK(model.forecast(history, nullptr, 2) == restored.forecast(history, nullptr, 2));
}

TEST_CASE("checkpoint: shape mismatch rejected") {
    LstmConfig small;
    small.hidden_size = 3;
    small.encoder_length = 3;
    small.horizon = 2;
    LstmForecaster model(small, 1);
    testutil::TempDir tmp;
    const std::string path = tmp.file("ckpt.json");
    nn::save_checkpoint(model.state(), {}, path);

    LstmConfig big = small;
    big.hidden_size = 5;
    LstmForecaster other(big, 1);
    CHECK_THROWS_AS(nn::load_checkpoint(path, other.state()), ValidationError);
}

TEST_CASE("seeded init is bit-reproducible") {
    LstmConfig cfg;
    cfg.hidden_size = 8;
    LstmForecaster a(cfg, 77), b(cfg, 77), c(cfg, 78);
    CHECK(a.state().params.content_hash() == b.state().params.content_hash());
    CHECK(a.state().params.content_hash() != c.state().params.content_hash());
}
