#include <gtest/gtest.h>

#include <cmath>

#include "lpnet/nets.hpp"
#include "lpnet/network.hpp"
#include "lpnet/optimizer.hpp"
#include "lpnet/rng.hpp"

using namespace lpnet;

namespace {

void naive_gemm(const double* a, const double* b, double* c, std::size_t m,
                std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < k; ++t) s += a[i * k + t] * b[t * n + j];
            c[i * n + j] += s;
        }
}

TEST(Autodiff, GemmVariantsMatchNaiveProduct) {
    Rng rng(7);
    const std::size_t m = 5, k = 7, n = 4;
    std::vector<double> a(m * k), b(k * n);
    for (double& v : a) v = rng.uniform(-2.0, 2.0);
    for (double& v : b) v = rng.uniform(-2.0, 2.0);

    std::vector<double> want(m * n, 0.0), got(m * n, 0.0);
    naive_gemm(a.data(), b.data(), want.data(), m, k, n);
    gemm_acc(a.data(), b.data(), got.data(), m, k, n);
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_DOUBLE_EQ(got[i], want[i]);

    // A^T * B with A stored as [k, m]
    std::vector<double> at(k * m);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < m; ++j) at[i * m + j] = a[j * k + i];
    std::fill(got.begin(), got.end(), 0.0);
    gemm_at_acc(at.data(), b.data(), got.data(), m, k, n);
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_DOUBLE_EQ(got[i], want[i]);

    // A * B^T with B stored as [n, k]
    std::vector<double> bt(n * k);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) bt[i * k + j] = b[j * n + i];
    std::fill(got.begin(), got.end(), 0.0);
    gemm_bt_acc(a.data(), bt.data(), got.data(), m, k, n);
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_DOUBLE_EQ(got[i], want[i]);
}

TEST(Autodiff, LinearHandCheckedGradients) {
    Rng rng(1);
    Linear lin(3, 1, rng);
    lin.weight().data = {1.0, 2.0, 3.0};
    lin.bias().data = {0.5};

    Tensor x({1, 3}, {1.0, 2.0, 3.0});
    Tensor y = lin.forward(x);
    EXPECT_DOUBLE_EQ(y[0], 14.5);

    Tensor dx = lin.backward(Tensor({1, 1}, {1.0}));
    EXPECT_DOUBLE_EQ(dx[0], 1.0);
    EXPECT_DOUBLE_EQ(dx[1], 2.0);
    EXPECT_DOUBLE_EQ(dx[2], 3.0);
    EXPECT_DOUBLE_EQ(lin.weight().grad[0], 1.0);
    EXPECT_DOUBLE_EQ(lin.weight().grad[1], 2.0);
    EXPECT_DOUBLE_EQ(lin.weight().grad[2], 3.0);
    EXPECT_DOUBLE_EQ(lin.bias().grad[0], 1.0);
}

TEST(Autodiff, BiasFreeLinearOmitsBiasEverywhere) {
    Rng rng(1);
    Linear lin(3, 1, rng, /*bias=*/false);
    lin.weight().data = {1.0, 2.0, 3.0};
    lin.bias().data = {0.5}; // present but inert

    Tensor y = lin.forward(Tensor({1, 3}, {1.0, 2.0, 3.0}));
    EXPECT_DOUBLE_EQ(y[0], 14.0);
    lin.backward(Tensor({1, 1}, {1.0}));
    EXPECT_DOUBLE_EQ(lin.bias().grad[0], 0.0);

    ASSERT_EQ(lin.parameters().size(), 1u);
    EXPECT_EQ(lin.parameters()[0].name, "weight");
    EXPECT_EQ(lin.describe(), "linear:in=3,out=1,bias=0");

    // round-trips through an architecture string
    Network net = network_from_arch("flatten;linear:in=3,out=1,bias=0", rng);
    EXPECT_EQ(net.describe(), "flatten;linear:in=3,out=1,bias=0");
    Network biased = network_from_arch("flatten;linear:in=3,out=1", rng);
    EXPECT_EQ(biased.parameters().size(), 2u);
}

TEST(Autodiff, ConvHandCheckedForward) {
    Rng rng(1);
    Conv2d conv(1, 1, 2, rng);
    conv.weight().data = {1.0, 0.0, 0.0, -1.0};
    conv.bias().data = {0.5};

    std::vector<double> px(9);
    for (std::size_t i = 0; i < 9; ++i) px[i] = static_cast<double>(i);
    Tensor x({1, 1, 3, 3}, px);
    Tensor y = conv.forward(x);
    ASSERT_EQ(y.shape, (Shape{1, 1, 2, 2}));
    for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(y[i], -3.5);

    Conv2d padded(1, 1, 3, rng, 1, 1);
    Tensor yp = padded.forward(x);
    EXPECT_EQ(yp.shape, (Shape{1, 1, 3, 3}));

    Conv2d strided(1, 1, 2, rng, 2, 0);
    Tensor ys = strided.forward(Tensor({1, 1, 4, 4}, 0.0));
    EXPECT_EQ(ys.shape, (Shape{1, 1, 2, 2}));
}

TEST(Autodiff, MaxPoolRoutesGradientToArgmax) {
    std::vector<double> px(16);
    for (std::size_t i = 0; i < 16; ++i) px[i] = static_cast<double>(i);
    MaxPool2d pool(2, 2);
    Tensor y = pool.forward(Tensor({1, 1, 4, 4}, px));
    ASSERT_EQ(y.shape, (Shape{1, 1, 2, 2}));
    EXPECT_DOUBLE_EQ(y[0], 5.0);
    EXPECT_DOUBLE_EQ(y[1], 7.0);
    EXPECT_DOUBLE_EQ(y[2], 13.0);
    EXPECT_DOUBLE_EQ(y[3], 15.0);

    Tensor dx = pool.backward(Tensor({1, 1, 2, 2}, {1.0, 2.0, 3.0, 4.0}));
    double sum = 0.0;
    for (double v : dx.data) sum += v;
    EXPECT_DOUBLE_EQ(sum, 10.0);
    EXPECT_DOUBLE_EQ(dx[5], 1.0);
    EXPECT_DOUBLE_EQ(dx[7], 2.0);
    EXPECT_DOUBLE_EQ(dx[13], 3.0);
    EXPECT_DOUBLE_EQ(dx[15], 4.0);
}

TEST(Autodiff, FlattenPreservesDataAndShape) {
    Rng rng(2);
    Tensor x = Tensor::randn({2, 3, 2, 2}, rng, 1.0);
    Flatten flat;
    Tensor y = flat.forward(x);
    ASSERT_EQ(y.shape, (Shape{2, 12}));
    for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_DOUBLE_EQ(y[i], x[i]);
    Tensor dx = flat.backward(y);
    EXPECT_EQ(dx.shape, x.shape);
}

TEST(Autodiff, ActivationLayerAccumulatesParamGrads) {
    ActivationSpec spec = af_init(ActivationKind::lp_relu2);
    spec.A = 0.5;
    spec.B = 1.0;
    ActivationLayer act(spec);
    ASSERT_EQ(act.parameters().size(), 4u);

    Tensor x({1, 4}, {-1.0, 0.25, 0.75, 2.0});
    Tensor y = act.forward(x);
    EXPECT_DOUBLE_EQ(y[0], 0.0);
    EXPECT_DOUBLE_EQ(y[1], 0.25);
    EXPECT_DOUBLE_EQ(y[2], 0.5 + 0.05 * 0.25);
    EXPECT_DOUBLE_EQ(y[3], 0.5 + 0.05 * 0.5 + spec.beta * 1.0);

    act.backward(Tensor::full({1, 4}, 1.0));
    AfParamGrads want;
    for (double v : x.data) {
        const AfParamGrads g = af_param_gradients(spec, v);
        want.dA += g.dA;
        want.dB += g.dB;
        want.dalpha += g.dalpha;
        want.dbeta += g.dbeta;
    }
    for (const Param& p : act.parameters()) {
        if (std::string(p.name) == "A") EXPECT_DOUBLE_EQ(p.tensor->grad[0], want.dA);
        if (std::string(p.name) == "B") EXPECT_DOUBLE_EQ(p.tensor->grad[0], want.dB);
        if (std::string(p.name) == "alpha")
            EXPECT_DOUBLE_EQ(p.tensor->grad[0], want.dalpha);
        if (std::string(p.name) == "beta") EXPECT_DOUBLE_EQ(p.tensor->grad[0], want.dbeta);
    }
}

Network tiny_net(Rng& rng) {
    Network net;
    net.emplace<Conv2d>(1, 2, 3, rng);
    ActivationSpec spec = af_init(ActivationKind::lp_relu2);
    spec.A = 0.6;
    spec.B = 1.2;
    net.emplace<ActivationLayer>(spec);
    net.emplace<MaxPool2d>(2, 2);
    net.emplace<Flatten>();
    net.emplace<Linear>(2 * 3 * 3, 4, rng);
    return net;
}

TEST(Autodiff, NetworkGradientsMatchFiniteDifferences) {
    Rng rng(11);
    Network net = tiny_net(rng);
    Tensor x = Tensor::randn({3, 1, 8, 8}, rng, 0.8);
    const std::vector<std::size_t> labels{0, 2, 3};

    net.zero_grad();
    LossGrad lg = softmax_cross_entropy(net.forward(x), labels);
    net.backward(lg.dlogits);

    auto loss_at = [&]() {
        return softmax_cross_entropy(net.forward(x), labels).loss;
    };

    const double h = 1e-6;
    for (const Param& p : net.parameters()) {
        Rng pick(std::hash<std::string>{}(p.name));
        const std::size_t probes = std::min<std::size_t>(p.tensor->numel(), 12);
        for (std::size_t rep = 0; rep < probes; ++rep) {
            const std::size_t j = pick.uniform_index(p.tensor->numel());
            const double keep = p.tensor->data[j];
            p.tensor->data[j] = keep + h;
            const double up = loss_at();
            p.tensor->data[j] = keep - h;
            const double dn = loss_at();
            p.tensor->data[j] = keep;
            const double numeric = (up - dn) / (2 * h);
            EXPECT_NEAR(p.tensor->grad[j], numeric, 5e-6 + 2e-3 * std::abs(numeric))
                << p.name << "[" << j << "]";
        }
    }
}

TEST(Autodiff, NetworkInputGradientMatchesFiniteDifferences) {
    Rng rng(12);
    Network net = tiny_net(rng);
    Tensor x = Tensor::randn({1, 1, 8, 8}, rng, 0.8);
    const std::vector<std::size_t> labels{1};

    // the input gradient falls out of the first layer's backward
    net.zero_grad();
    Tensor dx = [&] {
        LossGrad l = softmax_cross_entropy(net.forward(x), labels);
        Tensor cur = l.dlogits;
        for (std::size_t i = net.size(); i-- > 0;) cur = net.layer(i).backward(cur);
        return cur;
    }();
    ASSERT_EQ(dx.shape, x.shape);

    const double h = 1e-6;
    Rng pick(13);
    for (int rep = 0; rep < 12; ++rep) {
        const std::size_t j = pick.uniform_index(x.numel());
        const double keep = x[j];
        x.data[j] = keep + h;
        const double up = softmax_cross_entropy(net.forward(x), labels).loss;
        x.data[j] = keep - h;
        const double dn = softmax_cross_entropy(net.forward(x), labels).loss;
        x.data[j] = keep;
        const double numeric = (up - dn) / (2 * h);
        EXPECT_NEAR(dx[j], numeric, 5e-6 + 2e-3 * std::abs(numeric)) << "x[" << j << "]";
    }
}

TEST(Autodiff, BackwardRequiresForwardTape) {
    Rng rng(3);
    Network net = tiny_net(rng);
    Tensor g({3, 4}, 0.0);
    EXPECT_THROW(net.backward(g), Error);

    Tensor x = Tensor::randn({3, 1, 8, 8}, rng, 1.0);
    net.forward(x);
    EXPECT_NO_THROW(net.backward(g));
    EXPECT_THROW(net.backward(g), Error); // tape consumed

    net.forward(x);
    Tensor bad({3, 5}, 0.0);
    EXPECT_THROW(net.backward(bad), Error);
}

TEST(Autodiff, ErrorsNameTheFailingLayer) {
    Rng rng(4);
    Network net = tiny_net(rng);
    Tensor wrong_channels({1, 2, 8, 8}, 0.0);
    try {
        net.forward(wrong_channels);
        FAIL() << "expected a shape error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::data);
        EXPECT_NE(std::string(e.what()).find("layer 0"), std::string::npos) << e.what();
    }
}

TEST(Autodiff, ParameterNamesCarryLayerPrefix) {
    Rng rng(5);
    Network net = tiny_net(rng);
    std::vector<std::string> names;
    for (const Param& p : net.parameters()) names.push_back(p.name);
    const std::vector<std::string> want{"l0.weight", "l0.bias", "l1.A",     "l1.B",
                                        "l1.alpha",  "l1.beta", "l4.weight", "l4.bias"};
    EXPECT_EQ(names, want);
    for (const Param& p : net.parameters())
        EXPECT_EQ(p.weight_decay, p.name.find("l1.") != 0) << p.name;
}

TEST(Autodiff, CrossEntropyHandChecked) {
    Tensor logits({1, 2}, {0.0, 0.0});
    LossGrad lg = softmax_cross_entropy(logits, {0});
    EXPECT_NEAR(lg.loss, std::log(2.0), 1e-12);
    EXPECT_NEAR(lg.dlogits[0], -0.5, 1e-12);
    EXPECT_NEAR(lg.dlogits[1], 0.5, 1e-12);

    Tensor uniform({2, 10}, 0.25);
    LossGrad lu = softmax_cross_entropy(uniform, {3, 7});
    EXPECT_NEAR(lu.loss, std::log(10.0), 1e-12);

    // extreme logits stay finite through the log-sum-exp path
    Tensor hot({1, 3}, {1000.0, 0.0, -1000.0});
    LossGrad lh = softmax_cross_entropy(hot, {0});
    EXPECT_TRUE(std::isfinite(lh.loss));
    EXPECT_NEAR(lh.loss, 0.0, 1e-9);

    EXPECT_THROW(softmax_cross_entropy(logits, {5}), Error);
    EXPECT_THROW(softmax_cross_entropy(logits, {0, 1}), Error);
}

TEST(Autodiff, PredictPicksRowArgmax) {
    Tensor logits({2, 3}, {0.1, 0.9, 0.3, 2.0, -1.0, 1.5});
    const std::vector<std::size_t> want{1, 0};
    EXPECT_EQ(predict(logits), want);
}

TEST(Autodiff, SgdHandCheckedSteps) {
    Tensor p({1}, {1.0});
    p.set_requires_grad(true);
    std::vector<Param> params{{"p", &p, true}};

    SgdMomentum opt(0.1, 0.9, 0.0);
    opt.bind(params);
    p.grad[0] = 1.0;
    opt.step(params);
    EXPECT_DOUBLE_EQ(p.data[0], 0.9); // v = -0.1
    p.grad[0] = 1.0;
    opt.step(params);
    EXPECT_DOUBLE_EQ(p.data[0], 0.71); // v = 0.9*(-0.1) - 0.1 = -0.19
    EXPECT_DOUBLE_EQ(p.grad[0], 0.0);  // step() clears the gradient
}

TEST(Autodiff, SgdWeightDecayRespectsFlag) {
    Tensor decayed({1}, {1.0}), frozen({1}, {1.0});
    decayed.set_requires_grad(true);
    frozen.set_requires_grad(true);
    std::vector<Param> params{{"w", &decayed, true}, {"a", &frozen, false}};

    SgdMomentum opt(0.1, 0.0, 0.5);
    opt.bind(params);
    decayed.grad[0] = 0.0;
    frozen.grad[0] = 0.0;
    opt.step(params);
    EXPECT_DOUBLE_EQ(decayed.data[0], 1.0 - 0.1 * 0.5); // decay pulls toward zero
    EXPECT_DOUBLE_EQ(frozen.data[0], 1.0);              // shape parameter untouched
}

TEST(Autodiff, ScheduleEntriesFireOnce) {
    SgdMomentum opt(0.1, 0.9, 0.0, {{2, 0.5}, {4, 0.1}});
    opt.begin_epoch(1);
    EXPECT_DOUBLE_EQ(opt.learning_rate(), 0.1);
    opt.begin_epoch(2);
    EXPECT_DOUBLE_EQ(opt.learning_rate(), 0.05);
    opt.begin_epoch(2);
    EXPECT_DOUBLE_EQ(opt.learning_rate(), 0.05);
    opt.begin_epoch(4);
    EXPECT_NEAR(opt.learning_rate(), 0.005, 1e-15);
    opt.begin_epoch(5);
    EXPECT_NEAR(opt.learning_rate(), 0.005, 1e-15);

    EXPECT_THROW(SgdMomentum(-1.0, 0.9, 0.0), Error);
    EXPECT_THROW(SgdMomentum(0.1, 1.0, 0.0), Error);
}

TEST(Autodiff, PostStepProjectsActivationParams) {
    ActivationSpec spec = af_init(ActivationKind::lp_relu2);
    Network net;
    auto& act = net.emplace<ActivationLayer>(spec);
    std::vector<Param> params = net.parameters();
    ASSERT_EQ(params.size(), 4u);
    // simulate an optimizer step that broke the ordering constraint
    for (Param& p : params)
        if (p.name == "l0.B") p.tensor->data[0] = spec.A - 1.0;
    net.post_step();
    EXPECT_GE(act.spec().B, act.spec().A + 0.1);
    for (Param& p : net.parameters())
        if (p.name == "l0.B") EXPECT_DOUBLE_EQ(p.tensor->data[0], act.spec().B);
}

} // namespace
