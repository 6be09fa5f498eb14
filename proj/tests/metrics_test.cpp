#include <gtest/gtest.h>

#include <cmath>

#include "lpnet/metrics.hpp"
#include "lpnet/synth.hpp"

using namespace lpnet;

namespace {

TEST(Metrics, QuantileUsesNearestRank) {
    std::vector<double> v{10, 1, 9, 2, 8, 3, 7, 4, 6, 5}; // sorted: 1..10
    EXPECT_DOUBLE_EQ(quantile(v, 0.5), 5.0);
    EXPECT_DOUBLE_EQ(quantile(v, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(quantile(v, 1.0), 10.0);
    EXPECT_DOUBLE_EQ(quantile(v, 0.99), 10.0);
    EXPECT_DOUBLE_EQ(quantile(v, 0.85), 9.0);
    EXPECT_DOUBLE_EQ(quantile({3.5}, 0.999), 3.5);
    EXPECT_THROW(quantile({}, 0.5), Error);
}

TEST(Metrics, Top1CountsExactMatches) {
    Tensor logits({3, 3}, {1.0, 2.0, 0.0,   // -> 1
                           0.5, 0.1, 0.2,   // -> 0
                           0.0, 0.0, 9.0}); // -> 2
    EXPECT_DOUBLE_EQ(top1(logits, {1, 0, 2}), 1.0);
    EXPECT_DOUBLE_EQ(top1(logits, {1, 1, 2}), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(top1(logits, {0, 1, 0}), 0.0);
    EXPECT_THROW(top1(logits, {0, 1}), Error);
}

TEST(Metrics, Top1MatchesChanceOnRandomLogits) {
    Rng rng(88);
    const std::size_t n = 100000, c = 10;
    Tensor logits({n, c});
    for (double& v : logits.data) v = rng.normal();
    std::vector<std::size_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = rng.uniform_index(c);
    EXPECT_NEAR(top1(logits, labels), 0.1, 0.01);
}

TEST(Metrics, FlipRateCountsAdjacentChanges) {
    EXPECT_DOUBLE_EQ(flip_rate({{1, 1, 1}}), 0.0);
    EXPECT_DOUBLE_EQ(flip_rate({{1, 2, 1}}), 1.0);
    EXPECT_DOUBLE_EQ(flip_rate({{1, 1, 2}, {3, 3, 3}}), 0.25);
    EXPECT_DOUBLE_EQ(flip_rate({{0, 1}, {1, 0}}), 1.0);

    // relabeling the classes cannot change the rate
    const std::vector<std::vector<std::size_t>> clips{{0, 1, 1, 2}, {2, 2, 0, 0}};
    std::vector<std::vector<std::size_t>> relabeled = clips;
    const std::size_t perm[3] = {7, 4, 9};
    for (auto& clip : relabeled)
        for (auto& p : clip) p = perm[p];
    EXPECT_DOUBLE_EQ(flip_rate(clips), flip_rate(relabeled));

    EXPECT_THROW(flip_rate({}), Error);
    EXPECT_THROW(flip_rate({{1}}), Error);
}

TEST(Metrics, FlipProbabilityGroupsByKind) {
    auto frame = [](double cls) {
        Tensor t({1});
        t.data[0] = cls;
        return t;
    };
    auto clip = [&](CorruptionKind k, std::initializer_list<double> classes) {
        PerturbationSequence seq;
        seq.kind = k;
        for (double c : classes) seq.frames.push_back(frame(c));
        return seq;
    };
    const SequenceClassifier read_pixel = [](const std::vector<Tensor>& frames) {
        std::vector<std::size_t> preds;
        for (const Tensor& f : frames) preds.push_back(static_cast<std::size_t>(f[0]));
        return preds;
    };

    std::vector<PerturbationSequence> seqs;
    seqs.push_back(clip(CorruptionKind::gaussian_noise, {0, 0, 1}));
    seqs.push_back(clip(CorruptionKind::contrast, {1, 2}));
    seqs.push_back(clip(CorruptionKind::gaussian_noise, {0, 0, 0}));

    FlipReport r = flip_probability(seqs, read_pixel);
    ASSERT_EQ(r.per_kind.size(), 2u);
    EXPECT_EQ(r.per_kind[0].first, CorruptionKind::gaussian_noise);
    EXPECT_DOUBLE_EQ(r.per_kind[0].second, 0.25); // 1 flip over 4 transitions
    EXPECT_EQ(r.per_kind[1].first, CorruptionKind::contrast);
    EXPECT_DOUBLE_EQ(r.per_kind[1].second, 1.0);
    EXPECT_DOUBLE_EQ(r.mfp, 0.625);

    const SequenceClassifier short_reader = [](const std::vector<Tensor>& frames) {
        return std::vector<std::size_t>(frames.size() - 1, 0);
    };
    EXPECT_THROW(flip_probability(seqs, short_reader), Error);
    EXPECT_THROW(flip_probability({}, read_pixel), Error);
}

TEST(Metrics, CosineHandChecks) {
    EXPECT_DOUBLE_EQ(detail::cosine({1, 2, 3}, {1, 2, 3}), 1.0); // fast path, exact
    EXPECT_NEAR(detail::cosine({1, 2, 3}, {2, 4, 6}), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(detail::cosine({1, 0}, {0, 1}), 0.0);
    EXPECT_NEAR(detail::cosine({1, 1}, {-1, -1}), -1.0, 1e-12);
    EXPECT_DOUBLE_EQ(detail::cosine({0, 0}, {0, 0}), 1.0);
    EXPECT_DOUBLE_EQ(detail::cosine({0, 0}, {1, 0}), 0.0);
}

Network small_net(Rng& rng) {
    Network net;
    net.emplace<Conv2d>(1, 4, 3, rng);
    net.emplace<ActivationLayer>(af_init(ActivationKind::relu));
    net.emplace<MaxPool2d>(2, 2);
    net.emplace<Flatten>();
    net.emplace<Linear>(4 * 13 * 13, 10, rng);
    return net;
}

TEST(Metrics, FeatureShiftIsExactlyOneForIdenticalInputs) {
    Rng rng(31);
    Network net = small_net(rng);
    Dataset d = make_synth_digits(6, 40);
    ShiftReport r = feature_shift(net, d.images, {d.images});
    ASSERT_EQ(r.per_severity.size(), 2u);
    EXPECT_DOUBLE_EQ(r.per_severity[0], 1.0);
    EXPECT_DOUBLE_EQ(r.per_severity[1], 1.0); // bit-identical features
    for (double g : r.per_depth[1]) EXPECT_DOUBLE_EQ(g, 1.0);
}

TEST(Metrics, FeatureShiftDegradesWithSeverity) {
    Rng rng(32);
    Network net = small_net(rng);
    Dataset d = make_synth_digits(24, 41);

    std::vector<Tensor> corrupted;
    for (int severity = 1; severity <= 5; ++severity) {
        Tensor batch = d.images;
        const std::size_t per = batch.numel() / batch.dim(0);
        for (std::size_t i = 0; i < batch.dim(0); ++i) {
            Tensor img({1, 28, 28});
            std::copy(batch.data.begin() + i * per, batch.data.begin() + (i + 1) * per,
                      img.data.begin());
            Tensor noisy = corrupt(img, {CorruptionKind::gaussian_noise, severity,
                                         500 + i, true});
            std::copy(noisy.data.begin(), noisy.data.end(), batch.data.begin() + i * per);
        }
        corrupted.push_back(std::move(batch));
    }

    ShiftReport r = feature_shift(net, d.images, corrupted);
    ASSERT_EQ(r.per_severity.size(), 6u);
    EXPECT_DOUBLE_EQ(r.per_severity[0], 1.0);
    for (std::size_t s = 1; s < 6; ++s) {
        EXPECT_LT(r.per_severity[s], 1.0);
        EXPECT_LE(r.per_severity[s], r.per_severity[s - 1] + 1e-3) << "severity " << s;
    }
    EXPECT_LT(r.per_severity[5], r.per_severity[1]);

    // concatenated mode shows the same ordering
    ShiftReport rc = feature_shift(net, d.images, corrupted, ShiftMode::concatenated);
    EXPECT_DOUBLE_EQ(rc.per_severity[0], 1.0);
    EXPECT_LT(rc.per_severity[5], rc.per_severity[1]);

    // chunking must not change the result
    ShiftReport r3 = feature_shift(net, d.images, corrupted, ShiftMode::per_layer_mean, 5);
    for (std::size_t s = 0; s < 6; ++s)
        EXPECT_NEAR(r3.per_severity[s], r.per_severity[s], 1e-12);

    // every depth group degrades at top severity
    for (double g : r.per_depth[5]) EXPECT_LT(g, 1.0);
}

TEST(Metrics, FeatureShiftValidatesInputs) {
    Rng rng(33);
    Network net = small_net(rng);
    Dataset d = make_synth_digits(4, 42);
    EXPECT_THROW(feature_shift(net, d.images, {Tensor({4, 1, 14, 14}, 0.0)}), Error);

    Network no_act;
    no_act.emplace<Flatten>();
    no_act.emplace<Linear>(28 * 28, 10, rng);
    EXPECT_THROW(feature_shift(no_act, d.images, {d.images}), Error);
}

TEST(Metrics, ActivationHistogramBinsAndMean) {
    Network net;
    net.emplace<ActivationLayer>(af_init(ActivationKind::relu));
    Tensor images({1, 1, 1, 100});
    double sum = 0.0;
    for (std::size_t i = 0; i < 100; ++i) {
        images.data[i] = static_cast<double>(i) / 100.0; // 0.00 .. 0.99
        sum += images.data[i];
    }
    Histogram h = activation_histogram(net, images, 10, /*hi=*/1.0);
    ASSERT_EQ(h.counts.size(), 10u);
    for (double c : h.counts) EXPECT_DOUBLE_EQ(c, 10.0);
    EXPECT_DOUBLE_EQ(h.hi, 1.0);
    EXPECT_NEAR(h.mean, sum / 100.0, 1e-12);

    // auto range anchors hi at the 99.9th percentile
    Histogram auto_h = activation_histogram(net, images, 10);
    EXPECT_DOUBLE_EQ(auto_h.hi, 0.99);
    EXPECT_DOUBLE_EQ(auto_h.counts[9], 10.0); // top bin catches v == hi

    // all-zero activations fall back to a unit range
    Tensor zeros({1, 1, 1, 8}, 0.0);
    Histogram hz = activation_histogram(net, zeros, 4);
    EXPECT_DOUBLE_EQ(hz.hi, 1.0);
    EXPECT_DOUBLE_EQ(hz.counts[0], 8.0);
}

TEST(Metrics, ActivationStatsFeedCalibratedInit) {
    Network net;
    net.emplace<ActivationLayer>(af_init(ActivationKind::relu));
    Tensor images({1, 1, 10, 100});
    for (std::size_t i = 0; i < 1000; ++i)
        images.data[i] = static_cast<double>(i + 1) / 1000.0; // 0.001 .. 1.000
    ActivationStats st = activation_stats(net, images);
    EXPECT_DOUBLE_EQ(st.p99, 0.99);
    EXPECT_DOUBLE_EQ(st.p999, 0.999);

    ActivationSpec lp2 = af_init(ActivationKind::lp_relu2, st);
    EXPECT_DOUBLE_EQ(lp2.A, 0.99);
    EXPECT_NEAR(lp2.B, std::max(0.999, std::max(0.99 * 1.62, 0.99 + 0.1)), 1e-12);
}

} // namespace
