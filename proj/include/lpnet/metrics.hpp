#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "lpnet/corruptions.hpp"
#include "lpnet/network.hpp"

namespace lpnet {

/// q-th quantile (q in [0,1]) of a copy of the values, nearest-rank.
inline double quantile(std::vector<double> values, double q) {
    check(!values.empty(), ErrorKind::usage, "quantile: empty sample");
    std::sort(values.begin(), values.end());
    if (q <= 0.0) return values.front();
    if (q >= 1.0) return values.back();
    const auto idx = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(values.size()))) - 1;
    return values[std::min(idx, values.size() - 1)];
}

inline double top1(const Tensor& logits, const std::vector<std::size_t>& labels) {
    check(logits.rank() == 2 && logits.dim(0) > 0, ErrorKind::data,
          "top1: empty or non-matrix logits " + shape_str(logits.shape));
    check(labels.size() == logits.dim(0), ErrorKind::data,
          "top1: " + std::to_string(labels.size()) + " labels for " +
              std::to_string(logits.dim(0)) + " rows");
    const std::vector<std::size_t> preds = predict(logits);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (preds[i] == labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(preds.size());
}

struct FlipReport {
    std::vector<std::pair<CorruptionKind, double>> per_kind;
    double mfp = 0.0;
};

/// Fraction of adjacent-frame prediction mismatches over a set of clips:
/// sum of flips divided by the total number of transitions k*(v-1).
inline double flip_rate(const std::vector<std::vector<std::size_t>>& clip_predictions) {
    check(!clip_predictions.empty(), ErrorKind::usage, "flip_rate: no clips");
    std::size_t flips = 0, transitions = 0;
    for (const auto& clip : clip_predictions) {
        check(clip.size() >= 2, ErrorKind::usage,
              "flip_rate: sequence with fewer than 2 frames");
        for (std::size_t j = 1; j < clip.size(); ++j)
            if (clip[j] != clip[j - 1]) ++flips;
        transitions += clip.size() - 1;
    }
    return static_cast<double>(flips) / static_cast<double>(transitions);
}

using SequenceClassifier =
    std::function<std::vector<std::size_t>(const std::vector<Tensor>& frames)>;

/// Per-kind flip probability plus its mean over kinds. Sequences are
/// grouped by their corruption kind internally.
inline FlipReport flip_probability(const std::vector<PerturbationSequence>& sequences,
                                   const SequenceClassifier& classify) {
    check(!sequences.empty(), ErrorKind::usage, "flip_probability: no sequences");
    std::vector<CorruptionKind> order;
    std::map<CorruptionKind, std::vector<std::vector<std::size_t>>> by_kind;
    for (const PerturbationSequence& seq : sequences) {
        check(seq.frames.size() >= 2, ErrorKind::usage,
              "flip_probability: sequence with fewer than 2 frames");
        std::vector<std::size_t> preds = classify(seq.frames);
        check(preds.size() == seq.frames.size(), ErrorKind::usage,
              "flip_probability: classifier returned " + std::to_string(preds.size()) +
                  " predictions for " + std::to_string(seq.frames.size()) + " frames");
        if (by_kind.find(seq.kind) == by_kind.end()) order.push_back(seq.kind);
        by_kind[seq.kind].push_back(std::move(preds));
    }
    FlipReport report;
    for (CorruptionKind k : order) {
        const double fp = flip_rate(by_kind[k]);
        report.per_kind.emplace_back(k, fp);
        report.mfp += fp;
    }
    report.mfp /= static_cast<double>(report.per_kind.size());
    return report;
}

namespace detail {

/// Cosine similarity; bit-identical vectors score exactly 1.
inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a == b) return 1.0;
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 && nb == 0.0) return 1.0;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

/// Per-image slice of one captured layer output.
inline std::vector<double> image_slice(const Tensor& layer_out, std::size_t image,
                                       std::size_t batch_size) {
    const std::size_t per = layer_out.numel() / batch_size;
    return {layer_out.data.begin() + image * per, layer_out.data.begin() + (image + 1) * per};
}

} // namespace detail

enum class ShiftMode { per_layer_mean, concatenated };

/// Cosine-similarity feature shift. Severity level 1 is the clean set
/// compared against itself (CS = 1 by definition); levels 2..6 come from
/// the supplied corrupted sets in order.
struct ShiftReport {
    std::vector<double> per_severity;            // index s-1, s = 1..6
    std::vector<std::array<double, 4>> per_depth; // same indexing, 4 depth groups
};

inline ShiftReport feature_shift(Network& net, const Tensor& clean,
                                 const std::vector<Tensor>& corrupted_by_severity,
                                 ShiftMode mode = ShiftMode::per_layer_mean,
                                 std::size_t batch = 64) {
    check(clean.rank() == 4 && clean.dim(0) > 0, ErrorKind::data,
          "feature_shift: expected clean batch [N,C,H,W], got " + shape_str(clean.shape));
    for (const Tensor& t : corrupted_by_severity)
        check(t.shape == clean.shape, ErrorKind::data,
              "feature_shift: corrupted set shape " + shape_str(t.shape) +
                  " does not match clean " + shape_str(clean.shape));
    const std::size_t N = clean.dim(0);
    const std::size_t levels = corrupted_by_severity.size();

    net.set_capture(true);
    ShiftReport report;
    report.per_severity.assign(levels + 1, 1.0);
    report.per_depth.assign(levels + 1, {1.0, 1.0, 1.0, 1.0});

    // layer-count probe on the first image
    Tensor probe({1, clean.dim(1), clean.dim(2), clean.dim(3)});
    std::copy(clean.data.begin(), clean.data.begin() + probe.numel(), probe.data.begin());
    net.forward(probe);
    const std::size_t n_layers = net.captured().size();
    std::vector<bool> is_act(n_layers, false);
    std::size_t n_act = 0;
    for (std::size_t l = 0; l < n_layers; ++l)
        if (std::string(net.layer(l).kind()) == "activation") {
            is_act[l] = true;
            ++n_act;
        }
    check(n_act > 0, ErrorKind::usage, "feature_shift: network has no activation layers");

    std::vector<std::vector<double>> layer_cs(levels, std::vector<double>(n_layers, 0.0));
    std::vector<double> concat_cs(levels, 0.0);

    for (std::size_t start = 0; start < N; start += batch) {
        const std::size_t count = std::min(batch, N - start);
        auto take = [&](const Tensor& src) {
            Tensor chunk({count, src.dim(1), src.dim(2), src.dim(3)});
            const std::size_t per = src.numel() / src.dim(0);
            std::copy(src.data.begin() + start * per, src.data.begin() + (start + count) * per,
                      chunk.data.begin());
            return chunk;
        };
        net.forward(take(clean));
        const std::vector<Tensor> clean_feats = net.captured();
        for (std::size_t s = 0; s < levels; ++s) {
            net.forward(take(corrupted_by_severity[s]));
            const std::vector<Tensor>& cor_feats = net.captured();
            for (std::size_t i = 0; i < count; ++i) {
                std::vector<double> cat_a, cat_b;
                for (std::size_t l = 0; l < n_layers; ++l) {
                    const std::vector<double> a = detail::image_slice(clean_feats[l], i, count);
                    const std::vector<double> b = detail::image_slice(cor_feats[l], i, count);
                    layer_cs[s][l] += detail::cosine(a, b);
                    if (mode == ShiftMode::concatenated && is_act[l]) {
                        cat_a.insert(cat_a.end(), a.begin(), a.end());
                        cat_b.insert(cat_b.end(), b.begin(), b.end());
                    }
                }
                if (mode == ShiftMode::concatenated)
                    concat_cs[s] += detail::cosine(cat_a, cat_b);
            }
        }
    }
    net.set_capture(false);

    for (std::size_t s = 0; s < levels; ++s) {
        for (std::size_t l = 0; l < n_layers; ++l)
            layer_cs[s][l] /= static_cast<double>(N);
        if (mode == ShiftMode::concatenated) {
            report.per_severity[s + 1] = concat_cs[s] / static_cast<double>(N);
        } else {
            double acc = 0.0;
            for (std::size_t l = 0; l < n_layers; ++l)
                if (is_act[l]) acc += layer_cs[s][l];
            report.per_severity[s + 1] = acc / static_cast<double>(n_act);
        }
        // four contiguous depth groups over all captured layers
        for (std::size_t g = 0; g < 4; ++g) {
            const std::size_t lo = g * n_layers / 4;
            const std::size_t hi = (g + 1) * n_layers / 4;
            double acc = 0.0;
            std::size_t cnt = 0;
            for (std::size_t l = lo; l < hi; ++l) {
                acc += layer_cs[s][l];
                ++cnt;
            }
            report.per_depth[s + 1][g] = cnt ? acc / static_cast<double>(cnt) : 1.0;
        }
    }
    return report;
}

namespace detail {

/// Pools post-activation magnitudes over every activation layer.
inline std::vector<double> collect_activation_magnitudes(Network& net, const Tensor& images,
                                                         std::size_t batch = 128) {
    check(images.rank() == 4 && images.dim(0) > 0, ErrorKind::data,
          "activation stats: expected batch [N,C,H,W], got " + shape_str(images.shape));
    std::vector<double> values;
    net.set_capture(true);
    const std::size_t N = images.dim(0);
    const std::size_t per = images.numel() / N;
    for (std::size_t start = 0; start < N; start += batch) {
        const std::size_t count = std::min(batch, N - start);
        Tensor chunk({count, images.dim(1), images.dim(2), images.dim(3)});
        std::copy(images.data.begin() + start * per,
                  images.data.begin() + (start + count) * per, chunk.data.begin());
        net.forward(chunk);
        for (std::size_t l = 0; l < net.captured().size(); ++l)
            if (std::string(net.layer(l).kind()) == "activation")
                for (double v : net.captured()[l].data) values.push_back(std::abs(v));
    }
    net.set_capture(false);
    return values;
}

} // namespace detail

struct Histogram {
    double lo = 0.0, hi = 0.0;
    std::vector<double> counts;
    double mean = 0.0;
};

/// Histogram of post-activation magnitudes pooled across activation
/// layers. hi <= 0 auto-scales the range to the 99.9th percentile so the
/// long tail does not flatten the plot; pass an explicit hi to share bin
/// edges across image sets.
inline Histogram activation_histogram(Network& net, const Tensor& images,
                                      std::size_t bins = 100, double hi = 0.0,
                                      std::size_t batch = 128) {
    check(bins >= 1, ErrorKind::usage, "activation_histogram: need at least 1 bin");
    std::vector<double> values = detail::collect_activation_magnitudes(net, images, batch);
    Histogram h;
    h.counts.assign(bins, 0.0);
    h.hi = hi > 0.0 ? hi : quantile(values, 0.999);
    if (h.hi <= 0.0) h.hi = 1.0;
    for (double v : values) {
        h.mean += v;
        auto b = static_cast<std::size_t>(v / h.hi * static_cast<double>(bins));
        h.counts[std::min(b, bins - 1)] += 1.0;
    }
    h.mean /= static_cast<double>(values.size());
    return h;
}

/// 99th/99.9th percentile of pooled activation magnitudes; feeds the
/// calibrated af_init path.
inline ActivationStats activation_stats(Network& net, const Tensor& images,
                                        std::size_t batch = 128) {
    std::vector<double> values = detail::collect_activation_magnitudes(net, images, batch);
    ActivationStats st;
    st.p99 = quantile(values, 0.99);
    st.p999 = quantile(values, 0.999);
    return st;
}

} // namespace lpnet
