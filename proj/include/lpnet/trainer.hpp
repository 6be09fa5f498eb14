#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "lpnet/csv.hpp"
#include "lpnet/datasets.hpp"
#include "lpnet/dct.hpp"
#include "lpnet/metrics.hpp"
#include "lpnet/network.hpp"
#include "lpnet/optimizer.hpp"

namespace lpnet {

struct TrainOptions {
    std::size_t epochs = 20;
    std::size_t batch = 128;
    double lr = 0.1;
    double momentum = 0.9;
    double l2 = 5e-4;
    // reference protocol: x0.2 after epochs 50/100/140 of a 160-epoch run
    std::vector<ScheduleEntry> schedule = {{50, 0.2}, {100, 0.2}, {140, 0.2}};
    double val_fraction = 0.15;
    std::uint64_t seed = 1;
    bool dct_augment = false;
    AugmentPolicy augment_policy{};
    std::string log_csv; // per-epoch rows when non-empty
};

struct EvalResult {
    double loss = 0.0;
    double accuracy = 0.0;
};

struct TrainResult {
    double val_top1 = 0.0;
    double test_top1 = 0.0;
    std::vector<double> mean; // zero-centering mean the net was trained with
};

using EpochCallback = std::function<void(std::size_t epoch, const EvalResult& train,
                                         const EvalResult& val, double lr)>;

/// Loss and Top-1 over a dataset, zero-centered with the given mean.
inline EvalResult evaluate(Network& net, const Tensor& images,
                           const std::vector<std::size_t>& labels,
                           const std::vector<double>& mean, std::size_t batch = 256) {
    check(images.dim(0) == labels.size(), ErrorKind::data,
          "evaluate: image/label counts disagree");
    EvalResult res;
    const std::size_t N = images.dim(0);
    const std::size_t per = images.numel() / N;
    std::size_t hits = 0;
    for (std::size_t start = 0; start < N; start += batch) {
        const std::size_t count = std::min(batch, N - start);
        Tensor chunk({count, images.dim(1), images.dim(2), images.dim(3)});
        std::copy(images.data.begin() + start * per,
                  images.data.begin() + (start + count) * per, chunk.data.begin());
        zero_center(chunk, mean);
        const Tensor logits = net.forward(chunk);
        const std::vector<std::size_t> batch_labels(labels.begin() + start,
                                                    labels.begin() + start + count);
        res.loss += softmax_cross_entropy(logits, batch_labels).loss *
                    static_cast<double>(count);
        const std::vector<std::size_t> preds = predict(logits);
        for (std::size_t i = 0; i < count; ++i)
            if (preds[i] == batch_labels[i]) ++hits;
    }
    res.loss /= static_cast<double>(N);
    res.accuracy = static_cast<double>(hits) / static_cast<double>(N);
    return res;
}

/// SGD training loop: stratified validation split, zero-centering by the
/// training mean, optional per-image DCT augmentation (applied to raw
/// pixels, before centering), momentum SGD with the step schedule, and
/// constraint projection after every step. Throws a numeric error on a
/// non-finite loss.
inline TrainResult train(Network& net, const Dataset& train_set, const Dataset& test_set,
                         const TrainOptions& opts, const EpochCallback& on_epoch = {}) {
    check(opts.epochs >= 1, ErrorKind::usage, "train: need at least one epoch");
    check(opts.batch >= 1, ErrorKind::usage, "train: batch size must be positive");
    if (opts.dct_augment) augment_validate(opts.augment_policy);

    auto [tr, val] = split_validation(train_set, opts.val_fraction, opts.seed);
    TrainResult result;
    result.mean = channel_mean(tr.images);

    SgdMomentum opt(opts.lr, opts.momentum, opts.l2, opts.schedule);
    const std::vector<Param> params = net.parameters();
    opt.bind(params);

    std::unique_ptr<CsvWriter> log;
    if (!opts.log_csv.empty())
        log = std::make_unique<CsvWriter>(opts.log_csv, "epoch,split,loss,top1,lr");

    Rng rng(opts.seed ^ 0xa5a5a5a5a5a5a5a5ull);
    const std::size_t N = tr.size();
    const std::size_t per = tr.images.numel() / N;
    const std::size_t C = tr.images.dim(1), H = tr.images.dim(2), W = tr.images.dim(3);
    std::vector<std::size_t> perm(N);
    for (std::size_t i = 0; i < N; ++i) perm[i] = i;

    for (std::size_t epoch = 1; epoch <= opts.epochs; ++epoch) {
        opt.begin_epoch(epoch);
        for (std::size_t i = N; i > 1; --i)
            std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
        double epoch_loss = 0.0;
        std::size_t epoch_hits = 0;
        for (std::size_t start = 0; start < N; start += opts.batch) {
            const std::size_t count = std::min(opts.batch, N - start);
            Tensor batch({count, C, H, W});
            std::vector<std::size_t> labels(count);
            for (std::size_t i = 0; i < count; ++i) {
                const std::size_t src = perm[start + i];
                std::copy(tr.images.data.begin() + src * per,
                          tr.images.data.begin() + (src + 1) * per,
                          batch.data.begin() + i * per);
                labels[i] = tr.labels[src];
            }
            if (opts.dct_augment) {
                for (std::size_t i = 0; i < count; ++i) {
                    Tensor img({C, H, W});
                    std::copy(batch.data.begin() + i * per,
                              batch.data.begin() + (i + 1) * per, img.data.begin());
                    const Tensor aug = augment(img, opts.augment_policy, rng);
                    std::copy(aug.data.begin(), aug.data.end(),
                              batch.data.begin() + i * per);
                }
            }
            zero_center(batch, result.mean);
            const Tensor logits = net.forward(batch);
            LossGrad lg = softmax_cross_entropy(logits, labels);
            check(std::isfinite(lg.loss), ErrorKind::numeric,
                  "train: non-finite loss at epoch " + std::to_string(epoch));
            net.backward(lg.dlogits);
            opt.step(params);
            net.post_step();
            epoch_loss += lg.loss * static_cast<double>(count);
            const std::vector<std::size_t> preds = predict(logits);
            for (std::size_t i = 0; i < count; ++i)
                if (preds[i] == labels[i]) ++epoch_hits;
        }
        EvalResult train_res{epoch_loss / static_cast<double>(N),
                             static_cast<double>(epoch_hits) / static_cast<double>(N)};
        const EvalResult val_res = evaluate(net, val.images, val.labels, result.mean);
        result.val_top1 = val_res.accuracy;
        if (log) {
            log->row({std::to_string(epoch), "train", csv_num(train_res.loss),
                      csv_num(train_res.accuracy), csv_num(opt.learning_rate())});
            log->row({std::to_string(epoch), "val", csv_num(val_res.loss),
                      csv_num(val_res.accuracy), csv_num(opt.learning_rate())});
        }
        if (on_epoch) on_epoch(epoch, train_res, val_res, opt.learning_rate());
    }
    if (test_set.size() > 0)
        result.test_top1 =
            evaluate(net, test_set.images, test_set.labels, result.mean).accuracy;
    return result;
}

} // namespace lpnet
