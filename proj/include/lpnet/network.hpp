#pragma once

#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lpnet/layers.hpp"

namespace lpnet {

/// Sequential container. forward() records the tape (each layer caches its
/// inputs); backward() consumes it. Parameter names are prefixed with the
/// layer index ("l0.weight") so checkpoints stay unambiguous.
class Network {
public:
    void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

    template <typename L, typename... Args>
    L& emplace(Args&&... args) {
        auto layer = std::make_unique<L>(std::forward<Args>(args)...);
        L& ref = *layer;
        layers_.push_back(std::move(layer));
        return ref;
    }

    std::size_t size() const { return layers_.size(); }
    Layer& layer(std::size_t i) { return *layers_.at(i); }
    const Layer& layer(std::size_t i) const { return *layers_.at(i); }

    /// When enabled, forward() keeps a copy of every layer output; used for
    /// activation statistics, feature-shift metrics, and the decision map.
    void set_capture(bool on) { capture_ = on; }
    const std::vector<Tensor>& captured() const { return captured_; }

    Tensor forward(const Tensor& input) {
        check(!layers_.empty(), ErrorKind::usage, "forward: network is empty");
        captured_.clear();
        Tensor cur = input;
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            try {
                cur = layers_[i]->forward(cur);
            } catch (const Error& e) {
                throw Error(e.kind(), "layer " + std::to_string(i) + ": " + e.what());
            }
            if (capture_) captured_.push_back(cur);
        }
        taped_ = true;
        out_shape_ = cur.shape;
        return cur;
    }

    /// Propagates dLoss/dLogits back through the tape, accumulating into
    /// parameter .grad buffers. Invalidates the tape.
    void backward(const Tensor& dlogits) {
        check(taped_, ErrorKind::usage, "backward: no recorded forward tape");
        check(dlogits.shape == out_shape_, ErrorKind::data,
              "backward: gradient shape " + shape_str(dlogits.shape) +
                  " does not match output shape " + shape_str(out_shape_));
        Tensor cur = dlogits;
        for (std::size_t i = layers_.size(); i-- > 0;) cur = layers_[i]->backward(cur);
        taped_ = false;
    }

    std::vector<Param> parameters() {
        std::vector<Param> out;
        for (std::size_t i = 0; i < layers_.size(); ++i)
            for (Param p : layers_[i]->parameters()) {
                p.name = "l" + std::to_string(i) + "." + p.name;
                out.push_back(p);
            }
        return out;
    }

    void zero_grad() {
        for (Param& p : parameters()) p.tensor->zero_grad();
    }

    void post_step() {
        for (auto& l : layers_) l->post_step();
    }

    /// Semicolon-joined layer descriptors; stored in checkpoints and checked
    /// on load.
    std::string describe() const {
        std::string s;
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            if (i) s += ';';
            s += layers_[i]->describe();
        }
        return s;
    }

private:
    std::vector<std::unique_ptr<Layer>> layers_;
    std::vector<Tensor> captured_;
    Shape out_shape_;
    bool taped_ = false;
    bool capture_ = false;
};

struct LossGrad {
    double loss = 0.0;
    Tensor dlogits;
};

/// Mean softmax cross-entropy over the batch. Gradients are already divided
/// by N so optimizer steps are batch-size invariant.
inline LossGrad softmax_cross_entropy(const Tensor& logits,
                                      const std::vector<std::size_t>& labels) {
    check(logits.rank() == 2, ErrorKind::data,
          "cross_entropy: expected logits [N,C], got " + shape_str(logits.shape));
    const std::size_t N = logits.dim(0), C = logits.dim(1);
    check(labels.size() == N, ErrorKind::data,
          "cross_entropy: " + std::to_string(labels.size()) + " labels for " +
              std::to_string(N) + " rows");
    LossGrad out;
    out.dlogits = Tensor({N, C});
    const double inv_n = 1.0 / static_cast<double>(N);
    for (std::size_t n = 0; n < N; ++n) {
        check(labels[n] < C, ErrorKind::data,
              "cross_entropy: label " + std::to_string(labels[n]) + " out of range [0," +
                  std::to_string(C) + ")");
        const double* z = logits.data.data() + n * C;
        double m = z[0];
        for (std::size_t c = 1; c < C; ++c) m = std::max(m, z[c]);
        double sum = 0.0;
        for (std::size_t c = 0; c < C; ++c) sum += std::exp(z[c] - m);
        const double log_sum = std::log(sum);
        out.loss += (m + log_sum - z[labels[n]]) * inv_n;
        double* g = out.dlogits.data.data() + n * C;
        for (std::size_t c = 0; c < C; ++c) {
            const double p = std::exp(z[c] - m - log_sum);
            g[c] = (p - (c == labels[n] ? 1.0 : 0.0)) * inv_n;
        }
    }
    return out;
}

/// Sum of all outputs; gradient is all-ones. Test scaffolding.
inline LossGrad sum_loss(const Tensor& y) {
    LossGrad out;
    out.loss = std::accumulate(y.data.begin(), y.data.end(), 0.0);
    out.dlogits = Tensor::full(y.shape, 1.0);
    return out;
}

/// Row-wise argmax of logits.
inline std::vector<std::size_t> predict(const Tensor& logits) {
    check(logits.rank() == 2, ErrorKind::data,
          "predict: expected logits [N,C], got " + shape_str(logits.shape));
    const std::size_t N = logits.dim(0), C = logits.dim(1);
    std::vector<std::size_t> out(N);
    for (std::size_t n = 0; n < N; ++n) {
        const double* z = logits.data.data() + n * C;
        std::size_t best = 0;
        for (std::size_t c = 1; c < C; ++c)
            if (z[c] > z[best]) best = c;
        out[n] = best;
    }
    return out;
}

} // namespace lpnet
