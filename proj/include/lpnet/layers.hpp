#pragma once

#include <algorithm>
#include <cstring>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "lpnet/activations.hpp"
#include "lpnet/tensor.hpp"

namespace lpnet {

/// Named reference to a trainable tensor. `weight_decay` marks parameters
/// that take L2 regularization; activation thresholds and slopes do not.
struct Param {
    std::string name;
    Tensor* tensor;
    bool weight_decay = true;
};

class Layer {
public:
    virtual ~Layer() = default;

    /// Run the layer, caching whatever backward needs.
    virtual Tensor forward(const Tensor& x) = 0;

    /// Propagate output gradients to input gradients, accumulating
    /// parameter gradients along the way.
    virtual Tensor backward(const Tensor& dy) = 0;

    virtual std::vector<Param> parameters() { return {}; }

    virtual const char* kind() const = 0;

    /// One-line architecture descriptor, parseable by the checkpoint loader.
    virtual std::string describe() const { return kind(); }

    /// Hook invoked after each optimizer step (constraint projection).
    virtual void post_step() {}
};

namespace detail {

inline void expect_rank4(const Tensor& x, const char* who) {
    check(x.rank() == 4, ErrorKind::data,
          std::string(who) + ": expected rank-4 input [N,C,H,W], got " + shape_str(x.shape));
}

inline void im2col(const double* img, std::size_t C, std::size_t H, std::size_t W,
                   std::size_t k, std::size_t stride, std::size_t pad,
                   std::size_t OH, std::size_t OW, double* cols) {
    const std::size_t P = OH * OW;
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx) {
                double* row = cols + ((c * k + ky) * k + kx) * P;
                for (std::size_t oy = 0; oy < OH; ++oy) {
                    const std::ptrdiff_t iy =
                        static_cast<std::ptrdiff_t>(oy * stride + ky) -
                        static_cast<std::ptrdiff_t>(pad);
                    double* dst = row + oy * OW;
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) {
                        std::fill(dst, dst + OW, 0.0);
                        continue;
                    }
                    const double* src = img + (c * H + iy) * W;
                    for (std::size_t ox = 0; ox < OW; ++ox) {
                        const std::ptrdiff_t ix =
                            static_cast<std::ptrdiff_t>(ox * stride + kx) -
                            static_cast<std::ptrdiff_t>(pad);
                        dst[ox] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W))
                                      ? 0.0
                                      : src[ix];
                    }
                }
            }
        }
    }
}

inline void col2im_acc(const double* cols, std::size_t C, std::size_t H, std::size_t W,
                       std::size_t k, std::size_t stride, std::size_t pad,
                       std::size_t OH, std::size_t OW, double* img) {
    const std::size_t P = OH * OW;
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx) {
                const double* row = cols + ((c * k + ky) * k + kx) * P;
                for (std::size_t oy = 0; oy < OH; ++oy) {
                    const std::ptrdiff_t iy =
                        static_cast<std::ptrdiff_t>(oy * stride + ky) -
                        static_cast<std::ptrdiff_t>(pad);
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
                    double* dstrow = img + (c * H + iy) * W;
                    const double* src = row + oy * OW;
                    for (std::size_t ox = 0; ox < OW; ++ox) {
                        const std::ptrdiff_t ix =
                            static_cast<std::ptrdiff_t>(ox * stride + kx) -
                            static_cast<std::ptrdiff_t>(pad);
                        if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(W))
                            dstrow[ix] += src[ox];
                    }
                }
            }
        }
    }
}

} // namespace detail

/// 2D convolution, direct im2col + GEMM. 'valid' by default (pad 0).
class Conv2d : public Layer {
public:
    Conv2d(std::size_t in_ch, std::size_t out_ch, std::size_t kernel, Rng& rng,
           std::size_t stride = 1, std::size_t pad = 0)
        : in_ch_(in_ch), out_ch_(out_ch), k_(kernel), stride_(stride), pad_(pad) {
        const double stddev = std::sqrt(2.0 / static_cast<double>(in_ch * kernel * kernel));
        weight_ = Tensor::randn({out_ch, in_ch, kernel, kernel}, rng, stddev);
        bias_ = Tensor::zeros({out_ch});
        weight_.set_requires_grad(true);
        bias_.set_requires_grad(true);
    }

    Tensor forward(const Tensor& x) override {
        detail::expect_rank4(x, "conv2d");
        check(x.dim(1) == in_ch_, ErrorKind::data,
              "conv2d: expected " + std::to_string(in_ch_) + " input channels, got " +
                  std::to_string(x.dim(1)) + " in " + shape_str(x.shape));
        const std::size_t H = x.dim(2), W = x.dim(3);
        check(H + 2 * pad_ >= k_ && W + 2 * pad_ >= k_, ErrorKind::data,
              "conv2d: kernel " + std::to_string(k_) + " larger than padded input " +
                  shape_str(x.shape));
        input_ = x;
        const std::size_t N = x.dim(0);
        const std::size_t OH = (H + 2 * pad_ - k_) / stride_ + 1;
        const std::size_t OW = (W + 2 * pad_ - k_) / stride_ + 1;
        const std::size_t K = in_ch_ * k_ * k_, P = OH * OW;
        Tensor y({N, out_ch_, OH, OW});
        cols_.assign(K * P, 0.0);
        for (std::size_t n = 0; n < N; ++n) {
            detail::im2col(x.data.data() + n * in_ch_ * H * W, in_ch_, H, W, k_, stride_,
                           pad_, OH, OW, cols_.data());
            double* out = y.data.data() + n * out_ch_ * P;
            for (std::size_t oc = 0; oc < out_ch_; ++oc)
                std::fill(out + oc * P, out + (oc + 1) * P, bias_[oc]);
            gemm_acc(weight_.data.data(), cols_.data(), out, out_ch_, K, P);
        }
        return y;
    }

    Tensor backward(const Tensor& dy) override {
        const std::size_t N = input_.dim(0), H = input_.dim(2), W = input_.dim(3);
        const std::size_t OH = dy.dim(2), OW = dy.dim(3);
        const std::size_t K = in_ch_ * k_ * k_, P = OH * OW;
        Tensor dx(input_.shape);
        std::vector<double> dcols(K * P);
        for (std::size_t n = 0; n < N; ++n) {
            detail::im2col(input_.data.data() + n * in_ch_ * H * W, in_ch_, H, W, k_,
                           stride_, pad_, OH, OW, cols_.data());
            const double* g = dy.data.data() + n * out_ch_ * P;
            // dW += g * cols^T ; db += row sums of g
            gemm_bt_acc(g, cols_.data(), weight_.grad.data(), out_ch_, P, K);
            for (std::size_t oc = 0; oc < out_ch_; ++oc) {
                double s = 0.0;
                for (std::size_t p = 0; p < P; ++p) s += g[oc * P + p];
                bias_.grad[oc] += s;
            }
            // dcols = W^T * g, scattered back to the input grid
            std::fill(dcols.begin(), dcols.end(), 0.0);
            gemm_at_acc(weight_.data.data(), g, dcols.data(), K, out_ch_, P);
            detail::col2im_acc(dcols.data(), in_ch_, H, W, k_, stride_, pad_, OH, OW,
                               dx.data.data() + n * in_ch_ * H * W);
        }
        return dx;
    }

    std::vector<Param> parameters() override {
        return {{"weight", &weight_, true}, {"bias", &bias_, true}};
    }

    const char* kind() const override { return "conv2d"; }

    std::string describe() const override {
        std::ostringstream os;
        os << "conv2d:in=" << in_ch_ << ",out=" << out_ch_ << ",k=" << k_
           << ",stride=" << stride_ << ",pad=" << pad_;
        return os.str();
    }

    Tensor& weight() { return weight_; }
    Tensor& bias() { return bias_; }

private:
    std::size_t in_ch_, out_ch_, k_, stride_, pad_;
    Tensor weight_, bias_;
    Tensor input_;
    std::vector<double> cols_;
};

class MaxPool2d : public Layer {
public:
    explicit MaxPool2d(std::size_t kernel = 2, std::size_t stride = 2)
        : k_(kernel), stride_(stride) {}

    Tensor forward(const Tensor& x) override {
        detail::expect_rank4(x, "maxpool2d");
        const std::size_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
        check(H >= k_ && W >= k_, ErrorKind::data,
              "maxpool2d: window " + std::to_string(k_) + " larger than input " +
                  shape_str(x.shape));
        in_shape_ = x.shape;
        const std::size_t OH = (H - k_) / stride_ + 1, OW = (W - k_) / stride_ + 1;
        Tensor y({N, C, OH, OW});
        argmax_.assign(y.numel(), 0);
        std::size_t o = 0;
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t c = 0; c < C; ++c) {
                const double* plane = x.data.data() + (n * C + c) * H * W;
                for (std::size_t oy = 0; oy < OH; ++oy)
                    for (std::size_t ox = 0; ox < OW; ++ox, ++o) {
                        std::size_t best = (oy * stride_) * W + ox * stride_;
                        double bv = plane[best];
                        for (std::size_t ky = 0; ky < k_; ++ky)
                            for (std::size_t kx = 0; kx < k_; ++kx) {
                                std::size_t idx = (oy * stride_ + ky) * W + ox * stride_ + kx;
                                if (plane[idx] > bv) { bv = plane[idx]; best = idx; }
                            }
                        y.data[o] = bv;
                        argmax_[o] = (n * C + c) * H * W + best;
                    }
            }
        return y;
    }

    Tensor backward(const Tensor& dy) override {
        Tensor dx(in_shape_);
        for (std::size_t i = 0; i < dy.numel(); ++i) dx.data[argmax_[i]] += dy.data[i];
        return dx;
    }

    const char* kind() const override { return "maxpool2d"; }

    std::string describe() const override {
        std::ostringstream os;
        os << "maxpool2d:k=" << k_ << ",stride=" << stride_;
        return os.str();
    }

private:
    std::size_t k_, stride_;
    Shape in_shape_;
    std::vector<std::size_t> argmax_;
};

class Linear : public Layer {
public:
    /// `bias=false` makes the map positively homogeneous along rays from
    /// the origin, which keeps 2-D decision regions exact wedges.
    Linear(std::size_t in, std::size_t out, Rng& rng, bool bias = true)
        : in_(in), out_(out), has_bias_(bias) {
        const double stddev = std::sqrt(2.0 / static_cast<double>(in));
        weight_ = Tensor::randn({out, in}, rng, stddev);
        bias_ = Tensor::zeros({out});
        weight_.set_requires_grad(true);
        if (has_bias_) bias_.set_requires_grad(true);
    }

    Tensor forward(const Tensor& x) override {
        check(x.rank() == 2 && x.dim(1) == in_, ErrorKind::data,
              "linear: expected input [N," + std::to_string(in_) + "], got " +
                  shape_str(x.shape));
        input_ = x;
        const std::size_t N = x.dim(0);
        Tensor y({N, out_});
        if (has_bias_)
            for (std::size_t n = 0; n < N; ++n)
                std::copy(bias_.data.begin(), bias_.data.end(), y.data.begin() + n * out_);
        gemm_bt_acc(x.data.data(), weight_.data.data(), y.data.data(), N, in_, out_);
        return y;
    }

    Tensor backward(const Tensor& dy) override {
        const std::size_t N = input_.dim(0);
        // dW += dy^T * x ; db += column sums ; dx = dy * W
        gemm_at_acc(dy.data.data(), input_.data.data(), weight_.grad.data(), out_, N, in_);
        if (has_bias_)
            for (std::size_t n = 0; n < N; ++n)
                for (std::size_t j = 0; j < out_; ++j) bias_.grad[j] += dy.data[n * out_ + j];
        Tensor dx({N, in_});
        gemm_acc(dy.data.data(), weight_.data.data(), dx.data.data(), N, out_, in_);
        return dx;
    }

    std::vector<Param> parameters() override {
        if (!has_bias_) return {{"weight", &weight_, true}};
        return {{"weight", &weight_, true}, {"bias", &bias_, true}};
    }

    const char* kind() const override { return "linear"; }

    std::string describe() const override {
        std::ostringstream os;
        os << "linear:in=" << in_ << ",out=" << out_;
        if (!has_bias_) os << ",bias=0";
        return os.str();
    }

    std::size_t out_features() const { return out_; }
    Tensor& weight() { return weight_; }
    Tensor& bias() { return bias_; }

private:
    std::size_t in_, out_;
    bool has_bias_;
    Tensor weight_, bias_;
    Tensor input_;
};

/// Elementwise activation. Learnable spec parameters are exposed to the
/// optimizer as 1-element tensors; post_step() pulls them back into the
/// spec and applies the constraint projection.
class ActivationLayer : public Layer {
public:
    explicit ActivationLayer(ActivationSpec spec) : spec_(spec) {
        af_validate(spec_);
        for (AfParam p : af_params_of(spec_.kind))
            if (spec_.is_learnable(p)) {
                Tensor t({1});
                t.data[0] = spec_.param(p);
                t.set_requires_grad(true);
                learnable_.push_back({p, std::move(t)});
            }
    }

    Tensor forward(const Tensor& x) override {
        sync_spec_from_tensors();
        af_validate(spec_);
        input_ = x;
        Tensor y(x.shape);
        for (std::size_t i = 0; i < x.numel(); ++i)
            y.data[i] = detail_value(x.data[i]);
        return y;
    }

    Tensor backward(const Tensor& dy) override {
        Tensor dx(input_.shape);
        for (std::size_t i = 0; i < dy.numel(); ++i)
            dx.data[i] = dy.data[i] * detail::af_slope(spec_, input_.data[i]);
        if (!learnable_.empty()) {
            AfParamGrads acc;
            for (std::size_t i = 0; i < dy.numel(); ++i) {
                const AfParamGrads g = detail::af_param_grads(spec_, input_.data[i]);
                acc.dA += dy.data[i] * g.dA;
                acc.dB += dy.data[i] * g.dB;
                acc.dalpha += dy.data[i] * g.dalpha;
                acc.dbeta += dy.data[i] * g.dbeta;
                acc.ddelta += dy.data[i] * g.ddelta;
            }
            for (auto& lp : learnable_) lp.value.grad[0] += acc.get(lp.id);
        }
        return dx;
    }

    std::vector<Param> parameters() override {
        std::vector<Param> out;
        for (auto& lp : learnable_)
            out.push_back({af_param_name(lp.id), &lp.value, /*weight_decay=*/false});
        return out;
    }

    void post_step() override {
        sync_spec_from_tensors();
        spec_ = af_project_constraints(spec_);
        for (auto& lp : learnable_) lp.value.data[0] = spec_.param(lp.id);
    }

    const char* kind() const override { return "activation"; }

    std::string describe() const override { return "activation:" + af_spec_to_text(spec_); }

    const ActivationSpec& spec() const { return spec_; }

    void set_spec(ActivationSpec s) {
        af_validate(s);
        spec_ = s;
        for (auto& lp : learnable_) lp.value.data[0] = spec_.param(lp.id);
    }

private:
    double detail_value(double x) const { return detail::af_value(spec_, x); }

    void sync_spec_from_tensors() {
        for (const auto& lp : learnable_) spec_.set_param(lp.id, lp.value.data[0]);
    }

    struct LearnableParam {
        AfParam id;
        Tensor value;
    };

    ActivationSpec spec_;
    std::vector<LearnableParam> learnable_;
    Tensor input_;
};

class Flatten : public Layer {
public:
    Tensor forward(const Tensor& x) override {
        check(x.rank() >= 2, ErrorKind::data,
              "flatten: expected rank >= 2, got " + shape_str(x.shape));
        in_shape_ = x.shape;
        Tensor y({x.dim(0), x.numel() / x.dim(0)}, x.data);
        return y;
    }

    Tensor backward(const Tensor& dy) override { return Tensor(in_shape_, dy.data); }

    const char* kind() const override { return "flatten"; }

private:
    Shape in_shape_;
};

} // namespace lpnet
