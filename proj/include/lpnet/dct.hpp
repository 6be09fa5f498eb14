#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "lpnet/rng.hpp"
#include "lpnet/tensor.hpp"

namespace lpnet {

/// Orthonormal type-II 2D DCT over the full image plane (block size equals
/// the spatial resolution). The basis is precomputed per (h,w) so repeated
/// transforms cost two GEMMs.
class DctPlan {
public:
    DctPlan(std::size_t h, std::size_t w) : h_(h), w_(w) {
        check(h > 0 && w > 0, ErrorKind::data, "dct: empty image");
        basis_h_ = make_basis(h);
        basis_w_ = make_basis(w);
    }

    std::size_t height() const { return h_; }
    std::size_t width() const { return w_; }

    /// Y = C_h * X * C_w^T
    Tensor forward(const Tensor& plane) const {
        expect_plane(plane);
        std::vector<double> tmp(h_ * w_, 0.0);
        gemm_acc(basis_h_.data(), plane.data.data(), tmp.data(), h_, h_, w_);
        Tensor out({h_, w_});
        gemm_bt_acc(tmp.data(), basis_w_.data(), out.data.data(), h_, w_, w_);
        return out;
    }

    /// X = C_h^T * Y * C_w
    Tensor inverse(const Tensor& coeffs) const {
        expect_plane(coeffs);
        std::vector<double> tmp(h_ * w_, 0.0);
        gemm_at_acc(basis_h_.data(), coeffs.data.data(), tmp.data(), h_, h_, w_);
        Tensor out({h_, w_});
        gemm_acc(tmp.data(), basis_w_.data(), out.data.data(), h_, w_, w_);
        return out;
    }

private:
    void expect_plane(const Tensor& t) const {
        check(t.rank() == 2 && t.dim(0) == h_ && t.dim(1) == w_, ErrorKind::data,
              "dct: expected plane [" + std::to_string(h_) + "," + std::to_string(w_) +
                  "], got " + shape_str(t.shape));
    }

    // Row k is the k-th orthonormal DCT-II basis vector.
    static std::vector<double> make_basis(std::size_t n) {
        std::vector<double> b(n * n);
        const double base = std::sqrt(2.0 / static_cast<double>(n));
        for (std::size_t k = 0; k < n; ++k) {
            const double scale = (k == 0) ? std::sqrt(1.0 / static_cast<double>(n)) : base;
            for (std::size_t i = 0; i < n; ++i)
                b[k * n + i] = scale * std::cos(std::numbers::pi * (2.0 * i + 1.0) * k /
                                                (2.0 * n));
        }
        return b;
    }

    std::size_t h_, w_;
    std::vector<double> basis_h_, basis_w_;
};

inline Tensor dct2(const Tensor& plane) {
    check(plane.rank() == 2, ErrorKind::data,
          "dct2: expected rank-2 plane, got " + shape_str(plane.shape));
    return DctPlan(plane.dim(0), plane.dim(1)).forward(plane);
}

inline Tensor idct2(const Tensor& coeffs) {
    check(coeffs.rank() == 2, ErrorKind::data,
          "idct2: expected rank-2 plane, got " + shape_str(coeffs.shape));
    return DctPlan(coeffs.dim(0), coeffs.dim(1)).inverse(coeffs);
}

/// Per-image coefficient-drop policy: t is drawn uniformly from
/// [t_min, t_max] per call, and the lowest-magnitude fraction t of the
/// DCT coefficients is zeroed before reconstruction.
struct AugmentPolicy {
    double t_min = 0.0;
    double t_max = 0.5;
    bool clamp = true; // clamp reconstruction to [0,1]
};

inline void augment_validate(const AugmentPolicy& p) {
    check(0.0 <= p.t_min && p.t_min <= p.t_max && p.t_max <= 1.0, ErrorKind::usage,
          "augment: drop fraction range must satisfy 0 <= t_min <= t_max <= 1");
}

/// Deterministic core: zero the floor(t * n) lowest-magnitude coefficients of
/// one plane, then reconstruct. Ties break by index so the dropped set is
/// unique; the top-magnitude coefficient always survives.
inline Tensor dct_drop(const Tensor& plane, const DctPlan& plan, double t, bool clamp) {
    Tensor coeffs = plan.forward(plane);
    const std::size_t n = coeffs.numel();
    const auto want = static_cast<std::size_t>(std::max(0.0, t) * static_cast<double>(n));
    const std::size_t k = std::min(want, n - 1);
    if (k > 0) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                         order.end(), [&](std::size_t a, std::size_t b) {
                             const double ma = std::abs(coeffs[a]), mb = std::abs(coeffs[b]);
                             return ma != mb ? ma < mb : a < b;
                         });
        for (std::size_t i = 0; i < k; ++i) coeffs[order[i]] = 0.0;
    }
    Tensor out = plan.inverse(coeffs);
    if (clamp)
        for (double& v : out.data) v = std::clamp(v, 0.0, 1.0);
    return out;
}

/// Applies the drop to each channel plane independently; accepts [H,W] or
/// [C,H,W]. One t draw covers all channels of the image.
inline Tensor augment(const Tensor& image, const AugmentPolicy& policy, Rng& rng) {
    augment_validate(policy);
    check(image.rank() == 2 || image.rank() == 3, ErrorKind::data,
          "augment: expected [H,W] or [C,H,W], got " + shape_str(image.shape));
    const double t = (policy.t_min == policy.t_max)
                         ? policy.t_min
                         : rng.uniform(policy.t_min, policy.t_max);
    if (image.rank() == 2) {
        DctPlan plan(image.dim(0), image.dim(1));
        return dct_drop(image, plan, t, policy.clamp);
    }
    const std::size_t C = image.dim(0), H = image.dim(1), W = image.dim(2);
    DctPlan plan(H, W);
    Tensor out(image.shape);
    for (std::size_t c = 0; c < C; ++c) {
        Tensor plane({H, W});
        std::copy(image.data.begin() + c * H * W, image.data.begin() + (c + 1) * H * W,
                  plane.data.begin());
        Tensor dropped = dct_drop(plane, plan, t, policy.clamp);
        std::copy(dropped.data.begin(), dropped.data.end(), out.data.begin() + c * H * W);
    }
    return out;
}

} // namespace lpnet
