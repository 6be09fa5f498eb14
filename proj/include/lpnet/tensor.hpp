#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "lpnet/core.hpp"
#include "lpnet/rng.hpp"

namespace lpnet {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << ']';
    return os.str();
}

/// Dense row-major tensor of doubles with an optional same-shape gradient
/// buffer. Value semantics; layers and optimizers operate on these directly.
struct Tensor {
    Shape shape;
    std::vector<double> data;
    bool requires_grad = false;
    std::vector<double> grad; // empty until gradients are requested

    Tensor() = default;

    explicit Tensor(Shape s, double fill = 0.0)
        : shape(std::move(s)), data(shape_numel(shape), fill) {}

    Tensor(Shape s, std::vector<double> values) : shape(std::move(s)), data(std::move(values)) {
        check(data.size() == shape_numel(shape), ErrorKind::data,
              "tensor data size " + std::to_string(data.size()) +
                  " does not match shape " + shape_str(shape));
    }

    static Tensor zeros(Shape s) { return Tensor(std::move(s)); }

    static Tensor full(Shape s, double v) { return Tensor(std::move(s), v); }

    static Tensor randn(Shape s, Rng& rng, double stddev = 1.0) {
        Tensor t(std::move(s));
        for (double& v : t.data) v = rng.normal(0.0, stddev);
        return t;
    }

    std::size_t numel() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t dim(std::size_t i) const { return shape.at(i); }

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    void set_requires_grad(bool on) {
        requires_grad = on;
        if (on)
            grad.assign(data.size(), 0.0);
        else
            grad.clear();
    }

    void zero_grad() {
        if (!grad.empty()) grad.assign(data.size(), 0.0);
    }

    bool has_grad() const { return grad.size() == data.size() && !data.empty(); }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    /// Flat offset of an NCHW index.
    std::size_t offset4(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
        return ((n * shape[1] + c) * shape[2] + h) * shape[3] + w;
    }
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double l2_norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

/// C[m,n] += A[m,k] * B[k,n], row-major. The hot loop of conv and linear
/// layers; k-innermost ordering keeps B streaming and vectorizable.
inline void gemm_acc(const double* A, const double* B, double* C,
                     std::size_t M, std::size_t K, std::size_t N) {
    for (std::size_t m = 0; m < M; ++m) {
        const double* a = A + m * K;
        double* c = C + m * N;
        for (std::size_t k = 0; k < K; ++k) {
            const double av = a[k];
            if (av == 0.0) continue;
            const double* b = B + k * N;
            for (std::size_t n = 0; n < N; ++n) c[n] += av * b[n];
        }
    }
}

/// C[m,n] += A^T[m,k] * B[k,n] where A is stored [k,m].
inline void gemm_at_acc(const double* A, const double* B, double* C,
                        std::size_t M, std::size_t K, std::size_t N) {
    for (std::size_t k = 0; k < K; ++k) {
        const double* a = A + k * M;
        const double* b = B + k * N;
        for (std::size_t m = 0; m < M; ++m) {
            const double av = a[m];
            if (av == 0.0) continue;
            double* c = C + m * N;
            for (std::size_t n = 0; n < N; ++n) c[n] += av * b[n];
        }
    }
}

/// C[m,n] += A[m,k] * B^T[k,n] where B is stored [n,k].
inline void gemm_bt_acc(const double* A, const double* B, double* C,
                        std::size_t M, std::size_t K, std::size_t N) {
    for (std::size_t m = 0; m < M; ++m) {
        const double* a = A + m * K;
        double* c = C + m * N;
        for (std::size_t n = 0; n < N; ++n) {
            const double* b = B + n * K;
            double s = 0.0;
            for (std::size_t k = 0; k < K; ++k) s += a[k] * b[k];
            c[n] += s;
        }
    }
}

} // namespace lpnet
