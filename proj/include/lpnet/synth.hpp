#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "lpnet/datasets.hpp"
#include "lpnet/rng.hpp"

namespace lpnet {
namespace synth {

using Stroke = std::vector<std::array<double, 2>>;
using Glyph = std::vector<Stroke>;

/// Digit skeletons in a 20x20 design box (y grows downward). Rendering
/// jitters them with a random affine map, so only topology matters here.
inline const std::array<Glyph, 10>& glyphs() {
    auto ellipse = [](double cx, double cy, double rx, double ry, int n = 14) {
        Stroke s;
        for (int i = 0; i <= n; ++i) {
            const double a = 2.0 * std::numbers::pi * i / n;
            s.push_back({cx + rx * std::sin(a), cy - ry * std::cos(a)});
        }
        return s;
    };
    static const std::array<Glyph, 10> g = {{
        // 0
        {ellipse(10, 10, 5.2, 7.2)},
        // 1
        {{{7.5, 5.5}, {11.0, 3.0}, {11.0, 17.0}}},
        // 2
        {{{5.5, 6.5}, {6.5, 4.3}, {8.5, 3.2}, {11.0, 3.2}, {13.2, 4.4},
          {14.2, 6.4}, {13.8, 8.6}, {5.5, 17.0}, {15.0, 17.0}}},
        // 3
        {{{5.8, 4.6}, {9.5, 3.2}, {12.8, 4.4}, {13.4, 7.0}, {11.5, 9.3},
          {9.0, 10.0}, {12.2, 10.6}, {13.9, 12.8}, {13.2, 15.4}, {10.0, 17.0},
          {6.0, 15.8}}},
        // 4
        {{{12.5, 3.0}, {5.0, 12.5}, {15.5, 12.5}}, {{12.5, 8.0}, {12.5, 17.0}}},
        // 5
        {{{14.2, 3.0}, {6.2, 3.0}, {5.6, 9.6}, {9.0, 8.6}, {12.4, 9.2},
          {14.2, 11.6}, {13.9, 14.6}, {11.0, 16.8}, {7.0, 16.4}, {5.0, 14.8}}},
        // 6
        {{{13.4, 3.0}, {9.2, 6.0}, {6.6, 10.0}, {6.0, 13.2}, {7.4, 16.0},
          {10.4, 17.0}, {13.0, 15.6}, {14.0, 12.8}, {12.6, 10.4}, {9.6, 9.8},
          {6.8, 11.4}}},
        // 7
        {{{5.0, 3.2}, {15.0, 3.2}, {9.0, 17.0}}},
        // 8
        {ellipse(10, 6.6, 3.4, 3.5), ellipse(10, 13.3, 4.1, 4.0)},
        // 9
        {ellipse(10.2, 6.9, 3.7, 3.8), {{13.9, 6.6}, {13.2, 17.0}}},
    }};
    return g;
}

namespace detail {

inline double dist_to_segment(double px, double py, const std::array<double, 2>& a,
                              const std::array<double, 2>& b) {
    const double vx = b[0] - a[0], vy = b[1] - a[1];
    const double wx = px - a[0], wy = py - a[1];
    const double vv = vx * vx + vy * vy;
    double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = px - (a[0] + t * vx), dy = py - (a[1] + t * vy);
    return std::hypot(dx, dy);
}

} // namespace detail

/// One 28x28 digit rendered with a random affine jitter and soft stroke
/// edges. Pixel values in [0,1].
inline void render_digit(double* plane, std::size_t digit, Rng& rng) {
    const Glyph& glyph = glyphs()[digit];
    const double angle = rng.uniform(-0.22, 0.22);
    const double sx = rng.uniform(0.85, 1.12);
    const double sy = rng.uniform(0.85, 1.12);
    const double shear = rng.uniform(-0.15, 0.15);
    const double tx = rng.uniform(-1.8, 1.8);
    const double ty = rng.uniform(-1.8, 1.8);
    const double thickness = rng.uniform(1.25, 2.2);
    const double intensity = rng.uniform(0.75, 1.0);
    const double ca = std::cos(angle), sa = std::sin(angle);

    Glyph placed = glyph;
    for (Stroke& s : placed)
        for (auto& p : s) {
            double x = (p[0] - 10.0) * sx, y = (p[1] - 10.0) * sy;
            x += shear * y;
            const double rx = ca * x - sa * y, ry = sa * x + ca * y;
            p = {rx + 14.0 + tx, ry + 14.0 + ty};
        }
    for (std::size_t py = 0; py < 28; ++py)
        for (std::size_t px = 0; px < 28; ++px) {
            double d = 1e9;
            for (const Stroke& s : placed)
                for (std::size_t i = 0; i + 1 < s.size(); ++i)
                    d = std::min(d, detail::dist_to_segment(
                                        static_cast<double>(px), static_cast<double>(py),
                                        s[i], s[i + 1]));
            const double v = std::clamp(thickness / 2.0 + 0.5 - d, 0.0, 1.0);
            plane[py * 28 + px] = intensity * v;
        }
}

} // namespace synth

/// Procedurally generated 28x28 digit dataset with the MNIST tensor layout.
/// Labels cycle 0..9 so any prefix subset stays class-balanced.
inline Dataset make_synth_digits(std::size_t n, std::uint64_t seed) {
    check(n > 0, ErrorKind::usage, "make_synth_digits: need at least one sample");
    Dataset ds;
    ds.classes = 10;
    ds.images = Tensor({n, 1, 28, 28});
    ds.labels.resize(n);
    Rng master(seed);
    for (std::size_t i = 0; i < n; ++i) {
        ds.labels[i] = i % 10;
        Rng rng = master.fork(i);
        synth::render_digit(ds.images.data.data() + i * 784, ds.labels[i], rng);
    }
    return ds;
}

/// Train/test pair from disjoint random streams.
inline Mnist make_synth_mnist(std::size_t n_train, std::size_t n_test, std::uint64_t seed) {
    Mnist m;
    m.train = make_synth_digits(n_train, seed);
    m.test = make_synth_digits(n_test, seed ^ 0x9e3779b97f4a7c15ull);
    return m;
}

} // namespace lpnet
