#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "lpnet/dct.hpp"
#include "lpnet/rng.hpp"
#include "lpnet/tensor.hpp"

namespace lpnet {

enum class CorruptionKind {
    gaussian_noise,
    shot_noise,
    impulse_noise,
    speckle_noise,
    gaussian_blur,
    defocus_blur,
    motion_blur,
    zoom_blur,
    contrast,
    brightness,
    pixelate,
    jpeg_like,
};

inline constexpr std::size_t kCorruptionKindCount = 12;

inline constexpr std::array<CorruptionKind, kCorruptionKindCount> kAllCorruptions = {
    CorruptionKind::gaussian_noise, CorruptionKind::shot_noise,
    CorruptionKind::impulse_noise,  CorruptionKind::speckle_noise,
    CorruptionKind::gaussian_blur,  CorruptionKind::defocus_blur,
    CorruptionKind::motion_blur,    CorruptionKind::zoom_blur,
    CorruptionKind::contrast,       CorruptionKind::brightness,
    CorruptionKind::pixelate,       CorruptionKind::jpeg_like,
};

/// Frequency class of the corruption's dominant energy: additive noise is
/// high-frequency, blurs are low-frequency, the digital kinds are mixed.
enum class FreqClass { HFc, LFc, mixed };

inline const char* corruption_name(CorruptionKind k) {
    switch (k) {
        case CorruptionKind::gaussian_noise: return "gaussian_noise";
        case CorruptionKind::shot_noise: return "shot_noise";
        case CorruptionKind::impulse_noise: return "impulse_noise";
        case CorruptionKind::speckle_noise: return "speckle_noise";
        case CorruptionKind::gaussian_blur: return "gaussian_blur";
        case CorruptionKind::defocus_blur: return "defocus_blur";
        case CorruptionKind::motion_blur: return "motion_blur";
        case CorruptionKind::zoom_blur: return "zoom_blur";
        case CorruptionKind::contrast: return "contrast";
        case CorruptionKind::brightness: return "brightness";
        case CorruptionKind::pixelate: return "pixelate";
        case CorruptionKind::jpeg_like: return "jpeg_like";
    }
    throw Error(ErrorKind::usage, "corruption_name: unknown kind");
}

inline CorruptionKind corruption_from_name(const std::string& name) {
    for (CorruptionKind k : kAllCorruptions)
        if (name == corruption_name(k)) return k;
    throw Error(ErrorKind::usage, "unknown corruption kind '" + name + "'");
}

inline FreqClass freq_class(CorruptionKind k) {
    switch (k) {
        case CorruptionKind::gaussian_noise:
        case CorruptionKind::shot_noise:
        case CorruptionKind::impulse_noise:
        case CorruptionKind::speckle_noise: return FreqClass::HFc;
        case CorruptionKind::gaussian_blur:
        case CorruptionKind::defocus_blur:
        case CorruptionKind::motion_blur:
        case CorruptionKind::zoom_blur: return FreqClass::LFc;
        default: return FreqClass::mixed;
    }
}

struct CorruptionSpec {
    CorruptionKind kind = CorruptionKind::gaussian_noise;
    int severity = 1;
    std::uint64_t seed = 0;
    bool clamp = true; // disabled by the sample-statistics oracle
};

inline void corruption_validate(const CorruptionSpec& s) {
    check(s.severity >= 1 && s.severity <= 5, ErrorKind::usage,
          "corruption: severity must lie in [1,5], got " + std::to_string(s.severity));
}

/// Five severity parameters per kind. The interpretation of the value is
/// per-kind (sigma, rate, probability, kernel width, factor, ...); the
/// shipped configs/severity.conf mirrors these defaults.
struct SeverityTable {
    std::array<std::array<double, 5>, kCorruptionKindCount> values{};

    double at(CorruptionKind k, int severity) const {
        check(severity >= 1 && severity <= 5, ErrorKind::usage,
              "severity table: severity must lie in [1,5]");
        return values[static_cast<std::size_t>(k)][static_cast<std::size_t>(severity - 1)];
    }

    void set(CorruptionKind k, std::array<double, 5> v) {
        values[static_cast<std::size_t>(k)] = v;
    }

    static SeverityTable defaults() {
        SeverityTable t;
        t.set(CorruptionKind::gaussian_noise, {0.08, 0.13, 0.20, 0.28, 0.38});
        t.set(CorruptionKind::shot_noise, {60.0, 25.0, 12.0, 7.0, 4.0});
        t.set(CorruptionKind::impulse_noise, {0.03, 0.06, 0.12, 0.20, 0.30});
        t.set(CorruptionKind::speckle_noise, {0.15, 0.25, 0.40, 0.60, 0.85});
        t.set(CorruptionKind::gaussian_blur, {0.4, 0.7, 1.0, 1.4, 1.9});
        t.set(CorruptionKind::defocus_blur, {1.0, 1.5, 2.0, 2.6, 3.3});
        t.set(CorruptionKind::motion_blur, {2.5, 4.0, 5.5, 7.0, 9.0});
        t.set(CorruptionKind::zoom_blur, {1.04, 1.08, 1.14, 1.22, 1.32});
        t.set(CorruptionKind::contrast, {0.75, 0.55, 0.40, 0.28, 0.18});
        t.set(CorruptionKind::brightness, {0.08, 0.14, 0.20, 0.27, 0.35});
        t.set(CorruptionKind::pixelate, {2.0, 3.0, 4.0, 5.0, 6.0});
        t.set(CorruptionKind::jpeg_like, {0.06, 0.12, 0.20, 0.30, 0.45});
        return t;
    }
};

inline void save_severity_table(const SeverityTable& t, const std::string& path) {
    std::ofstream out(path);
    check(out.good(), ErrorKind::data, "cannot write severity table to " + path);
    out << "# severity parameters, one line per corruption kind:\n";
    out << "# <kind> = <s1> <s2> <s3> <s4> <s5>\n";
    out << "# units are per-kind: sigma / rate / probability / width / factor\n";
    out << std::setprecision(12);
    for (CorruptionKind k : kAllCorruptions) {
        out << corruption_name(k) << " =";
        for (double v : t.values[static_cast<std::size_t>(k)]) out << ' ' << v;
        out << '\n';
    }
}

inline SeverityTable load_severity_table(const std::string& path) {
    std::ifstream in(path);
    check(in.good(), ErrorKind::data, "cannot open severity table " + path);
    SeverityTable t = SeverityTable::defaults();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream is(line);
        std::string name, eq;
        if (!(is >> name)) continue;
        check(static_cast<bool>(is >> eq) && eq == "=", ErrorKind::data,
              path + ":" + std::to_string(lineno) + ": expected '<kind> = v1..v5'");
        CorruptionKind k = corruption_from_name(name);
        std::array<double, 5> v{};
        for (double& x : v)
            check(static_cast<bool>(is >> x), ErrorKind::data,
                  path + ":" + std::to_string(lineno) + ": expected 5 values for " + name);
        double extra;
        check(!(is >> extra), ErrorKind::data,
              path + ":" + std::to_string(lineno) + ": more than 5 values for " + name);
        t.set(k, v);
    }
    return t;
}

namespace detail {

struct PlaneView {
    std::size_t channels, h, w;
};

inline PlaneView plane_view(const Tensor& image, const char* who) {
    check(image.rank() == 2 || image.rank() == 3, ErrorKind::data,
          std::string(who) + ": expected [H,W] or [C,H,W], got " + shape_str(image.shape));
    if (image.rank() == 2) return {1, image.dim(0), image.dim(1)};
    return {image.dim(0), image.dim(1), image.dim(2)};
}

inline std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
    const auto m = static_cast<std::ptrdiff_t>(n);
    while (i < 0 || i >= m) {
        if (i < 0) i = -i;
        if (i >= m) i = 2 * m - 2 - i;
    }
    return static_cast<std::size_t>(i);
}

inline void convolve_plane(const double* src, double* dst, std::size_t H, std::size_t W,
                           const std::vector<double>& kernel, std::size_t kh,
                           std::size_t kw) {
    const std::ptrdiff_t cy = static_cast<std::ptrdiff_t>(kh) / 2;
    const std::ptrdiff_t cx = static_cast<std::ptrdiff_t>(kw) / 2;
    for (std::size_t y = 0; y < H; ++y)
        for (std::size_t x = 0; x < W; ++x) {
            double acc = 0.0;
            for (std::size_t ky = 0; ky < kh; ++ky) {
                const std::size_t sy =
                    reflect(static_cast<std::ptrdiff_t>(y) + static_cast<std::ptrdiff_t>(ky) - cy, H);
                for (std::size_t kx = 0; kx < kw; ++kx) {
                    const std::size_t sx =
                        reflect(static_cast<std::ptrdiff_t>(x) + static_cast<std::ptrdiff_t>(kx) - cx, W);
                    acc += kernel[ky * kw + kx] * src[sy * W + sx];
                }
            }
            dst[y * W + x] = acc;
        }
}

inline std::vector<double> gaussian_kernel_1d(double sigma) {
    const auto radius = static_cast<std::size_t>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        const double d = static_cast<double>(i) - static_cast<double>(radius);
        k[i] = std::exp(-0.5 * d * d / (sigma * sigma));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

/// Bilinear lookup with edge clamping; coordinates in pixel units.
inline double sample_bilinear(const double* src, std::size_t H, std::size_t W, double y,
                              double x) {
    y = std::clamp(y, 0.0, static_cast<double>(H - 1));
    x = std::clamp(x, 0.0, static_cast<double>(W - 1));
    const std::size_t y0 = static_cast<std::size_t>(y);
    const std::size_t x0 = static_cast<std::size_t>(x);
    const std::size_t y1 = std::min(y0 + 1, H - 1);
    const std::size_t x1 = std::min(x0 + 1, W - 1);
    const double fy = y - static_cast<double>(y0), fx = x - static_cast<double>(x0);
    return (1 - fy) * ((1 - fx) * src[y0 * W + x0] + fx * src[y0 * W + x1]) +
           fy * ((1 - fx) * src[y1 * W + x0] + fx * src[y1 * W + x1]);
}

/// Center zoom by factor s >= 1, bilinear.
inline void zoom_plane(const double* src, double* dst, std::size_t H, std::size_t W,
                       double s) {
    const double cy = (static_cast<double>(H) - 1.0) / 2.0;
    const double cx = (static_cast<double>(W) - 1.0) / 2.0;
    for (std::size_t y = 0; y < H; ++y)
        for (std::size_t x = 0; x < W; ++x)
            dst[y * W + x] = sample_bilinear(src, H, W, cy + (y - cy) / s, cx + (x - cx) / s);
}

/// Parameter-level corruption core. `param` is the severity-table value
/// (or an interpolated one, for perturbation sequences).
inline Tensor corrupt_param(const Tensor& image, CorruptionKind kind, double param,
                            Rng& rng, bool clamp) {
    const PlaneView pv = plane_view(image, "corrupt");
    Tensor out = image;
    const std::size_t plane_n = pv.h * pv.w;
    switch (kind) {
        case CorruptionKind::gaussian_noise:
            for (double& v : out.data) v += param * rng.normal();
            break;
        case CorruptionKind::shot_noise: {
            check(param > 0.0, ErrorKind::usage, "shot_noise: rate must be positive");
            for (double& v : out.data)
                v = static_cast<double>(rng.poisson(std::max(v, 0.0) * param)) / param;
            break;
        }
        case CorruptionKind::impulse_noise:
            for (double& v : out.data)
                if (rng.uniform() < param) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
            break;
        case CorruptionKind::speckle_noise:
            for (double& v : out.data) v += v * param * rng.normal();
            break;
        case CorruptionKind::gaussian_blur: {
            if (param < 1e-6) break;
            const std::vector<double> k = gaussian_kernel_1d(param);
            std::vector<double> tmp(plane_n);
            for (std::size_t c = 0; c < pv.channels; ++c) {
                double* plane = out.data.data() + c * plane_n;
                convolve_plane(plane, tmp.data(), pv.h, pv.w, k, 1, k.size());
                convolve_plane(tmp.data(), plane, pv.h, pv.w, k, k.size(), 1);
            }
            break;
        }
        case CorruptionKind::defocus_blur: {
            if (param < 0.5) break;
            const auto r = static_cast<std::ptrdiff_t>(std::ceil(param));
            const std::size_t side = static_cast<std::size_t>(2 * r + 1);
            std::vector<double> k(side * side, 0.0);
            double sum = 0.0;
            for (std::ptrdiff_t dy = -r; dy <= r; ++dy)
                for (std::ptrdiff_t dx = -r; dx <= r; ++dx)
                    if (static_cast<double>(dy * dy + dx * dx) <= param * param) {
                        k[(dy + r) * side + (dx + r)] = 1.0;
                        sum += 1.0;
                    }
            for (double& v : k) v /= sum;
            std::vector<double> tmp(plane_n);
            for (std::size_t c = 0; c < pv.channels; ++c) {
                double* plane = out.data.data() + c * plane_n;
                convolve_plane(plane, tmp.data(), pv.h, pv.w, k, side, side);
                std::copy(tmp.begin(), tmp.end(), plane);
            }
            break;
        }
        case CorruptionKind::motion_blur: {
            const double angle = rng.uniform(0.0, std::numbers::pi);
            if (param < 1.5) break;
            const auto taps = static_cast<std::size_t>(std::lround(param));
            const auto r = static_cast<std::ptrdiff_t>(std::ceil(param / 2.0)) + 1;
            const std::size_t side = static_cast<std::size_t>(2 * r + 1);
            std::vector<double> k(side * side, 0.0);
            for (std::size_t j = 0; j < taps; ++j) {
                const double d = static_cast<double>(j) - (static_cast<double>(taps) - 1.0) / 2.0;
                const double py = static_cast<double>(r) + d * std::sin(angle);
                const double px = static_cast<double>(r) + d * std::cos(angle);
                const auto y0 = static_cast<std::size_t>(py);
                const auto x0 = static_cast<std::size_t>(px);
                const double fy = py - static_cast<double>(y0);
                const double fx = px - static_cast<double>(x0);
                k[y0 * side + x0] += (1 - fy) * (1 - fx);
                k[y0 * side + x0 + 1] += (1 - fy) * fx;
                k[(y0 + 1) * side + x0] += fy * (1 - fx);
                k[(y0 + 1) * side + x0 + 1] += fy * fx;
            }
            double sum = 0.0;
            for (double v : k) sum += v;
            for (double& v : k) v /= sum;
            std::vector<double> tmp(plane_n);
            for (std::size_t c = 0; c < pv.channels; ++c) {
                double* plane = out.data.data() + c * plane_n;
                convolve_plane(plane, tmp.data(), pv.h, pv.w, k, side, side);
                std::copy(tmp.begin(), tmp.end(), plane);
            }
            break;
        }
        case CorruptionKind::zoom_blur: {
            if (param <= 1.0 + 1e-9) break;
            constexpr std::size_t kSteps = 8;
            std::vector<double> acc(plane_n), tmp(plane_n);
            for (std::size_t c = 0; c < pv.channels; ++c) {
                double* plane = out.data.data() + c * plane_n;
                std::fill(acc.begin(), acc.end(), 0.0);
                for (std::size_t s = 0; s < kSteps; ++s) {
                    const double scale =
                        1.0 + (param - 1.0) * static_cast<double>(s) / (kSteps - 1);
                    zoom_plane(plane, tmp.data(), pv.h, pv.w, scale);
                    for (std::size_t i = 0; i < plane_n; ++i) acc[i] += tmp[i];
                }
                for (std::size_t i = 0; i < plane_n; ++i) plane[i] = acc[i] / kSteps;
            }
            break;
        }
        case CorruptionKind::contrast: {
            if (param == 1.0) break;
            for (std::size_t c = 0; c < pv.channels; ++c) {
                double* plane = out.data.data() + c * plane_n;
                double mean = 0.0;
                for (std::size_t i = 0; i < plane_n; ++i) mean += plane[i];
                mean /= static_cast<double>(plane_n);
                for (std::size_t i = 0; i < plane_n; ++i)
                    plane[i] = mean + (plane[i] - mean) * param;
            }
            break;
        }
        case CorruptionKind::brightness:
            for (double& v : out.data) v += param;
            break;
        case CorruptionKind::pixelate: {
            const auto b = static_cast<std::size_t>(std::max(1.0, std::round(param)));
            if (b <= 1) break;
            for (std::size_t c = 0; c < pv.channels; ++c) {
                double* plane = out.data.data() + c * plane_n;
                for (std::size_t by = 0; by < pv.h; by += b)
                    for (std::size_t bx = 0; bx < pv.w; bx += b) {
                        const std::size_t ey = std::min(by + b, pv.h);
                        const std::size_t ex = std::min(bx + b, pv.w);
                        double mean = 0.0;
                        for (std::size_t y = by; y < ey; ++y)
                            for (std::size_t x = bx; x < ex; ++x) mean += plane[y * pv.w + x];
                        mean /= static_cast<double>((ey - by) * (ex - bx));
                        for (std::size_t y = by; y < ey; ++y)
                            for (std::size_t x = bx; x < ex; ++x) plane[y * pv.w + x] = mean;
                    }
            }
            break;
        }
        case CorruptionKind::jpeg_like: {
            if (param <= 0.0) break;
            // 8x8 block DCT quantization; edges handled by replicate-padding
            // the image up to a block multiple, then cropping back.
            static const DctPlan block(8, 8);
            const std::size_t PH = (pv.h + 7) / 8 * 8, PW = (pv.w + 7) / 8 * 8;
            std::vector<double> padded(PH * PW);
            for (std::size_t c = 0; c < pv.channels; ++c) {
                double* plane = out.data.data() + c * plane_n;
                for (std::size_t y = 0; y < PH; ++y)
                    for (std::size_t x = 0; x < PW; ++x)
                        padded[y * PW + x] =
                            plane[std::min(y, pv.h - 1) * pv.w + std::min(x, pv.w - 1)];
                Tensor cell({8, 8});
                for (std::size_t by = 0; by < PH; by += 8)
                    for (std::size_t bx = 0; bx < PW; bx += 8) {
                        for (std::size_t y = 0; y < 8; ++y)
                            for (std::size_t x = 0; x < 8; ++x)
                                cell.data[y * 8 + x] = padded[(by + y) * PW + bx + x];
                        Tensor coeffs = block.forward(cell);
                        for (double& v : coeffs.data)
                            v = std::round(v / param) * param;
                        Tensor rec = block.inverse(coeffs);
                        for (std::size_t y = 0; y < 8; ++y)
                            for (std::size_t x = 0; x < 8; ++x)
                                padded[(by + y) * PW + bx + x] = rec.data[y * 8 + x];
                    }
                for (std::size_t y = 0; y < pv.h; ++y)
                    for (std::size_t x = 0; x < pv.w; ++x)
                        plane[y * pv.w + x] = padded[y * PW + x];
            }
            break;
        }
    }
    if (clamp)
        for (double& v : out.data) v = std::clamp(v, 0.0, 1.0);
    return out;
}

} // namespace detail

/// Applies the spec's corruption. Deterministic: the random stream is
/// seeded from spec.seed alone.
inline Tensor corrupt(const Tensor& image, const CorruptionSpec& spec,
                      const SeverityTable& table = SeverityTable::defaults()) {
    corruption_validate(spec);
    Rng rng(spec.seed);
    return detail::corrupt_param(image, spec.kind, table.at(spec.kind, spec.severity), rng,
                                 spec.clamp);
}

struct PerturbationSequence {
    CorruptionKind kind = CorruptionKind::gaussian_noise;
    std::vector<Tensor> frames;
};

/// Progressive perturbation clip: frame 1 is the clean image bit-exactly,
/// later frames interpolate the corruption magnitude linearly up to the
/// severity-5 table value. Noise kinds reuse one frozen noise field scaled
/// per frame so the clip degrades coherently; parametric kinds recompute
/// at each interpolated parameter with the same seed.
inline PerturbationSequence make_sequence(const Tensor& image, CorruptionKind kind,
                                          std::size_t v, std::uint64_t seed,
                                          const SeverityTable& table = SeverityTable::defaults()) {
    check(v >= 2, ErrorKind::usage,
          "make_sequence: need at least 2 frames, got " + std::to_string(v));
    PerturbationSequence seq;
    seq.kind = kind;
    seq.frames.reserve(v);
    seq.frames.push_back(image);
    const double p5 = table.at(kind, 5);
    if (freq_class(kind) == FreqClass::HFc) {
        Rng rng(seed);
        Tensor end = detail::corrupt_param(image, kind, p5, rng, /*clamp=*/false);
        for (std::size_t i = 1; i < v; ++i) {
            const double a = static_cast<double>(i) / static_cast<double>(v - 1);
            Tensor frame = image;
            for (std::size_t j = 0; j < frame.numel(); ++j)
                frame.data[j] = std::clamp(
                    image.data[j] + a * (end.data[j] - image.data[j]), 0.0, 1.0);
            seq.frames.push_back(std::move(frame));
        }
        return seq;
    }
    double neutral = 0.0;
    if (kind == CorruptionKind::zoom_blur || kind == CorruptionKind::contrast) neutral = 1.0;
    if (kind == CorruptionKind::pixelate) neutral = 1.0;
    for (std::size_t i = 1; i < v; ++i) {
        const double a = static_cast<double>(i) / static_cast<double>(v - 1);
        const double param = neutral + a * (p5 - neutral);
        Rng rng(seed);
        seq.frames.push_back(detail::corrupt_param(image, kind, param, rng, /*clamp=*/true));
    }
    return seq;
}

/// Mean spectral energy per radial frequency band, averaged over a set of
/// images: band 0 holds the lowest frequencies (incl. DC), the last band
/// the corner frequencies. Used to verify the HFc/LFc tagging.
inline std::vector<double> freq_profile(const std::vector<Tensor>& images,
                                        std::size_t bands = 8) {
    check(!images.empty(), ErrorKind::usage, "freq_profile: need at least one image");
    check(bands >= 2, ErrorKind::usage, "freq_profile: need at least 2 bands");
    std::vector<double> band_energy(bands, 0.0);
    std::vector<double> band_count(bands, 0.0);
    using cd = std::complex<double>;
    for (const Tensor& img : images) {
        const detail::PlaneView pv = detail::plane_view(img, "freq_profile");
        const std::size_t H = pv.h, W = pv.w;
        // separable DFT: rows then columns
        std::vector<cd> tw_w(W * W), tw_h(H * H);
        for (std::size_t v = 0; v < W; ++v)
            for (std::size_t n = 0; n < W; ++n)
                tw_w[v * W + n] = std::polar(1.0, -2.0 * std::numbers::pi *
                                                      static_cast<double>(v * n) / W);
        for (std::size_t u = 0; u < H; ++u)
            for (std::size_t m = 0; m < H; ++m)
                tw_h[u * H + m] = std::polar(1.0, -2.0 * std::numbers::pi *
                                                      static_cast<double>(u * m) / H);
        std::vector<cd> rows(H * W), full(H * W);
        for (std::size_t c = 0; c < pv.channels; ++c) {
            const double* plane = img.data.data() + c * H * W;
            for (std::size_t m = 0; m < H; ++m)
                for (std::size_t v = 0; v < W; ++v) {
                    cd acc(0.0, 0.0);
                    for (std::size_t n = 0; n < W; ++n)
                        acc += plane[m * W + n] * tw_w[v * W + n];
                    rows[m * W + v] = acc;
                }
            for (std::size_t u = 0; u < H; ++u)
                for (std::size_t v = 0; v < W; ++v) {
                    cd acc(0.0, 0.0);
                    for (std::size_t m = 0; m < H; ++m) acc += tw_h[u * H + m] * rows[m * W + v];
                    full[u * W + v] = acc;
                }
            for (std::size_t u = 0; u < H; ++u)
                for (std::size_t v = 0; v < W; ++v) {
                    const double fu = static_cast<double>(std::min(u, H - u)) /
                                      (static_cast<double>(H) / 2.0);
                    const double fv = static_cast<double>(std::min(v, W - v)) /
                                      (static_cast<double>(W) / 2.0);
                    const double r = std::sqrt((fu * fu + fv * fv) / 2.0);
                    const auto b = std::min(bands - 1,
                                            static_cast<std::size_t>(r * static_cast<double>(bands)));
                    band_energy[b] += std::norm(full[u * W + v]);
                    band_count[b] += 1.0;
                }
        }
    }
    for (std::size_t b = 0; b < bands; ++b)
        if (band_count[b] > 0.0) band_energy[b] /= band_count[b];
    return band_energy;
}

} // namespace lpnet
