#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "lpnet/core.hpp"

namespace lpnet {

enum class ActivationKind {
    relu,
    leaky_relu,
    p_relu,
    clipped_relu,
    tent,
    log_tailed_relu,
    tanh,
    swish,
    lp_relu1,
    lp_relu2,
};

/// Identifiers for the (possibly learnable) scalar parameters of a spec.
enum class AfParam { A, B, alpha, beta, delta };

/// Summary statistics of clean-set post-activation magnitudes, used to
/// calibrate cut-off initialisation on networks whose activation scale
/// differs from the reference backbone. p99 anchors the first cut-off
/// (upper edge of typical signal), p999 the second (beyond it, activations
/// are almost certainly noise-driven).
struct ActivationStats {
    double p99 = 0.0;
    double p999 = 0.0;
};

/// One activation function: kind plus its scalar parameters.
///
///   A      first cut-off (clipped_relu, log_tailed_relu, lp_relu1, lp_relu2)
///   B      second cut-off (lp_relu2), B > A
///   alpha  negative-side slope (leaky_relu, p_relu) or phase-1 filtering
///          factor (lp_relu1, lp_relu2)
///   beta   phase-2 filtering factor (lp_relu2) or shape parameter (swish)
///   delta  tent half-width
struct ActivationSpec {
    ActivationKind kind = ActivationKind::relu;
    double A = 0.0;
    double B = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double delta = 0.0;

    struct LearnableMask {
        bool A = false;
        bool B = false;
        bool alpha = false;
        bool beta = false;
        bool delta = false;
    } learnable;

    bool is_learnable(AfParam p) const {
        switch (p) {
            case AfParam::A: return learnable.A;
            case AfParam::B: return learnable.B;
            case AfParam::alpha: return learnable.alpha;
            case AfParam::beta: return learnable.beta;
            case AfParam::delta: return learnable.delta;
        }
        return false;
    }

    double param(AfParam p) const {
        switch (p) {
            case AfParam::A: return A;
            case AfParam::B: return B;
            case AfParam::alpha: return alpha;
            case AfParam::beta: return beta;
            case AfParam::delta: return delta;
        }
        return 0.0;
    }

    void set_param(AfParam p, double v) {
        switch (p) {
            case AfParam::A: A = v; break;
            case AfParam::B: B = v; break;
            case AfParam::alpha: alpha = v; break;
            case AfParam::beta: beta = v; break;
            case AfParam::delta: delta = v; break;
        }
    }
};

inline const char* af_name(ActivationKind k) {
    switch (k) {
        case ActivationKind::relu: return "relu";
        case ActivationKind::leaky_relu: return "leaky_relu";
        case ActivationKind::p_relu: return "p_relu";
        case ActivationKind::clipped_relu: return "clipped_relu";
        case ActivationKind::tent: return "tent";
        case ActivationKind::log_tailed_relu: return "log_tailed_relu";
        case ActivationKind::tanh: return "tanh";
        case ActivationKind::swish: return "swish";
        case ActivationKind::lp_relu1: return "lp_relu1";
        case ActivationKind::lp_relu2: return "lp_relu2";
    }
    return "?";
}

inline const char* af_param_name(AfParam p) {
    switch (p) {
        case AfParam::A: return "A";
        case AfParam::B: return "B";
        case AfParam::alpha: return "alpha";
        case AfParam::beta: return "beta";
        case AfParam::delta: return "delta";
    }
    return "?";
}

inline ActivationKind af_kind_from_name(const std::string& name) {
    for (ActivationKind k :
         {ActivationKind::relu, ActivationKind::leaky_relu, ActivationKind::p_relu,
          ActivationKind::clipped_relu, ActivationKind::tent,
          ActivationKind::log_tailed_relu, ActivationKind::tanh, ActivationKind::swish,
          ActivationKind::lp_relu1, ActivationKind::lp_relu2}) {
        if (name == af_name(k)) return k;
    }
    throw Error(ErrorKind::usage, "unknown activation kind '" + name + "'");
}

/// Parameters that exist for a given kind, in checkpoint order.
inline std::vector<AfParam> af_params_of(ActivationKind k) {
    switch (k) {
        case ActivationKind::relu:
        case ActivationKind::tanh: return {};
        case ActivationKind::leaky_relu:
        case ActivationKind::p_relu: return {AfParam::alpha};
        case ActivationKind::clipped_relu:
        case ActivationKind::log_tailed_relu: return {AfParam::A};
        case ActivationKind::tent: return {AfParam::delta};
        case ActivationKind::swish: return {AfParam::beta};
        case ActivationKind::lp_relu1: return {AfParam::A, AfParam::alpha};
        case ActivationKind::lp_relu2:
            return {AfParam::A, AfParam::B, AfParam::alpha, AfParam::beta};
    }
    return {};
}

/// Throws if the spec violates its kind's invariants. Evaluation functions
/// call this first. alpha == 1 is accepted here (it is the exact ReLU
/// degeneration); the training-time projection keeps alpha strictly below 1.
inline void af_validate(const ActivationSpec& s) {
    auto req = [&](bool ok, const char* what) {
        if (!ok)
            throw Error(ErrorKind::usage, std::string("invalid ") + af_name(s.kind) +
                                              " spec: " + what);
    };
    for (AfParam p : af_params_of(s.kind))
        req(std::isfinite(s.param(p)), "non-finite parameter");
    switch (s.kind) {
        case ActivationKind::clipped_relu:
        case ActivationKind::log_tailed_relu:
            req(s.A >= 0.0, "requires A >= 0");
            break;
        case ActivationKind::tent:
            req(s.delta > 0.0, "requires delta > 0");
            break;
        case ActivationKind::lp_relu1:
            req(s.A >= 0.0, "requires A >= 0");
            req(s.alpha >= 0.0 && s.alpha <= 1.0, "requires 0 <= alpha <= 1");
            break;
        case ActivationKind::lp_relu2:
            req(s.A >= 0.0, "requires A >= 0");
            req(s.A < s.B, "requires A < B");
            req(s.alpha >= 0.0 && s.alpha <= 1.0, "requires 0 <= alpha <= 1");
            req(s.beta >= 0.0, "requires beta >= 0");
            req(s.alpha > s.beta, "requires alpha > beta");
            break;
        default: break;
    }
}

namespace detail {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Unvalidated forward value. Piecewise branches are written so both sides
/// of every breakpoint evaluate to the same value there.
inline double af_value(const ActivationSpec& s, double x) {
    switch (s.kind) {
        case ActivationKind::relu: return x > 0.0 ? x : 0.0;
        case ActivationKind::leaky_relu:
        case ActivationKind::p_relu: return x > 0.0 ? x : s.alpha * x;
        case ActivationKind::clipped_relu:
            if (x <= 0.0) return 0.0;
            return x <= s.A ? x : s.A;
        case ActivationKind::tent: {
            double v = s.delta - std::abs(x);
            return v > 0.0 ? v : 0.0;
        }
        case ActivationKind::log_tailed_relu:
            // log1p keeps the tail continuous at A: f(A) = A + log(1) = A.
            if (x <= 0.0) return 0.0;
            return x <= s.A ? x : s.A + std::log1p(x - s.A);
        case ActivationKind::tanh: return std::tanh(x);
        case ActivationKind::swish: return x * sigmoid(s.beta * x);
        case ActivationKind::lp_relu1:
            if (x <= 0.0) return 0.0;
            return x <= s.A ? x : s.A + s.alpha * (x - s.A);
        case ActivationKind::lp_relu2: {
            if (x <= 0.0) return 0.0;
            if (x <= s.A) return x;
            if (x <= s.B) return s.A + s.alpha * (x - s.A);
            // phase-2 tail anchored at the phase-1 value at B
            return s.A + s.alpha * (s.B - s.A) + s.beta * (x - s.B);
        }
    }
    return 0.0;
}

/// Unvalidated derivative, right-hand convention at breakpoints: D(b) is
/// the slope of the region to the right of b.
inline double af_slope(const ActivationSpec& s, double x) {
    switch (s.kind) {
        case ActivationKind::relu: return x >= 0.0 ? 1.0 : 0.0;
        case ActivationKind::leaky_relu:
        case ActivationKind::p_relu: return x >= 0.0 ? 1.0 : s.alpha;
        case ActivationKind::clipped_relu:
            if (x < 0.0 || x >= s.A) return 0.0;
            return 1.0;
        case ActivationKind::tent:
            if (x < -s.delta || x >= s.delta) return 0.0;
            return x < 0.0 ? 1.0 : -1.0;
        case ActivationKind::log_tailed_relu:
            if (x < 0.0) return 0.0;
            return x < s.A ? 1.0 : 1.0 / (1.0 + x - s.A);
        case ActivationKind::tanh: {
            double t = std::tanh(x);
            return 1.0 - t * t;
        }
        case ActivationKind::swish: {
            double sg = sigmoid(s.beta * x);
            return sg + x * s.beta * sg * (1.0 - sg);
        }
        case ActivationKind::lp_relu1:
            if (x < 0.0) return 0.0;
            return x < s.A ? 1.0 : s.alpha;
        case ActivationKind::lp_relu2:
            if (x < 0.0) return 0.0;
            if (x < s.A) return 1.0;
            return x < s.B ? s.alpha : s.beta;
    }
    return 0.0;
}

} // namespace detail

/// Forward value, applied elementwise by activation layers.
inline double af_forward(const ActivationSpec& s, double x) {
    af_validate(s);
    return detail::af_value(s, x);
}

/// dF/dx with the right-hand convention at breakpoints.
inline double af_derivative(const ActivationSpec& s, double x) {
    af_validate(s);
    return detail::af_slope(s, x);
}

struct AfParamGrads {
    double dA = 0.0;
    double dB = 0.0;
    double dalpha = 0.0;
    double dbeta = 0.0;
    double ddelta = 0.0;

    double get(AfParam p) const {
        switch (p) {
            case AfParam::A: return dA;
            case AfParam::B: return dB;
            case AfParam::alpha: return dalpha;
            case AfParam::beta: return dbeta;
            case AfParam::delta: return ddelta;
        }
        return 0.0;
    }
};

namespace detail {

/// Unvalidated dF/dparam at fixed x, region convention matching af_slope.
inline AfParamGrads af_param_grads(const ActivationSpec& s, double x) {
    AfParamGrads g;
    switch (s.kind) {
        case ActivationKind::relu:
        case ActivationKind::tanh: break;
        case ActivationKind::leaky_relu:
        case ActivationKind::p_relu:
            if (x < 0.0) g.dalpha = x;
            break;
        case ActivationKind::clipped_relu:
            if (x >= s.A && x >= 0.0) g.dA = 1.0;
            break;
        case ActivationKind::tent:
            if (x >= -s.delta && x < s.delta) g.ddelta = 1.0;
            break;
        case ActivationKind::log_tailed_relu:
            if (x >= s.A && x >= 0.0) g.dA = 1.0 - 1.0 / (1.0 + x - s.A);
            break;
        case ActivationKind::swish: {
            double sg = detail::sigmoid(s.beta * x);
            g.dbeta = x * x * sg * (1.0 - sg);
            break;
        }
        case ActivationKind::lp_relu1:
            if (x >= s.A && x >= 0.0) {
                g.dA = 1.0 - s.alpha;
                g.dalpha = x - s.A;
            }
            break;
        case ActivationKind::lp_relu2:
            if (x >= 0.0 && x >= s.A) {
                if (x < s.B) {
                    g.dA = 1.0 - s.alpha;
                    g.dalpha = x - s.A;
                } else {
                    g.dA = 1.0 - s.alpha;
                    g.dalpha = s.B - s.A;
                    g.dB = s.alpha - s.beta;
                    g.dbeta = x - s.B;
                }
            }
            break;
    }
    return g;
}

} // namespace detail

/// dF/dparam at fixed x, region convention matching af_derivative.
inline AfParamGrads af_param_gradients(const ActivationSpec& s, double x) {
    af_validate(s);
    return detail::af_param_grads(s, x);
}

/// Breakpoints of the piecewise definition (empty for smooth kinds).
inline std::vector<double> af_breakpoints(const ActivationSpec& s) {
    switch (s.kind) {
        case ActivationKind::relu:
        case ActivationKind::leaky_relu:
        case ActivationKind::p_relu: return {0.0};
        case ActivationKind::clipped_relu:
        case ActivationKind::log_tailed_relu:
        case ActivationKind::lp_relu1: return {0.0, s.A};
        case ActivationKind::tent: return {-s.delta, 0.0, s.delta};
        case ActivationKind::tanh:
        case ActivationKind::swish: return {};
        case ActivationKind::lp_relu2: return {0.0, s.A, s.B};
    }
    return {};
}

/// Default initialisation heuristics. With `stats`, the cut-offs of the
/// low-pass kinds are anchored to the clean activation histogram instead of
/// the reference-backbone constants (A at p99, B at p999).
inline ActivationSpec af_init(ActivationKind kind,
                              const std::optional<ActivationStats>& stats = std::nullopt) {
    ActivationSpec s;
    s.kind = kind;
    switch (kind) {
        case ActivationKind::relu:
        case ActivationKind::tanh: break;
        case ActivationKind::leaky_relu:
            s.alpha = 0.01;
            break;
        case ActivationKind::p_relu:
            s.alpha = 0.01;
            s.learnable.alpha = true;
            break;
        case ActivationKind::clipped_relu:
            s.A = 6.0;
            break;
        case ActivationKind::tent:
            s.delta = 1.0;
            break;
        case ActivationKind::log_tailed_relu:
            s.A = 6.0;
            break;
        case ActivationKind::swish:
            s.beta = 1.0;
            break;
        case ActivationKind::lp_relu1:
            s.A = 6.0;
            s.alpha = 0.05;
            s.learnable.A = true;
            break;
        case ActivationKind::lp_relu2:
            s.A = 5.0;
            s.B = 8.1;
            s.alpha = 0.05;
            s.beta = s.alpha / 3.0;
            s.learnable.A = s.learnable.B = true;
            s.learnable.alpha = s.learnable.beta = true;
            break;
    }
    if (stats) {
        const double kMinCut = 1e-3;
        double a = std::max(stats->p99, kMinCut);
        double b = std::max(stats->p999, a * 1.62); // default B/A ratio 8.1/5
        if (kind == ActivationKind::lp_relu1 || kind == ActivationKind::clipped_relu ||
            kind == ActivationKind::log_tailed_relu) {
            s.A = a;
        } else if (kind == ActivationKind::lp_relu2) {
            s.A = a;
            s.B = std::max(b, a + 0.1);
        }
    }
    af_validate(s);
    return s;
}

/// Clamp a spec back into its feasible region after an optimizer step.
/// Idempotent; a valid spec passes through unchanged. Buffer between the
/// lp_relu2 cut-offs is fixed at 0.1 and the slope clamp epsilon at 1e-3.
inline ActivationSpec af_project_constraints(ActivationSpec s) {
    const double kEps = 1e-3;
    const double kBuffer = 0.1;
    auto clamp = [](double v, double lo, double hi) {
        return v < lo ? lo : (v > hi ? hi : v);
    };
    switch (s.kind) {
        case ActivationKind::clipped_relu:
        case ActivationKind::log_tailed_relu:
            s.A = std::max(s.A, 0.0);
            break;
        case ActivationKind::tent:
            s.delta = std::max(s.delta, kEps);
            break;
        case ActivationKind::lp_relu1:
            s.A = std::max(s.A, 0.0);
            s.alpha = clamp(s.alpha, 0.0, 1.0 - kEps);
            break;
        case ActivationKind::lp_relu2:
            s.A = std::max(s.A, 0.0);
            if (s.B < s.A + kBuffer) s.B = s.A + kBuffer;
            s.alpha = clamp(s.alpha, kEps, 1.0 - kEps);
            s.beta = clamp(s.beta, 0.0, s.alpha - kEps);
            break;
        default: break;
    }
    return s;
}

/// Compact text form, e.g. "lp_relu2,A=5,B=8.1,alpha=0.05,beta=0.0166...,
/// learn=A+B+alpha+beta". Doubles use 17 significant digits so the parse
/// below restores them bit-exactly.
inline std::string af_spec_to_text(const ActivationSpec& s) {
    auto num = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    std::string out = af_name(s.kind);
    std::string learn;
    for (AfParam p : af_params_of(s.kind)) {
        out += ",";
        out += af_param_name(p);
        out += "=";
        out += num(s.param(p));
        if (s.is_learnable(p)) {
            if (!learn.empty()) learn += '+';
            learn += af_param_name(p);
        }
    }
    if (!learn.empty()) out += ",learn=" + learn;
    return out;
}

inline ActivationSpec af_spec_from_text(const std::string& text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        parts.push_back(text.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    check(!parts.empty() && !parts[0].empty(), ErrorKind::data,
          "activation spec text is empty");
    ActivationSpec s;
    s.kind = af_kind_from_name(parts[0]);
    auto param_from_name = [](const std::string& name) {
        for (AfParam p : {AfParam::A, AfParam::B, AfParam::alpha, AfParam::beta,
                          AfParam::delta})
            if (name == af_param_name(p)) return p;
        throw Error(ErrorKind::data, "unknown activation parameter '" + name + "'");
    };
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const std::size_t eq = parts[i].find('=');
        check(eq != std::string::npos, ErrorKind::data,
              "malformed activation spec field '" + parts[i] + "'");
        const std::string key = parts[i].substr(0, eq);
        const std::string value = parts[i].substr(eq + 1);
        if (key == "learn") {
            std::size_t p0 = 0;
            while (p0 <= value.size()) {
                const std::size_t plus = value.find('+', p0);
                const std::string name = value.substr(p0, plus - p0);
                if (!name.empty()) {
                    switch (param_from_name(name)) {
                        case AfParam::A: s.learnable.A = true; break;
                        case AfParam::B: s.learnable.B = true; break;
                        case AfParam::alpha: s.learnable.alpha = true; break;
                        case AfParam::beta: s.learnable.beta = true; break;
                        case AfParam::delta: s.learnable.delta = true; break;
                    }
                }
                if (plus == std::string::npos) break;
                p0 = plus + 1;
            }
            continue;
        }
        s.set_param(param_from_name(key), std::stod(value));
    }
    af_validate(s);
    return s;
}

} // namespace lpnet
