#pragma once

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "lpnet/metrics.hpp"
#include "lpnet/network.hpp"
#include "lpnet/svg.hpp"

namespace lpnet {

/// The layers from the 2-neuron bottleneck's output to the logits. Holds a
/// non-owning view into the full network, so the head always reproduces
/// the full net's weights exactly.
class Fc2Net {
public:
    Fc2Net(Network& net, std::size_t start, std::size_t classes)
        : net_(&net), start_(start), classes_(classes) {}

    Tensor logits(double x, double y) {
        Tensor cur({1, 2});
        cur.data[0] = x;
        cur.data[1] = y;
        for (std::size_t i = start_; i < net_->size(); ++i)
            cur = net_->layer(i).forward(cur);
        return cur;
    }

    std::vector<double> probabilities(double x, double y) {
        Tensor z = logits(x, y);
        double m = z.data[0];
        for (double v : z.data) m = std::max(m, v);
        double sum = 0.0;
        std::vector<double> p(z.numel());
        for (std::size_t i = 0; i < p.size(); ++i) {
            p[i] = std::exp(z.data[i] - m);
            sum += p[i];
        }
        for (double& v : p) v /= sum;
        return p;
    }

    std::size_t classes() const { return classes_; }
    std::size_t start_layer() const { return start_; }

private:
    Network* net_;
    std::size_t start_;
    std::size_t classes_;
};

/// Locates the 2-unit bottleneck (the first linear layer with two input
/// features downstream of it) and wraps everything after it.
inline Fc2Net build_fc2_net(Network& net) {
    for (std::size_t i = 0; i < net.size(); ++i) {
        auto* lin = dynamic_cast<Linear*>(&net.layer(i));
        if (lin == nullptr) continue;
        const std::string desc = net.layer(i).describe();
        if (desc.find("linear:in=2,") != std::string::npos) {
            std::size_t classes = lin->out_features();
            for (std::size_t j = i + 1; j < net.size(); ++j)
                if (auto* l2 = dynamic_cast<Linear*>(&net.layer(j)))
                    classes = l2->out_features();
            return Fc2Net(net, i, classes);
        }
    }
    throw Error(ErrorKind::usage, "build_fc2_net: network has no 2-unit bottleneck layer");
}

/// Per-image output of the 2-unit bottleneck layer over an image batch.
inline std::vector<std::array<double, 2>> fc2_features(Network& net, const Tensor& images,
                                                       std::size_t batch = 128) {
    std::size_t fc2_layer = net.size();
    for (std::size_t i = 0; i < net.size(); ++i)
        if (net.layer(i).describe().find("linear:in=2,") != std::string::npos) {
            check(i > 0, ErrorKind::usage, "fc2_features: bottleneck head starts the net");
            fc2_layer = i - 1;
            break;
        }
    check(fc2_layer < net.size(), ErrorKind::usage,
          "fc2_features: network has no 2-unit bottleneck layer");
    check(images.rank() == 4, ErrorKind::data,
          "fc2_features: expected batch [N,C,H,W], got " + shape_str(images.shape));
    std::vector<std::array<double, 2>> out;
    const std::size_t N = images.dim(0);
    const std::size_t per = images.numel() / N;
    net.set_capture(true);
    for (std::size_t start = 0; start < N; start += batch) {
        const std::size_t count = std::min(batch, N - start);
        Tensor chunk({count, images.dim(1), images.dim(2), images.dim(3)});
        std::copy(images.data.begin() + start * per,
                  images.data.begin() + (start + count) * per, chunk.data.begin());
        net.forward(chunk);
        const Tensor& feats = net.captured()[fc2_layer];
        check(feats.rank() == 2 && feats.dim(1) == 2, ErrorKind::usage,
              "fc2_features: bottleneck output is not 2-dimensional");
        for (std::size_t i = 0; i < count; ++i)
            out.push_back({feats.data[i * 2], feats.data[i * 2 + 1]});
    }
    net.set_capture(false);
    return out;
}

struct MapSample {
    std::size_t r_step;  // 1..N
    double theta;
    double x, y;         // Cartesian, in feature units
    std::size_t cls;
    double score;        // winning probability
};

struct TripPoint {
    double x, y;
    std::size_t class_a, class_b; // ordered a < b
};

struct BoundaryFit {
    std::size_t class_a, class_b;
    double cx, cy;       // centroid of the pair's trip points
    double dx, dy;       // unit direction of the fitted line
    double max_residual; // max perpendicular distance
    std::size_t points;
};

struct DecisionMap {
    std::vector<MapSample> samples;
    std::vector<TripPoint> trip_points;
    std::vector<BoundaryFit> fits;
    double origin_x = 0.0, origin_y = 0.0;
    double radius_unit = 1.0;
    std::size_t n_radii = 0;
    double dtheta = 0.01;
    std::size_t classes = 0;
};

/// Polar sweep of the 2-D feature plane: r = 1..N radius steps, theta in
/// [0, 2pi) at the given angular step. Records the winning class and score
/// per grid point and a trip point wherever the class changes between
/// adjacent theta samples (including the wrap-around pair).
inline DecisionMap sweep(Fc2Net& head, std::size_t n_radii, double dtheta,
                         double origin_x = 0.0, double origin_y = 0.0,
                         double radius_unit = 1.0) {
    check(n_radii >= 1, ErrorKind::usage, "sweep: need at least one radius step");
    check(dtheta > 0.0, ErrorKind::usage, "sweep: dtheta must be positive");
    check(radius_unit > 0.0, ErrorKind::usage, "sweep: radius unit must be positive");
    DecisionMap map;
    map.origin_x = origin_x;
    map.origin_y = origin_y;
    map.radius_unit = radius_unit;
    map.n_radii = n_radii;
    map.dtheta = dtheta;
    map.classes = head.classes();
    const auto n_theta = static_cast<std::size_t>(std::floor(2.0 * std::numbers::pi / dtheta)) + 1;
    for (std::size_t rs = 1; rs <= n_radii; ++rs) {
        const double R = static_cast<double>(rs) * radius_unit;
        std::vector<std::size_t> ring_cls(n_theta);
        std::vector<double> ring_x(n_theta), ring_y(n_theta);
        for (std::size_t t = 0; t < n_theta; ++t) {
            const double theta = static_cast<double>(t) * dtheta;
            const double x = origin_x + R * std::cos(theta);
            const double y = origin_y + R * std::sin(theta);
            const std::vector<double> p = head.probabilities(x, y);
            std::size_t cls = 0;
            for (std::size_t c = 1; c < p.size(); ++c)
                if (p[c] > p[cls]) cls = c;
            map.samples.push_back({rs, theta, x, y, cls, p[cls]});
            ring_cls[t] = cls;
            ring_x[t] = x;
            ring_y[t] = y;
        }
        for (std::size_t t = 0; t < n_theta; ++t) {
            const std::size_t u = (t + 1) % n_theta;
            if (ring_cls[t] == ring_cls[u]) continue;
            TripPoint tp;
            tp.x = 0.5 * (ring_x[t] + ring_x[u]);
            tp.y = 0.5 * (ring_y[t] + ring_y[u]);
            tp.class_a = std::min(ring_cls[t], ring_cls[u]);
            tp.class_b = std::max(ring_cls[t], ring_cls[u]);
            map.trip_points.push_back(tp);
        }
    }
    return map;
}

/// Total-least-squares line per class pair (principal axis of the trip
/// points); the residual is the max perpendicular distance. Pairs with
/// fewer than 2 points are skipped.
inline std::vector<BoundaryFit> fit_boundaries(DecisionMap& map) {
    std::map<std::pair<std::size_t, std::size_t>, std::vector<const TripPoint*>> groups;
    for (const TripPoint& tp : map.trip_points)
        groups[{tp.class_a, tp.class_b}].push_back(&tp);
    std::vector<BoundaryFit> fits;
    for (const auto& [pair, pts] : groups) {
        if (pts.size() < 2) continue;
        BoundaryFit f;
        f.class_a = pair.first;
        f.class_b = pair.second;
        f.points = pts.size();
        double mx = 0.0, my = 0.0;
        for (const TripPoint* p : pts) {
            mx += p->x;
            my += p->y;
        }
        mx /= static_cast<double>(pts.size());
        my /= static_cast<double>(pts.size());
        double sxx = 0.0, sxy = 0.0, syy = 0.0;
        for (const TripPoint* p : pts) {
            const double dx = p->x - mx, dy = p->y - my;
            sxx += dx * dx;
            sxy += dx * dy;
            syy += dy * dy;
        }
        const double phi = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
        f.cx = mx;
        f.cy = my;
        f.dx = std::cos(phi);
        f.dy = std::sin(phi);
        f.max_residual = 0.0;
        for (const TripPoint* p : pts) {
            const double res =
                std::abs(-(p->x - mx) * f.dy + (p->y - my) * f.dx);
            f.max_residual = std::max(f.max_residual, res);
        }
        fits.push_back(f);
    }
    map.fits = fits;
    return fits;
}

/// Fraction of theta rays whose class at r=1 matches the class at r=N.
inline double ray_constancy(const DecisionMap& map) {
    check(!map.samples.empty(), ErrorKind::usage, "ray_constancy: empty map");
    std::map<long long, std::pair<std::size_t, std::size_t>> first_last;
    for (const MapSample& s : map.samples) {
        const auto key = static_cast<long long>(std::llround(s.theta / map.dtheta));
        if (s.r_step == 1) first_last[key].first = s.cls + 1;
        if (s.r_step == map.n_radii) first_last[key].second = s.cls + 1;
    }
    std::size_t same = 0, total = 0;
    for (const auto& [key, fl] : first_last)
        if (fl.first && fl.second) {
            ++total;
            if (fl.first == fl.second) ++same;
        }
    check(total > 0, ErrorKind::usage, "ray_constancy: no complete rays");
    return static_cast<double>(same) / static_cast<double>(total);
}

inline double mean_winning_score(const DecisionMap& map, std::size_t r_step) {
    double acc = 0.0;
    std::size_t n = 0;
    for (const MapSample& s : map.samples)
        if (s.r_step == r_step) {
            acc += s.score;
            ++n;
        }
    check(n > 0, ErrorKind::usage, "mean_winning_score: no samples at that radius");
    return acc / static_cast<double>(n);
}

/// Radius around the centroid containing the given mass fraction of the
/// feature cloud.
inline double feature_radius(const std::vector<std::array<double, 2>>& feats, double q,
                             double origin_x, double origin_y) {
    check(!feats.empty(), ErrorKind::usage, "feature_radius: empty feature set");
    std::vector<double> r;
    r.reserve(feats.size());
    for (const auto& f : feats)
        r.push_back(std::hypot(f[0] - origin_x, f[1] - origin_y));
    return quantile(std::move(r), q);
}

/// Deterministic SVG: class-colored sweep samples, fitted boundary lines,
/// optional feature scatter, one legend entry per class.
inline std::string render_map(const DecisionMap& map,
                              const std::vector<std::array<double, 2>>& features = {},
                              const std::vector<std::size_t>& feature_labels = {}) {
    const double size = 720.0, margin = 40.0, legend_w = 90.0;
    SvgCanvas svg(size + legend_w, size);
    const double sweep_r = static_cast<double>(map.n_radii) * map.radius_unit;
    const double scale = (size / 2.0 - margin) / sweep_r;
    const double cx = size / 2.0, cy = size / 2.0;
    auto X = [&](double x) { return cx + (x - map.origin_x) * scale; };
    auto Y = [&](double y) { return cy - (y - map.origin_y) * scale; };

    const double dot = std::max(1.2, scale * map.radius_unit * map.dtheta * 0.9);
    for (const MapSample& s : map.samples)
        svg.circle(X(s.x), Y(s.y), dot, svg_color(s.cls), 0.55);
    for (const BoundaryFit& f : map.fits) {
        const double L = sweep_r * 1.05;
        svg.line(X(f.cx - f.dx * L), Y(f.cy - f.dy * L), X(f.cx + f.dx * L),
                 Y(f.cy + f.dy * L), "#222222", 1.2);
    }
    for (std::size_t i = 0; i < features.size(); ++i) {
        const std::string color =
            i < feature_labels.size() ? svg_color(feature_labels[i]) : std::string("#222222");
        svg.circle(X(features[i][0]), Y(features[i][1]), 2.0, color, 0.9);
    }
    svg.circle(X(map.origin_x), Y(map.origin_y), 3.0, "#000000");
    for (std::size_t c = 0; c < map.classes; ++c) {
        const double ly = 20.0 + static_cast<double>(c) * 18.0;
        svg.rect(size + 10.0, ly - 9.0, 12.0, 12.0, svg_color(c));
        svg.text(size + 28.0, ly + 1.0, "class " + std::to_string(c), 12.0);
    }
    return svg.finish();
}

} // namespace lpnet
