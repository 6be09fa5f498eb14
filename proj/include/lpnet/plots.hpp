#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lpnet/svg.hpp"
#include "lpnet/tensor.hpp"

namespace lpnet {

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

namespace detail {

struct ChartFrame {
    double x0, y0, w, h;       // plot area in canvas units
    double xmin, xmax, ymin, ymax;

    double X(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
    double Y(double y) const { return y0 + h - (y - ymin) / (ymax - ymin) * h; }
};

inline ChartFrame frame_for(const std::vector<Series>& series, double width,
                            double height) {
    ChartFrame f{60.0, 40.0, width - 80.0, height - 90.0, 0.0, 1.0, 0.0, 1.0};
    bool any = false;
    for (const Series& s : series)
        for (const auto& [x, y] : s.points) {
            if (!any) {
                f.xmin = f.xmax = x;
                f.ymin = f.ymax = y;
                any = true;
            }
            f.xmin = std::min(f.xmin, x);
            f.xmax = std::max(f.xmax, x);
            f.ymin = std::min(f.ymin, y);
            f.ymax = std::max(f.ymax, y);
        }
    if (f.xmax - f.xmin < 1e-12) f.xmax = f.xmin + 1.0;
    const double pad = (f.ymax - f.ymin < 1e-12) ? 0.5 : 0.06 * (f.ymax - f.ymin);
    f.ymin -= pad;
    f.ymax += pad;
    return f;
}

inline void draw_axes(SvgCanvas& svg, const ChartFrame& f, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel) {
    svg.line(f.x0, f.y0, f.x0, f.y0 + f.h, "#333333", 1.0);
    svg.line(f.x0, f.y0 + f.h, f.x0 + f.w, f.y0 + f.h, "#333333", 1.0);
    svg.text(f.x0 + f.w / 2.0, 22.0, title, 15.0, "#222222", "middle");
    svg.text(f.x0 + f.w / 2.0, f.y0 + f.h + 34.0, xlabel, 12.0, "#444444", "middle");
    svg.text(16.0, f.y0 - 10.0, ylabel, 12.0, "#444444");
    svg.text(f.x0 - 6.0, f.y0 + f.h + 4.0, svg_num(f.ymin, 3), 10.0, "#666666", "end");
    svg.text(f.x0 - 6.0, f.y0 + 8.0, svg_num(f.ymax, 3), 10.0, "#666666", "end");
    svg.text(f.x0, f.y0 + f.h + 16.0, svg_num(f.xmin, 2), 10.0, "#666666", "middle");
    svg.text(f.x0 + f.w, f.y0 + f.h + 16.0, svg_num(f.xmax, 2), 10.0, "#666666", "middle");
}

} // namespace detail

inline std::string line_chart(const std::vector<Series>& series, const std::string& title,
                              const std::string& xlabel, const std::string& ylabel,
                              double width = 640.0, double height = 420.0) {
    SvgCanvas svg(width, height);
    const detail::ChartFrame f = detail::frame_for(series, width, height);
    detail::draw_axes(svg, f, title, xlabel, ylabel);
    for (std::size_t i = 0; i < series.size(); ++i) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& [x, y] : series[i].points) pts.emplace_back(f.X(x), f.Y(y));
        svg.polyline(pts, svg_color(i), 1.8);
        for (const auto& [px, py] : pts) svg.circle(px, py, 2.4, svg_color(i));
        svg.rect(f.x0 + f.w - 150.0, 34.0 + static_cast<double>(i) * 16.0, 10.0, 10.0,
                 svg_color(i));
        svg.text(f.x0 + f.w - 136.0, 43.0 + static_cast<double>(i) * 16.0, series[i].name,
                 11.0);
    }
    return svg.finish();
}

struct BarGroup {
    std::string label;
    std::vector<double> values; // parallel to the series name list
};

inline std::string bar_chart(const std::vector<std::string>& series_names,
                             const std::vector<BarGroup>& groups, const std::string& title,
                             const std::string& ylabel, double width = 720.0,
                             double height = 420.0) {
    SvgCanvas svg(width, height);
    double vmax = 0.0;
    for (const BarGroup& g : groups)
        for (double v : g.values) vmax = std::max(vmax, v);
    if (vmax <= 0.0) vmax = 1.0;
    vmax *= 1.1;
    const double x0 = 60.0, y0 = 40.0, w = width - 80.0, h = height - 110.0;
    svg.line(x0, y0, x0, y0 + h, "#333333", 1.0);
    svg.line(x0, y0 + h, x0 + w, y0 + h, "#333333", 1.0);
    svg.text(x0 + w / 2.0, 22.0, title, 15.0, "#222222", "middle");
    svg.text(16.0, y0 - 10.0, ylabel, 12.0, "#444444");
    svg.text(x0 - 6.0, y0 + 8.0, svg_num(vmax, 3), 10.0, "#666666", "end");
    const double group_w = w / static_cast<double>(groups.size());
    const double bar_w = group_w * 0.7 / static_cast<double>(std::max<std::size_t>(
                                             1, series_names.size()));
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const double gx = x0 + group_w * static_cast<double>(g) + group_w * 0.15;
        for (std::size_t s = 0; s < groups[g].values.size(); ++s) {
            const double v = groups[g].values[s];
            const double bh = v / vmax * h;
            svg.rect(gx + bar_w * static_cast<double>(s), y0 + h - bh, bar_w * 0.92, bh,
                     svg_color(s));
        }
        svg.text(gx + group_w * 0.35, y0 + h + 16.0, groups[g].label, 10.0, "#444444",
                 "middle");
    }
    for (std::size_t s = 0; s < series_names.size(); ++s) {
        svg.rect(x0 + w - 150.0, 34.0 + static_cast<double>(s) * 16.0, 10.0, 10.0,
                 svg_color(s));
        svg.text(x0 + w - 136.0, 43.0 + static_cast<double>(s) * 16.0, series_names[s], 11.0);
    }
    return svg.finish();
}

/// Grayscale contact sheet: each [H,W] (or [1,H,W]) plane becomes a tile of
/// pixel rects with its caption underneath.
inline std::string image_grid(const std::vector<Tensor>& planes,
                              const std::vector<std::string>& captions,
                              std::size_t columns = 4, double cell_px = 4.0) {
    check(!planes.empty(), ErrorKind::usage, "image_grid: no images");
    const std::size_t rows = (planes.size() + columns - 1) / columns;
    const std::size_t H = planes[0].rank() == 3 ? planes[0].dim(1) : planes[0].dim(0);
    const std::size_t W = planes[0].rank() == 3 ? planes[0].dim(2) : planes[0].dim(1);
    const double tile_w = static_cast<double>(W) * cell_px + 12.0;
    const double tile_h = static_cast<double>(H) * cell_px + 30.0;
    SvgCanvas svg(tile_w * static_cast<double>(columns) + 12.0,
                  tile_h * static_cast<double>(rows) + 12.0);
    for (std::size_t i = 0; i < planes.size(); ++i) {
        const Tensor& t = planes[i];
        check((t.rank() == 2 && t.dim(0) == H && t.dim(1) == W) ||
                  (t.rank() == 3 && t.dim(0) == 1 && t.dim(1) == H && t.dim(2) == W),
              ErrorKind::usage, "image_grid: mixed image shapes");
        const double ox = 12.0 + tile_w * static_cast<double>(i % columns);
        const double oy = 12.0 + tile_h * static_cast<double>(i / columns);
        for (std::size_t y = 0; y < H; ++y)
            for (std::size_t x = 0; x < W; ++x) {
                const double v = std::clamp(t.data[y * W + x], 0.0, 1.0);
                const int g = static_cast<int>(std::lround(v * 255.0));
                char color[8];
                std::snprintf(color, sizeof color, "#%02x%02x%02x", g, g, g);
                svg.rect(ox + static_cast<double>(x) * cell_px,
                         oy + static_cast<double>(y) * cell_px, cell_px, cell_px, color);
            }
        if (i < captions.size())
            svg.text(ox + static_cast<double>(W) * cell_px / 2.0,
                     oy + static_cast<double>(H) * cell_px + 16.0, captions[i], 11.0,
                     "#333333", "middle");
    }
    return svg.finish();
}

} // namespace lpnet
