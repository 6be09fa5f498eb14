#pragma once

#include <array>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace lpnet {

/// Fixed-point number formatting so identical inputs render to identical
/// bytes regardless of stream state.
inline std::string svg_num(double v, int decimals = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string s(buf);
    if (s == "-0.000") s = "0.000";
    return s;
}

/// Ten-class qualitative palette plus overflow greys.
inline std::string svg_color(std::size_t idx) {
    static const std::array<const char*, 12> palette = {
        "#4269d0", "#efb118", "#ff725c", "#6cc5b0", "#3ca951", "#ff8ab7",
        "#a463f2", "#97bbf5", "#9c6b4e", "#9498a0", "#5c5c5c", "#c3c3c3"};
    return palette[idx % palette.size()];
}

class SvgCanvas {
public:
    SvgCanvas(double width, double height) : w_(width), h_(height) {}

    void rect(double x, double y, double w, double h, const std::string& fill,
              double opacity = 1.0) {
        body_ << "<rect x=\"" << svg_num(x) << "\" y=\"" << svg_num(y) << "\" width=\""
              << svg_num(w) << "\" height=\"" << svg_num(h) << "\" fill=\"" << fill << "\"";
        if (opacity < 1.0) body_ << " fill-opacity=\"" << svg_num(opacity) << "\"";
        body_ << "/>\n";
    }

    void circle(double cx, double cy, double r, const std::string& fill,
                double opacity = 1.0) {
        body_ << "<circle cx=\"" << svg_num(cx) << "\" cy=\"" << svg_num(cy) << "\" r=\""
              << svg_num(r) << "\" fill=\"" << fill << "\"";
        if (opacity < 1.0) body_ << " fill-opacity=\"" << svg_num(opacity) << "\"";
        body_ << "/>\n";
    }

    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double width = 1.0) {
        body_ << "<line x1=\"" << svg_num(x1) << "\" y1=\"" << svg_num(y1) << "\" x2=\""
              << svg_num(x2) << "\" y2=\"" << svg_num(y2) << "\" stroke=\"" << stroke
              << "\" stroke-width=\"" << svg_num(width) << "\"/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts,
                  const std::string& stroke, double width = 1.5) {
        body_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
              << svg_num(width) << "\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i) body_ << ' ';
            body_ << svg_num(pts[i].first) << ',' << svg_num(pts[i].second);
        }
        body_ << "\"/>\n";
    }

    void text(double x, double y, const std::string& s, double size = 12.0,
              const std::string& fill = "#222222", const std::string& anchor = "start") {
        body_ << "<text x=\"" << svg_num(x) << "\" y=\"" << svg_num(y) << "\" font-size=\""
              << svg_num(size) << "\" font-family=\"sans-serif\" fill=\"" << fill
              << "\" text-anchor=\"" << anchor << "\">" << escape(s) << "</text>\n";
    }

    void raw(const std::string& s) { body_ << s; }

    std::string finish() const {
        std::ostringstream out;
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << svg_num(w_, 0)
            << "\" height=\"" << svg_num(h_, 0) << "\" viewBox=\"0 0 " << svg_num(w_, 0)
            << ' ' << svg_num(h_, 0) << "\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n"
            << body_.str() << "</svg>\n";
        return out.str();
    }

    double width() const { return w_; }
    double height() const { return h_; }

private:
    static std::string escape(const std::string& s) {
        std::string out;
        for (char c : s) {
            if (c == '&') out += "&amp;";
            else if (c == '<') out += "&lt;";
            else if (c == '>') out += "&gt;";
            else out += c;
        }
        return out;
    }

    double w_, h_;
    std::ostringstream body_;
};

} // namespace lpnet
