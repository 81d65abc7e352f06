#include "dynmix/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dynmix {

namespace {

struct Color {
    int r, g, b;
};

// Diverging map: strong blue at -1, white at 0, strong red at +1.
Color diverging(double t) {
    t = std::clamp(t, -1.0, 1.0);
    const Color neg{33, 102, 172};
    const Color mid{247, 247, 247};
    const Color pos{178, 24, 43};
    const Color& far = t < 0 ? neg : pos;
    const double a = std::abs(t);
    return {static_cast<int>(std::lround(mid.r + a * (far.r - mid.r))),
            static_cast<int>(std::lround(mid.g + a * (far.g - mid.g))),
            static_cast<int>(std::lround(mid.b + a * (far.b - mid.b)))};
}

std::string rgb(const Color& c) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "rgb(%d,%d,%d)", c.r, c.g, c.b);
    return buf;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string heatmap_svg(const Matrix& m, const std::string& title) {
    const std::size_t rows = std::max<std::size_t>(m.rows(), 1);
    const std::size_t cols = std::max<std::size_t>(m.cols(), 1);
    const double cell = std::min(480.0 / static_cast<double>(std::max(rows, cols)), 40.0);
    const double grid_w = cell * static_cast<double>(cols);
    const double grid_h = cell * static_cast<double>(rows);
    const double margin = 28.0;
    const double legend_w = 18.0, legend_gap = 14.0, label_w = 52.0;
    const double width = margin * 2 + grid_w + legend_gap + legend_w + label_w;
    const double height = margin * 2 + grid_h + 16.0;

    double vmax = 0.0;
    for (double v : m.data()) vmax = std::max(vmax, std::abs(v));
    if (vmax <= 0.0) vmax = 1e-12;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\""
        << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << ' ' << fmt(height) << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << fmt(margin) << "\" y=\"" << fmt(margin - 10.0)
        << "\" font-family=\"sans-serif\" font-size=\"13\">" << xml_escape(title) << "</text>\n";

    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const Color c = diverging(m(i, j) / vmax);
            svg << "<rect x=\"" << fmt(margin + cell * static_cast<double>(j)) << "\" y=\""
                << fmt(margin + cell * static_cast<double>(i)) << "\" width=\"" << fmt(cell)
                << "\" height=\"" << fmt(cell) << "\" fill=\"" << rgb(c) << "\"/>\n";
        }
    }
    svg << "<rect x=\"" << fmt(margin) << "\" y=\"" << fmt(margin) << "\" width=\"" << fmt(grid_w)
        << "\" height=\"" << fmt(grid_h) << "\" fill=\"none\" stroke=\"#444\"/>\n";

    // Legend: vertical gradient bar with the symmetric scale printed beside it.
    const double lx = margin + grid_w + legend_gap;
    const int steps = 24;
    for (int s = 0; s < steps; ++s) {
        const double t = 1.0 - 2.0 * (static_cast<double>(s) + 0.5) / steps;
        svg << "<rect x=\"" << fmt(lx) << "\" y=\"" << fmt(margin + grid_h * s / steps)
            << "\" width=\"" << fmt(legend_w) << "\" height=\"" << fmt(grid_h / steps + 0.5)
            << "\" fill=\"" << rgb(diverging(t)) << "\"/>\n";
    }
    svg << "<rect x=\"" << fmt(lx) << "\" y=\"" << fmt(margin) << "\" width=\"" << fmt(legend_w)
        << "\" height=\"" << fmt(grid_h) << "\" fill=\"none\" stroke=\"#444\"/>\n";
    const double tx = lx + legend_w + 4.0;
    svg << "<text x=\"" << fmt(tx) << "\" y=\"" << fmt(margin + 5.0)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(vmax) << "</text>\n";
    svg << "<text x=\"" << fmt(tx) << "\" y=\"" << fmt(margin + grid_h / 2 + 4.0)
        << "\" font-family=\"sans-serif\" font-size=\"11\">0</text>\n";
    svg << "<text x=\"" << fmt(tx) << "\" y=\"" << fmt(margin + grid_h + 4.0)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(-vmax) << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

void write_heatmap_svg(const Matrix& m, const std::string& title,
                       const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write svg: " + path.string());
    out << heatmap_svg(m, title);
}

}  // namespace dynmix
