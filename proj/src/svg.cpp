#include "pwl/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>

namespace pwl {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", x);
    return buf;
}

}  // namespace

const std::vector<std::string>& SvgPlot::palette() {
    static const std::vector<std::string> colors = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
    return colors;
}

void SvgPlot::add_polygon(const std::vector<Vec2>& vertices, const std::string& fill,
                          const std::string& stroke, double stroke_width) {
    polys_.push_back({vertices, fill, stroke, stroke_width});
}

void SvgPlot::add_legend(const std::vector<std::pair<std::string, std::string>>& entries) {
    legend_ = entries;
}

std::string SvgPlot::render() const {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& p : polys_) {
        for (const auto& v : p.vertices) {
            xmin = std::min(xmin, v.x());
            xmax = std::max(xmax, v.x());
            ymin = std::min(ymin, v.y());
            ymax = std::max(ymax, v.y());
        }
    }
    if (polys_.empty()) xmin = ymin = 0.0, xmax = ymax = 1.0;
    const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
    const double size = 640.0, pad = 40.0;
    const double scale = (size - 2.0 * pad) / span;
    auto tx = [&](double x) { return pad + (x - xmin) * scale; };
    auto ty = [&](double y) { return size - pad - (y - ymin) * scale; };  // flipped

    std::ostringstream out;
    const double legend_w = legend_.empty() ? 0.0 : 180.0;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(size + legend_w)
        << "\" height=\"" << fmt(size) << "\" viewBox=\"0 0 " << fmt(size + legend_w) << " "
        << fmt(size) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const auto& p : polys_) {
        out << "<polygon points=\"";
        for (std::size_t i = 0; i < p.vertices.size(); ++i) {
            if (i) out << " ";
            out << fmt(tx(p.vertices[i].x())) << "," << fmt(ty(p.vertices[i].y()));
        }
        out << "\" fill=\"" << p.fill << "\" stroke=\"" << p.stroke << "\" stroke-width=\""
            << fmt(p.stroke_width) << "\"/>\n";
    }
    for (std::size_t i = 0; i < legend_.size(); ++i) {
        const double y = pad + 24.0 * static_cast<double>(i);
        out << "<rect x=\"" << fmt(size + 10.0) << "\" y=\"" << fmt(y) << "\" width=\"16\" "
            << "height=\"16\" fill=\"" << legend_[i].second << "\"/>\n";
        out << "<text x=\"" << fmt(size + 32.0) << "\" y=\"" << fmt(y + 13.0)
            << "\" font-family=\"sans-serif\" font-size=\"14\">" << legend_[i].first
            << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace pwl
