#pragma once

#include <string>
#include <vector>

#include "pwl/geom2d.hpp"

namespace pwl {

// Deterministic SVG emission: fixed canvas, %.9g coordinate formatting,
// y axis flipped to mathematical orientation.
class SvgPlot {
public:
    void add_polygon(const std::vector<Vec2>& vertices, const std::string& fill,
                     const std::string& stroke, double stroke_width = 1.0);
    void add_legend(const std::vector<std::pair<std::string, std::string>>& entries);

    std::string render() const;

    // Color palette for up to 8 classes.
    static const std::vector<std::string>& palette();

private:
    struct Poly {
        std::vector<Vec2> vertices;
        std::string fill, stroke;
        double stroke_width;
    };
    std::vector<Poly> polys_;
    std::vector<std::pair<std::string, std::string>> legend_;
};

}  // namespace pwl
