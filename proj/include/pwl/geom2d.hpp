#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "pwl/config.hpp"
#include "pwl/errors.hpp"

namespace pwl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;

// Orthonormal 2D plane embedded in R^n: embed(u) = origin + basis * u.
struct Embedding {
    Vec origin;   // n
    Mat basis;    // n x 2, orthonormal columns

    int ambient_dim() const { return static_cast<int>(origin.size()); }
    Vec embed(const Vec2& u) const { return origin + basis * u; }
    // Orthogonal projection onto plane coordinates.
    Vec2 project(const Vec& x) const { return basis.transpose() * (x - origin); }

    static Embedding identity2d();
};

// Convex polygon in plane coordinates, counterclockwise, embedded in R^n.
struct PlanePolytope {
    Embedding embedding;
    std::vector<Vec2> vertices;

    Vec ambient_vertex(std::size_t i) const { return embedding.embed(vertices[i]); }
};

// Conjunction of halfspaces a . y <= b.
struct Halfspace {
    Vec normal;
    double offset = 0.0;
};
using HalfspaceSet = std::vector<Halfspace>;

// Builds the plane embedding (Gram-Schmidt on the first two independent
// edges) and returns the polygon in counterclockwise plane coordinates.
// Throws TooFewVertices, NonPlanar, Degenerate.
PlanePolytope make_plane_polytope(const std::vector<Vec>& ambient_vertices);

// Convenience constructor for a polygon already in R^2.
PlanePolytope make_polygon_2d(const std::vector<Vec2>& vertices);

// Checks the type invariants (orthonormal basis, counterclockwise convex
// vertex loop, positive area); throws on violation.
void validate(const PlanePolytope& poly);

double area(const PlanePolytope& poly);
Vec2 centroid(const PlanePolytope& poly);
bool contains(const PlanePolytope& poly, const Vec2& u);

// Split of a polygon by the zero set of an affine function, given its values
// at the vertices. Vertices with |value| within tolerance land in both parts;
// parts with area below the geometry tolerance are dropped.
struct SplitResult {
    std::optional<PlanePolytope> neg;
    std::optional<PlanePolytope> pos;
};
SplitResult split_by_values(const PlanePolytope& poly, const std::vector<double>& values);

// Same split but carrying per-vertex payload vectors (linearly interpolated
// at inserted crossing points). Used to thread affine post-images through
// repeated splits.
struct SplitPart {
    PlanePolytope poly;
    std::vector<Vec> payload;
};
struct PayloadSplitResult {
    std::optional<SplitPart> neg;
    std::optional<SplitPart> pos;
};
PayloadSplitResult split_with_payload(const PlanePolytope& poly,
                                      const std::vector<double>& values,
                                      const std::vector<Vec>& payload);

struct Hull2D {
    std::vector<Vec2> vertices;  // counterclockwise when not degenerate
    bool degenerate = false;     // point or segment
};
Hull2D convex_hull_2d(std::vector<Vec2> points);

}  // namespace pwl
